#include "mrc/brat.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "mrc/errors.hpp"

namespace mrc {

const ConceptMention* Document::find_concept(const std::string& id) const {
  for (const auto& c : concepts)
    if (c.id == id) return &c;
  return nullptr;
}

namespace {

std::vector<std::string_view> split_lines(std::string_view s) {
  std::vector<std::string_view> lines;
  size_t pos = 0;
  while (pos <= s.size()) {
    size_t nl = s.find('\n', pos);
    if (nl == std::string_view::npos) {
      lines.push_back(s.substr(pos));
      break;
    }
    std::string_view line = s.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  size_t pos = 0;
  while (true) {
    size_t t = line.find(sep, pos);
    if (t == std::string_view::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, t - pos));
    pos = t + 1;
  }
  return out;
}

size_t parse_offset(std::string_view tok, int line_no) {
  if (tok.empty()) throw ParseError("malformed offset (empty)", line_no);
  size_t value = 0;
  for (char c : tok) {
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw ParseError("malformed offset '" + std::string(tok) + "'", line_no);
    value = value * 10 + static_cast<size_t>(c - '0');
  }
  return value;
}

ConceptMention parse_t_line(std::string_view line, std::string_view txt, const Schema& schema,
                            int line_no) {
  auto fields = split_fields(line, '\t');
  if (fields.size() < 3)
    throw ParseError("entity line needs ID<TAB>Category offsets<TAB>text", line_no);
  ConceptMention m;
  m.id = std::string(fields[0]);

  auto head = split_fields(fields[1], ' ');
  if (head.size() < 3) throw ParseError("entity line needs category and offsets", line_no);
  m.category = std::string(head[0]);
  if (!schema.has_category(m.category))
    throw ParseError("category '" + m.category + "' not in schema", line_no);

  // Offsets: "start end" or discontinuous "start end;start end;...". The
  // space-separated form after the category is rejoined so both layouts parse.
  std::string offsets;
  for (size_t i = 1; i < head.size(); ++i) {
    if (i > 1) offsets += ' ';
    offsets += std::string(head[i]);
  }
  for (auto frag : split_fields(offsets, ';')) {
    while (!frag.empty() && frag.front() == ' ') frag.remove_prefix(1);
    auto pair = split_fields(frag, ' ');
    if (pair.size() != 2) throw ParseError("malformed offset fragment '" + std::string(frag) + "'", line_no);
    CharSpan span{parse_offset(pair[0], line_no), parse_offset(pair[1], line_no)};
    if (span.start >= span.end)
      throw ParseError("malformed offset: start >= end", line_no);
    if (span.end > txt.size())
      throw ParseError("offset " + std::to_string(span.end) + " beyond text end (" +
                           std::to_string(txt.size()) + ")",
                       line_no);
    m.fragments.push_back(span);
  }
  std::sort(m.fragments.begin(), m.fragments.end());
  for (size_t i = 1; i < m.fragments.size(); ++i)
    if (m.fragments[i].start < m.fragments[i - 1].end)
      throw ParseError("overlapping fragments within one mention", line_no);

  std::string expected;
  for (size_t i = 0; i < m.fragments.size(); ++i) {
    if (i > 0) expected += ' ';
    expected += std::string(txt.substr(m.fragments[i].start, m.fragments[i].length()));
  }
  m.text = std::string(fields[2]);
  if (m.text != expected)
    throw ParseError("text field mismatch: annotation says '" + m.text +
                         "' but document has '" + expected + "'",
                     line_no);
  return m;
}

RelationAnnotation parse_r_line(std::string_view line, int line_no) {
  auto fields = split_fields(line, '\t');
  if (fields.size() < 2)
    throw ParseError("relation line needs ID<TAB>Type Arg1:Tx Arg2:Ty", line_no);
  auto parts = split_fields(fields[1], ' ');
  if (parts.size() != 3)
    throw ParseError("relation line needs Type Arg1:Tx Arg2:Ty", line_no);
  RelationAnnotation r;
  r.id = std::string(fields[0]);
  r.relation_type = std::string(parts[0]);
  auto read_arg = [&](std::string_view tok, std::string_view tag) {
    if (tok.substr(0, tag.size()) != tag)
      throw ParseError("expected '" + std::string(tag) + "' argument", line_no);
    return std::string(tok.substr(tag.size()));
  };
  r.arg1 = read_arg(parts[1], "Arg1:");
  r.arg2 = read_arg(parts[2], "Arg2:");
  return r;
}

}  // namespace

Document parse_brat_document(std::string_view txt_content, std::string_view ann_content,
                             const Schema& schema, const std::string& doc_id,
                             ParseStats* stats) {
  Document doc;
  doc.doc_id = doc_id;
  doc.text = std::string(txt_content);

  struct PendingRelation {
    RelationAnnotation rel;
    int line_no;
  };
  std::vector<PendingRelation> pending;

  auto lines = split_lines(ann_content);
  for (size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    int line_no = static_cast<int>(i + 1);
    if (line.empty()) continue;
    switch (line.front()) {
      case 'T':
        doc.concepts.push_back(parse_t_line(line, txt_content, schema, line_no));
        break;
      case 'R':
        pending.push_back({parse_r_line(line, line_no), line_no});
        break;
      default:
        // A-/E-/N-/#-lines and anything else carry no concept/relation payload
        // for this pipeline; count and move on.
        if (stats) stats->ignored_lines++;
        break;
    }
  }

  std::map<std::string, const ConceptMention*> by_id;
  for (const auto& c : doc.concepts) {
    if (by_id.count(c.id))
      throw ParseError("duplicate mention id '" + c.id + "'", 0);
    by_id[c.id] = &c;
  }

  // Relations resolve after all T-lines so .ann line order does not matter.
  for (const auto& [rel, line_no] : pending) {
    auto a1 = by_id.find(rel.arg1);
    auto a2 = by_id.find(rel.arg2);
    if (a1 == by_id.end())
      throw ParseError("relation argument '" + rel.arg1 + "' does not resolve", line_no);
    if (a2 == by_id.end())
      throw ParseError("relation argument '" + rel.arg2 + "' does not resolve", line_no);
    const RelationType* rt = schema.find_relation(rel.relation_type);
    if (rt == nullptr)
      throw ParseError("relation type '" + rel.relation_type + "' not in schema", line_no);
    if (a1->second->category != rt->trigger_category ||
        a2->second->category != rt->attribute_category)
      throw ParseError("relation type/category mismatch: " + rel.relation_type + " pairs (" +
                           rt->trigger_category + ", " + rt->attribute_category + ") but got (" +
                           a1->second->category + ", " + a2->second->category + ")",
                       line_no);
    doc.relations.push_back(rel);
  }
  return doc;
}

std::string serialize_brat(const Document& doc) {
  std::ostringstream out;
  std::map<std::string, std::string> id_map;
  int t = 0;
  for (const auto& m : doc.concepts) {
    std::string new_id = "T" + std::to_string(++t);
    id_map[m.id] = new_id;
    out << new_id << '\t' << m.category << ' ';
    for (size_t i = 0; i < m.fragments.size(); ++i) {
      if (i > 0) out << ';';
      out << m.fragments[i].start << ' ' << m.fragments[i].end;
    }
    out << '\t' << m.text << '\n';
  }
  int r = 0;
  for (const auto& rel : doc.relations) {
    out << 'R' << ++r << '\t' << rel.relation_type << " Arg1:" << id_map.at(rel.arg1)
        << " Arg2:" << id_map.at(rel.arg2) << '\n';
  }
  return out.str();
}

namespace {

bool is_ws(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::vector<CharSpan> raw_sentence_spans(const std::string& text) {
  std::vector<CharSpan> segments;
  size_t seg_start = 0;
  auto close_segment = [&](size_t end) {
    // Trim to the non-whitespace extent; drop all-whitespace segments.
    size_t s = seg_start, e = end;
    while (s < e && is_ws(text[s])) ++s;
    while (e > s && is_ws(text[e - 1])) --e;
    if (s < e) segments.push_back({s, e});
  };
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\n') {
      close_segment(i);
      seg_start = i + 1;
      continue;
    }
    if ((c == '.' || c == '?' || c == '!') && i + 1 < text.size() && is_ws(text[i + 1])) {
      size_t j = i + 1;
      while (j < text.size() && is_ws(text[j])) {
        if (text[j] == '\n') break;  // the newline rule takes over
        ++j;
      }
      if (j < text.size() && text[j] != '\n' &&
          (std::isupper(static_cast<unsigned char>(text[j])) ||
           std::isdigit(static_cast<unsigned char>(text[j])))) {
        close_segment(i + 1);
        seg_start = i + 1;
      }
    }
  }
  close_segment(text.size());
  return segments;
}

}  // namespace

std::vector<Sentence> split_sentences(const Document& doc) {
  std::vector<CharSpan> spans = raw_sentence_spans(doc.text);

  // A gold mention must not straddle a sentence boundary: merge the sentences
  // its envelope touches (extending to the envelope end when it reaches past
  // the last one).
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& m : doc.concepts) {
      CharSpan env = m.envelope();
      if (env.start >= env.end) continue;
      size_t first = spans.size(), last = spans.size();
      for (size_t i = 0; i < spans.size(); ++i) {
        if (spans[i].overlaps(env)) {
          if (first == spans.size()) first = i;
          last = i;
        }
      }
      if (first == spans.size()) continue;  // whitespace-only mention
      CharSpan merged{std::min(spans[first].start, env.start),
                      std::max(spans[last].end, env.end)};
      if (first == last && spans[first] == merged) continue;
      spans.erase(spans.begin() + static_cast<long>(first),
                  spans.begin() + static_cast<long>(last) + 1);
      spans.insert(spans.begin() + static_cast<long>(first), merged);
      changed = true;
      break;
    }
  }

  std::vector<Sentence> out;
  out.reserve(spans.size());
  for (const auto& s : spans)
    out.push_back({doc.doc_id, s, doc.text.substr(s.start, s.length())});
  return out;
}

namespace {

struct MentionKey {
  std::string category;
  std::vector<CharSpan> fragments;
  std::string text;
  auto operator<=>(const MentionKey&) const = default;
};

MentionKey key_of(const ConceptMention& m) { return {m.category, m.fragments, m.text}; }

}  // namespace

bool documents_equivalent(const Document& a, const Document& b) {
  if (a.text != b.text) return false;
  std::vector<MentionKey> ka, kb;
  for (const auto& m : a.concepts) ka.push_back(key_of(m));
  for (const auto& m : b.concepts) kb.push_back(key_of(m));
  std::sort(ka.begin(), ka.end());
  std::sort(kb.begin(), kb.end());
  if (ka != kb) return false;

  using RelKey = std::tuple<std::string, MentionKey, MentionKey>;
  auto rel_keys = [](const Document& d) {
    std::vector<RelKey> keys;
    for (const auto& r : d.relations) {
      const ConceptMention* m1 = d.find_concept(r.arg1);
      const ConceptMention* m2 = d.find_concept(r.arg2);
      if (!m1 || !m2) return std::vector<RelKey>{};
      keys.emplace_back(r.relation_type, key_of(*m1), key_of(*m2));
    }
    std::sort(keys.begin(), keys.end());
    return keys;
  };
  return rel_keys(a) == rel_keys(b);
}

std::vector<Document> load_brat_corpus(const std::string& dir, const Schema& schema,
                                       ParseStats* stats) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError("corpus directory not found: " + dir);
  std::vector<fs::path> txt_files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".txt")
      txt_files.push_back(entry.path());
  std::sort(txt_files.begin(), txt_files.end());

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read file: " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };

  std::vector<Document> docs;
  for (const auto& txt_path : txt_files) {
    fs::path ann_path = txt_path;
    ann_path.replace_extension(".ann");
    std::string ann;
    if (fs::exists(ann_path)) {
      ann = slurp(ann_path);
    } else if (stats) {
      stats->missing_ann++;
    }
    try {
      docs.push_back(parse_brat_document(slurp(txt_path), ann, schema,
                                         txt_path.stem().string(), stats));
    } catch (const ParseError& e) {
      ParseError wrapped(txt_path.stem().string() + ".ann: " + std::string(e.what()));
      wrapped.line = e.line;
      throw wrapped;
    }
  }
  return docs;
}

void write_brat_document(const Document& doc, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream out(fs::path(dir) / (doc.doc_id + ".txt"), std::ios::binary);
    if (!out) throw IoError("cannot write document text under " + dir);
    out << doc.text;
  }
  {
    std::ofstream out(fs::path(dir) / (doc.doc_id + ".ann"), std::ios::binary);
    if (!out) throw IoError("cannot write annotations under " + dir);
    out << serialize_brat(doc);
  }
}

}  // namespace mrc
