#include "mrc/instance.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mrc/errors.hpp"

namespace mrc {

std::optional<TokenSpan> align_char_spans_to_tokens(const ConceptMention& mention,
                                                    const Sentence& sentence,
                                                    const std::vector<Token>& tokens) {
  CharSpan env = mention.envelope();
  if (env.start >= env.end) return std::nullopt;
  if (env.start < sentence.span.start || env.end > sentence.span.end) return std::nullopt;
  CharSpan local{env.start - sentence.span.start, env.end - sentence.span.start};
  int first = -1, last = -1;
  for (size_t t = 0; t < tokens.size(); ++t) {
    if (tokens[t].span.overlaps(local)) {
      if (first < 0) first = static_cast<int>(t);
      last = static_cast<int>(t);
    }
  }
  if (first < 0) return std::nullopt;
  return TokenSpan{first, last};
}

namespace {

struct SentenceIndex {
  std::vector<Sentence> sentences;
  std::vector<std::vector<Token>> tokens;

  explicit SentenceIndex(const Document& doc) : sentences(split_sentences(doc)) {
    tokens.reserve(sentences.size());
    for (const auto& s : sentences) tokens.push_back(tokenize_with_offsets(s.text));
  }

  // Sentence whose span contains the mention envelope, or -1.
  int locate(const ConceptMention& m) const {
    CharSpan env = m.envelope();
    for (size_t i = 0; i < sentences.size(); ++i)
      if (sentences[i].span.contains(env)) return static_cast<int>(i);
    return -1;
  }
};

void sort_answers(std::vector<TokenSpan>& spans) {
  std::sort(spans.begin(), spans.end());
  spans.erase(std::unique(spans.begin(), spans.end()), spans.end());
}

}  // namespace

std::vector<MrcInstance> build_concept_instances(const Document& doc, const Schema& schema,
                                                 Strategy strategy, BuildStats* stats) {
  SentenceIndex index(doc);
  std::vector<MrcInstance> out;
  out.reserve(index.sentences.size() * schema.concept_categories.size());
  for (size_t si = 0; si < index.sentences.size(); ++si) {
    const Sentence& sent = index.sentences[si];
    for (const auto& cat : schema.concept_categories) {
      MrcInstance inst;
      inst.doc_id = doc.doc_id;
      inst.sentence_span = sent.span;
      inst.context_text = sent.text;
      inst.question = render_concept_question(cat, schema, strategy);
      inst.context_tokens = index.tokens[si];
      for (const auto& m : doc.concepts) {
        if (m.category != cat) continue;
        if (index.locate(m) != static_cast<int>(si)) continue;
        auto span = align_char_spans_to_tokens(m, sent, inst.context_tokens);
        if (!span) {
          if (stats) stats->unalignable_mentions++;
          continue;
        }
        inst.answer_spans.push_back(*span);
      }
      sort_answers(inst.answer_spans);
      out.push_back(std::move(inst));
    }
  }
  return out;
}

std::vector<MrcInstance> build_relation_instances(const Document& doc,
                                                  const std::vector<ConceptMention>& triggers,
                                                  const Schema& schema, Strategy strategy,
                                                  BuildStats* stats) {
  SentenceIndex index(doc);
  std::vector<MrcInstance> out;
  for (const auto& trigger : triggers) {
    auto rels = schema.relations_for_trigger(trigger.category);
    if (rels.empty()) {
      if (stats) stats->triggers_without_relations++;
      continue;
    }
    int si = index.locate(trigger);
    if (si < 0) {
      if (stats) stats->unalignable_mentions++;
      continue;
    }
    const Sentence& sent = index.sentences[static_cast<size_t>(si)];

    // Gold relations attach by mention id; a predicted trigger matches a gold
    // mention only if category and fragments coincide.
    const ConceptMention* gold_trigger = nullptr;
    for (const auto& m : doc.concepts)
      if (m.category == trigger.category && m.fragments == trigger.fragments) {
        gold_trigger = &m;
        break;
      }

    for (const RelationType* rel : rels) {
      MrcInstance inst;
      inst.doc_id = doc.doc_id;
      inst.sentence_span = sent.span;
      inst.context_text = sent.text;
      inst.question = render_relation_question(rel->name, trigger, schema, strategy);
      inst.context_tokens = index.tokens[static_cast<size_t>(si)];
      if (gold_trigger != nullptr) {
        for (const auto& r : doc.relations) {
          if (r.relation_type != rel->name || r.arg1 != gold_trigger->id) continue;
          const ConceptMention* attr = doc.find_concept(r.arg2);
          if (attr == nullptr) continue;
          if (index.locate(*attr) != si) {
            if (stats) stats->cross_sentence_relations++;
            continue;
          }
          auto span = align_char_spans_to_tokens(*attr, sent, inst.context_tokens);
          if (!span) {
            if (stats) stats->unalignable_mentions++;
            continue;
          }
          inst.answer_spans.push_back(*span);
        }
      }
      sort_answers(inst.answer_spans);
      out.push_back(std::move(inst));
    }
  }
  return out;
}

GoldSpanLabels make_gold_labels(const MrcInstance& inst, size_t n) {
  GoldSpanLabels labels;
  labels.y_start.assign(n, 0);
  labels.y_end.assign(n, 0);
  for (const auto& [s, e] : inst.answer_spans) {
    if (s < 0 || e < s || static_cast<size_t>(e) >= n) continue;
    labels.y_start[static_cast<size_t>(s)] = 1;
    labels.y_end[static_cast<size_t>(e)] = 1;
    labels.y_match.push_back({s, e});
  }
  return labels;
}

size_t encode_instance(MrcInstance& inst, const Vocabulary& vocab, size_t max_seq_len,
                       BuildStats* stats) {
  auto question_tokens = tokenize_with_offsets(inst.question.text);
  // [CLS] + question + [SEP] + [SEP]: the fixed overhead around the context.
  size_t overhead = question_tokens.size() + 3;
  if (overhead >= max_seq_len + 1)
    throw InputError("question of " + std::to_string(question_tokens.size()) +
                     " tokens cannot fit max_seq_len " + std::to_string(max_seq_len));
  size_t room = max_seq_len - overhead;
  size_t kept = std::min(room, inst.context_tokens.size());

  inst.input_ids.clear();
  inst.segment_ids.clear();
  inst.input_ids.push_back(Vocabulary::kCls);
  inst.segment_ids.push_back(0);
  for (const auto& t : question_tokens) {
    inst.input_ids.push_back(vocab.id(t.text));
    inst.segment_ids.push_back(0);
  }
  inst.input_ids.push_back(Vocabulary::kSep);
  inst.segment_ids.push_back(0);
  inst.context_row_begin = static_cast<int>(inst.input_ids.size());
  inst.context_rows = static_cast<int>(kept);
  for (size_t i = 0; i < kept; ++i) {
    inst.input_ids.push_back(vocab.id(inst.context_tokens[i].text));
    inst.segment_ids.push_back(1);
  }
  inst.input_ids.push_back(Vocabulary::kSep);
  inst.segment_ids.push_back(1);

  size_t lost = 0;
  for (const auto& [s, e] : inst.answer_spans)
    if (static_cast<size_t>(e) >= kept) ++lost;
  if (stats != nullptr && kept < inst.context_tokens.size()) {
    stats->truncated_instances++;
    stats->lost_answers += lost;
  }
  return lost;
}

Vocabulary build_vocabulary(const std::vector<MrcInstance>& instances) {
  Vocabulary v;
  for (const auto& inst : instances) {
    for (const auto& t : tokenize_with_offsets(inst.question.text)) v.add(t.text);
    for (const auto& t : inst.context_tokens) v.add(t.text);
  }
  return v;
}

bool detect_bio_conflict(const Document& doc) {
  SentenceIndex index(doc);
  for (size_t si = 0; si < index.sentences.size(); ++si) {
    std::vector<int> claims(index.tokens[si].size(), 0);
    for (const auto& m : doc.concepts) {
      if (index.locate(m) != static_cast<int>(si)) continue;
      auto span = align_char_spans_to_tokens(m, index.sentences[si], index.tokens[si]);
      if (!span) continue;
      for (int t = span->first; t <= span->second; ++t) {
        if (++claims[static_cast<size_t>(t)] > 1) return true;
      }
    }
  }
  return false;
}

namespace {

nlohmann::json instance_to_json(const MrcInstance& inst) {
  nlohmann::json j;
  j["doc_id"] = inst.doc_id;
  j["sentence"] = {{"start", inst.sentence_span.start}, {"end", inst.sentence_span.end}};
  j["context"] = inst.context_text;
  nlohmann::json q;
  q["text"] = inst.question.text;
  q["target"] = inst.question.target_category;
  q["strategy"] = to_string(inst.question.strategy);
  if (inst.question.is_relation()) {
    q["relation"] = inst.question.relation;
    q["trigger_text"] = inst.question.trigger_text;
  }
  j["question"] = q;
  j["answers"] = nlohmann::json::array();
  for (const auto& [s, e] : inst.answer_spans) j["answers"].push_back({s, e});
  return j;
}

MrcInstance instance_from_json(const nlohmann::json& j, int line_no) {
  try {
    MrcInstance inst;
    inst.doc_id = j.at("doc_id").get<std::string>();
    inst.sentence_span = {j.at("sentence").at("start").get<size_t>(),
                          j.at("sentence").at("end").get<size_t>()};
    inst.context_text = j.at("context").get<std::string>();
    const auto& q = j.at("question");
    inst.question.text = q.at("text").get<std::string>();
    inst.question.target_category = q.at("target").get<std::string>();
    inst.question.strategy = strategy_from_string(q.at("strategy").get<std::string>());
    if (q.contains("relation")) {
      inst.question.relation = q.at("relation").get<std::string>();
      inst.question.trigger_text = q.value("trigger_text", "");
    }
    inst.context_tokens = tokenize_with_offsets(inst.context_text);
    for (const auto& a : j.at("answers")) {
      if (!a.is_array() || a.size() != 2)
        throw ParseError("answer must be a [start, end] pair", line_no);
      TokenSpan span{a[0].get<int>(), a[1].get<int>()};
      if (span.first < 0 || span.second < span.first ||
          static_cast<size_t>(span.second) >= inst.context_tokens.size())
        throw ParseError("answer token span out of range", line_no);
      inst.answer_spans.push_back(span);
    }
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad instance record: ") + e.what(), line_no);
  }
}

}  // namespace

void write_instances_jsonl(const std::vector<MrcInstance>& instances, std::ostream& out) {
  for (const auto& inst : instances) out << instance_to_json(inst).dump() << '\n';
}

void write_instances_jsonl(const std::vector<MrcInstance>& instances, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write instances file: " + path);
  write_instances_jsonl(instances, out);
}

std::vector<MrcInstance> read_instances_jsonl(std::istream& in) {
  std::vector<MrcInstance> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    out.push_back(instance_from_json(j, line_no));
  }
  return out;
}

std::vector<MrcInstance> read_instances_jsonl_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read instances file: " + path);
  return read_instances_jsonl(in);
}

}  // namespace mrc
