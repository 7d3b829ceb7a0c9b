#include "mrc/metrics.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <tuple>

#include "mrc/errors.hpp"

namespace mrc {

namespace {

struct SpanKey {
  std::string category;
  size_t start;
  size_t end;
  auto operator<=>(const SpanKey&) const = default;
};

SpanKey key_of(const ConceptMention& m) {
  auto env = m.envelope();
  return {m.category, env.start, env.end};
}

/// Exact pass shared by both criteria: within each equivalence class the
/// one-to-one match count is min(#gold, #pred), independent of order.
long exact_pass(std::vector<char>& gold_used, std::vector<char>& pred_used,
                const std::vector<SpanKey>& gold_keys, const std::vector<SpanKey>& pred_keys) {
  std::map<SpanKey, std::vector<size_t>> pred_by_key;
  for (size_t p = 0; p < pred_keys.size(); ++p) pred_by_key[pred_keys[p]].push_back(p);
  long matched = 0;
  for (size_t g = 0; g < gold_keys.size(); ++g) {
    auto it = pred_by_key.find(gold_keys[g]);
    if (it == pred_by_key.end() || it->second.empty()) continue;
    pred_used[it->second.back()] = 1;
    it->second.pop_back();
    gold_used[g] = 1;
    ++matched;
  }
  return matched;
}

/// Candidate pair ordering that is invariant under swapping gold and pred:
/// larger overlap first, then smaller symmetric span keys.
struct OverlapPair {
  size_t overlap;
  size_t min_start, max_start, min_end, max_end;
  size_t g, p;

  bool operator<(const OverlapPair& o) const {
    return std::tie(o.overlap, min_start, max_start, min_end, max_end, g, p) <
           std::tie(overlap, o.min_start, o.max_start, o.min_end, o.max_end, o.g, o.p);
  }
};

}  // namespace

std::string to_string(MatchCriterion c) {
  return c == MatchCriterion::Strict ? "strict" : "lenient";
}

MatchCriterion criterion_from_string(const std::string& s) {
  if (s == "strict") return MatchCriterion::Strict;
  if (s == "lenient") return MatchCriterion::Lenient;
  throw ConfigError("unknown match criterion '" + s + "' (expected strict|lenient)");
}

double PRF::precision() const { return tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp); }
double PRF::recall() const { return tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn); }

double PRF::f1() const {
  double p = precision(), r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

PRF& PRF::operator+=(const PRF& other) {
  tp += other.tp;
  fp += other.fp;
  fn += other.fn;
  return *this;
}

std::vector<RelationTriple> document_triples(const Document& doc) {
  std::vector<RelationTriple> out;
  out.reserve(doc.relations.size());
  for (const auto& rel : doc.relations) {
    const ConceptMention* trig = doc.find_concept(rel.arg1);
    const ConceptMention* attr = doc.find_concept(rel.arg2);
    if (!trig || !attr)
      throw InputError("relation " + rel.id + " in " + doc.doc_id +
                       " references a missing mention");
    out.push_back({*trig, rel.relation_type, *attr});
  }
  return out;
}

bool mentions_match(const ConceptMention& a, const ConceptMention& b, MatchCriterion c) {
  if (a.category != b.category) return false;
  CharSpan ea = a.envelope(), eb = b.envelope();
  if (c == MatchCriterion::Strict) return ea == eb;
  return ea.overlaps(eb);
}

PRF match_concepts(const std::vector<ConceptMention>& gold,
                   const std::vector<ConceptMention>& pred, MatchCriterion c) {
  std::vector<SpanKey> gold_keys, pred_keys;
  gold_keys.reserve(gold.size());
  pred_keys.reserve(pred.size());
  for (const auto& m : gold) gold_keys.push_back(key_of(m));
  for (const auto& m : pred) pred_keys.push_back(key_of(m));

  std::vector<char> gold_used(gold.size(), 0), pred_used(pred.size(), 0);
  long tp = exact_pass(gold_used, pred_used, gold_keys, pred_keys);

  if (c == MatchCriterion::Lenient) {
    std::vector<OverlapPair> pairs;
    for (size_t g = 0; g < gold.size(); ++g) {
      if (gold_used[g]) continue;
      for (size_t p = 0; p < pred.size(); ++p) {
        if (pred_used[p]) continue;
        if (!mentions_match(gold[g], pred[p], MatchCriterion::Lenient)) continue;
        CharSpan eg = gold[g].envelope(), ep = pred[p].envelope();
        pairs.push_back({eg.overlap_length(ep), std::min(eg.start, ep.start),
                         std::max(eg.start, ep.start), std::min(eg.end, ep.end),
                         std::max(eg.end, ep.end), g, p});
      }
    }
    std::sort(pairs.begin(), pairs.end());
    for (const auto& pair : pairs) {
      if (gold_used[pair.g] || pred_used[pair.p]) continue;
      gold_used[pair.g] = 1;
      pred_used[pair.p] = 1;
      ++tp;
    }
  }

  return {tp, static_cast<long>(pred.size()) - tp, static_cast<long>(gold.size()) - tp};
}

namespace {

bool triples_match(const RelationTriple& a, const RelationTriple& b, MatchCriterion c) {
  return a.relation_type == b.relation_type && mentions_match(a.trigger, b.trigger, c) &&
         mentions_match(a.attribute, b.attribute, c);
}

struct TripleKey {
  std::string relation_type;
  SpanKey trigger;
  SpanKey attribute;
  auto operator<=>(const TripleKey&) const = default;
};

TripleKey key_of(const RelationTriple& t) {
  return {t.relation_type, key_of(t.trigger), key_of(t.attribute)};
}

}  // namespace

PRF match_relations(const std::vector<RelationTriple>& gold,
                    const std::vector<RelationTriple>& pred, MatchCriterion c) {
  std::vector<char> gold_used(gold.size(), 0), pred_used(pred.size(), 0);

  std::map<TripleKey, std::vector<size_t>> pred_by_key;
  for (size_t p = 0; p < pred.size(); ++p) pred_by_key[key_of(pred[p])].push_back(p);
  long tp = 0;
  for (size_t g = 0; g < gold.size(); ++g) {
    auto it = pred_by_key.find(key_of(gold[g]));
    if (it == pred_by_key.end() || it->second.empty()) continue;
    pred_used[it->second.back()] = 1;
    it->second.pop_back();
    gold_used[g] = 1;
    ++tp;
  }

  if (c == MatchCriterion::Lenient) {
    std::vector<OverlapPair> pairs;
    for (size_t g = 0; g < gold.size(); ++g) {
      if (gold_used[g]) continue;
      for (size_t p = 0; p < pred.size(); ++p) {
        if (pred_used[p]) continue;
        if (!triples_match(gold[g], pred[p], MatchCriterion::Lenient)) continue;
        CharSpan gt = gold[g].trigger.envelope(), pt = pred[p].trigger.envelope();
        CharSpan ga = gold[g].attribute.envelope(), pa = pred[p].attribute.envelope();
        size_t overlap = gt.overlap_length(pt) + ga.overlap_length(pa);
        pairs.push_back({overlap, std::min(gt.start, pt.start), std::max(gt.start, pt.start),
                         std::min(ga.start, pa.start), std::max(ga.start, pa.start), g, p});
      }
    }
    std::sort(pairs.begin(), pairs.end());
    for (const auto& pair : pairs) {
      if (gold_used[pair.g] || pred_used[pair.p]) continue;
      gold_used[pair.g] = 1;
      pred_used[pair.p] = 1;
      ++tp;
    }
  }

  return {tp, static_cast<long>(pred.size()) - tp, static_cast<long>(gold.size()) - tp};
}

EvalReport micro_prf(const std::string& task, MatchCriterion c,
                     const std::map<std::string, PRF>& per_category) {
  EvalReport report;
  report.task = task;
  report.criterion = c;
  report.per_category = per_category;
  for (const auto& [cat, prf] : per_category) report.micro += prf;
  return report;
}

namespace {

/// Pair documents from two corpora by doc_id; absent side scores as empty.
template <typename Fn>
void for_paired_docs(const std::vector<Document>& gold, const std::vector<Document>& pred,
                     Fn&& fn) {
  static const Document kEmpty;
  std::map<std::string, const Document*> pred_by_id;
  for (const auto& d : pred) pred_by_id[d.doc_id] = &d;
  std::set<std::string> seen;
  for (const auto& g : gold) {
    auto it = pred_by_id.find(g.doc_id);
    fn(g, it == pred_by_id.end() ? kEmpty : *it->second);
    seen.insert(g.doc_id);
  }
  for (const auto& p : pred)
    if (!seen.count(p.doc_id)) fn(kEmpty, p);
}

}  // namespace

EvalReport evaluate_concepts(const std::vector<Document>& gold,
                             const std::vector<Document>& pred, MatchCriterion c) {
  std::map<std::string, PRF> per_category;
  for_paired_docs(gold, pred, [&](const Document& g, const Document& p) {
    std::set<std::string> categories;
    for (const auto& m : g.concepts) categories.insert(m.category);
    for (const auto& m : p.concepts) categories.insert(m.category);
    for (const auto& cat : categories) {
      std::vector<ConceptMention> gm, pm;
      for (const auto& m : g.concepts)
        if (m.category == cat) gm.push_back(m);
      for (const auto& m : p.concepts)
        if (m.category == cat) pm.push_back(m);
      per_category[cat] += match_concepts(gm, pm, c);
    }
  });
  return micro_prf("concept", c, per_category);
}

EvalReport evaluate_relations(const std::vector<Document>& gold,
                              const std::vector<Document>& pred, MatchCriterion c) {
  std::map<std::string, PRF> per_category;
  for_paired_docs(gold, pred, [&](const Document& g, const Document& p) {
    auto gt = document_triples(g);
    auto pt = document_triples(p);
    std::set<std::string> types;
    for (const auto& t : gt) types.insert(t.relation_type);
    for (const auto& t : pt) types.insert(t.relation_type);
    for (const auto& type : types) {
      std::vector<RelationTriple> gm, pm;
      for (const auto& t : gt)
        if (t.relation_type == type) gm.push_back(t);
      for (const auto& t : pt)
        if (t.relation_type == type) pm.push_back(t);
      per_category[type] += match_relations(gm, pm, c);
    }
  });
  return micro_prf("relation", c, per_category);
}

namespace {

void append_row(std::ostringstream& out, const EvalReport& r, const std::string& category,
                const PRF& prf) {
  out << r.task << '\t' << to_string(r.criterion) << '\t' << category << '\t' << prf.tp << '\t'
      << prf.fp << '\t' << prf.fn << '\t' << prf.precision() << '\t' << prf.recall() << '\t'
      << prf.f1() << '\n';
}

}  // namespace

std::string reports_to_tsv(const std::vector<EvalReport>& reports) {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed;
  out << "task\tcriterion\tcategory\ttp\tfp\tfn\tprecision\trecall\tf1\n";
  for (const auto& r : reports) {
    for (const auto& [cat, prf] : r.per_category) append_row(out, r, cat, prf);
    append_row(out, r, "micro", r.micro);
  }
  return out.str();
}

nlohmann::json reports_to_json(const std::vector<EvalReport>& reports) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json rows = nlohmann::json::array();
    auto row = [&](const std::string& cat, const PRF& prf) {
      rows.push_back({{"category", cat},
                      {"tp", prf.tp},
                      {"fp", prf.fp},
                      {"fn", prf.fn},
                      {"precision", prf.precision()},
                      {"recall", prf.recall()},
                      {"f1", prf.f1()}});
    };
    for (const auto& [cat, prf] : r.per_category) row(cat, prf);
    row("micro", r.micro);
    out.push_back({{"task", r.task}, {"criterion", to_string(r.criterion)}, {"rows", rows}});
  }
  return out;
}

}  // namespace mrc
