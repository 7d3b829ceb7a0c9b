#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrc/brat.hpp"

namespace mrc {

enum class MatchCriterion { Strict, Lenient };

std::string to_string(MatchCriterion c);
MatchCriterion criterion_from_string(const std::string& s);

struct PRF {
  long tp = 0;
  long fp = 0;
  long fn = 0;

  double precision() const;
  double recall() const;
  double f1() const;
  PRF& operator+=(const PRF& other);
  bool operator==(const PRF&) const = default;
};

/// One relation instance with both argument mentions resolved.
struct RelationTriple {
  ConceptMention trigger;
  std::string relation_type;
  ConceptMention attribute;
};

/// Resolve a document's id-referenced relations into triples.
std::vector<RelationTriple> document_triples(const Document& doc);

bool mentions_match(const ConceptMention& a, const ConceptMention& b, MatchCriterion c);

/// Greedy one-to-one matching within one document: exact (category + envelope)
/// pairs first; under the lenient criterion remaining pairs are matched by
/// maximal overlap with symmetric tie-breaks. Unmatched pred -> fp, gold -> fn.
PRF match_concepts(const std::vector<ConceptMention>& gold,
                   const std::vector<ConceptMention>& pred, MatchCriterion c);

/// Same one-to-one scheme over triples: relation types must be equal and both
/// argument mentions must match under the criterion.
PRF match_relations(const std::vector<RelationTriple>& gold,
                    const std::vector<RelationTriple>& pred, MatchCriterion c);

struct EvalReport {
  std::string task;  // "concept" | "relation"
  MatchCriterion criterion = MatchCriterion::Strict;
  std::map<std::string, PRF> per_category;
  PRF micro;
};

/// Pool per-category counts into the micro row.
EvalReport micro_prf(const std::string& task, MatchCriterion c,
                     const std::map<std::string, PRF>& per_category);

/// Score corpora paired by doc_id; a document missing on one side counts as
/// empty on that side.
EvalReport evaluate_concepts(const std::vector<Document>& gold,
                             const std::vector<Document>& pred, MatchCriterion c);
EvalReport evaluate_relations(const std::vector<Document>& gold,
                              const std::vector<Document>& pred, MatchCriterion c);

std::string reports_to_tsv(const std::vector<EvalReport>& reports);
nlohmann::json reports_to_json(const std::vector<EvalReport>& reports);

}  // namespace mrc
