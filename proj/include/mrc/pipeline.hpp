#pragma once

#include <string>
#include <vector>

#include "mrc/brat.hpp"
#include "mrc/metrics.hpp"
#include "mrc/model.hpp"
#include "mrc/schema.hpp"

namespace mrc {

struct PipelineDiagnostics {
  std::string doc_id;
  size_t questions_issued = 0;
  size_t empty_answers = 0;
  size_t truncated_instances = 0;
  size_t cross_sentence_gold = 0;

  nlohmann::json to_json() const;
  PipelineDiagnostics& operator+=(const PipelineDiagnostics& other);
};

/// Predicted mentions for the given categories across one document, ids T1..Tn
/// in (sentence, span, category) order.
std::vector<ConceptMention> predict_concepts(const Document& doc, const Model& model,
                                             const Schema& schema,
                                             const std::vector<std::string>& categories,
                                             Strategy strategy,
                                             PipelineDiagnostics* diag = nullptr);

/// First pass: trigger-category mentions, either predicted or (oracle mode)
/// copied from gold.
std::vector<ConceptMention> extract_triggers(const Document& doc, const Model& model,
                                             const Schema& schema, Strategy strategy,
                                             bool oracle = false,
                                             PipelineDiagnostics* diag = nullptr);

struct PipelineOutput {
  Document pred_doc;  // doc text + predicted concepts + id-linked relations
  std::vector<RelationTriple> triples;
  PipelineDiagnostics diagnostics;
};

/// Two-pass end-to-end extraction: triggers, then one relation question per
/// (trigger, compatible relation type); every decoded answer becomes an
/// attribute mention and a triple. No concept-pair enumeration happens.
PipelineOutput run_end_to_end(const Document& doc, const Model& trigger_model,
                              const Model& relation_model, const Schema& schema,
                              Strategy strategy, bool oracle_triggers = false);

/// Guard: the model must have been trained against this schema and strategy.
void check_model_binding(const Model& model, const Schema& schema, Strategy strategy);

}  // namespace mrc
