#include "mrc/harness.hpp"

#include <sstream>

#include "mrc/errors.hpp"
#include "mrc/instance.hpp"
#include "mrc/pipeline.hpp"

namespace mrc {

namespace {

std::vector<MrcInstance> concept_instances(const std::vector<Document>& docs, const Schema& schema,
                                           Strategy strategy) {
  std::vector<MrcInstance> out;
  for (const auto& doc : docs) {
    auto insts = build_concept_instances(doc, schema, strategy);
    out.insert(out.end(), insts.begin(), insts.end());
  }
  return out;
}

std::vector<MrcInstance> relation_instances(const std::vector<Document>& docs, const Schema& schema,
                                            Strategy strategy) {
  std::vector<MrcInstance> out;
  for (const auto& doc : docs) {
    std::vector<ConceptMention> triggers;
    for (const auto& m : doc.concepts) {
      if (schema.is_trigger(m.category)) triggers.push_back(m);
    }
    auto insts = build_relation_instances(doc, triggers, schema, strategy);
    out.insert(out.end(), insts.begin(), insts.end());
  }
  return out;
}

Model train_task(const std::vector<MrcInstance>& insts, const Schema& schema, Strategy strategy,
                 const ModelConfig& model_config, const TrainConfig& train_config) {
  if (insts.empty()) throw InputError("harness: no training instances");
  auto result = train_model(insts, {}, schema, strategy, model_config, train_config);
  return std::move(result.model);
}

double micro_f1(const EvalReport& report) { return report.micro.f1(); }

void append_cell(std::ostringstream& os, const EvalReport& strict, const EvalReport& lenient) {
  os << '\t' << strict.micro.f1() << '\t' << lenient.micro.f1();
}

}  // namespace

StrategyComparison compare_question_strategies(const std::vector<Document>& train_docs,
                                               const std::vector<Document>& test_docs,
                                               const Schema& schema, ModelConfig model_config,
                                               const TrainConfig& train_config) {
  if (train_docs.empty()) throw InputError("harness: empty training corpus");
  if (test_docs.empty()) throw InputError("harness: empty test corpus");

  StrategyComparison comparison;
  for (Strategy strategy : {Strategy::Natural, Strategy::Pseudo}) {
    Model concept_model =
        train_task(concept_instances(train_docs, schema, strategy), schema, strategy, model_config,
                   train_config);
    Model relation_model =
        train_task(relation_instances(train_docs, schema, strategy), schema, strategy, model_config,
                   train_config);

    std::vector<Document> concept_pred, relation_pred;
    for (const auto& doc : test_docs) {
      Document cp{doc.doc_id, doc.text, {}, {}};
      cp.concepts = predict_concepts(doc, concept_model, schema, schema.concept_categories, strategy);
      concept_pred.push_back(std::move(cp));

      auto output = run_end_to_end(doc, concept_model, relation_model, schema, strategy);
      relation_pred.push_back(std::move(output.pred_doc));
    }

    StrategyCell cell;
    cell.strategy = strategy;
    cell.concept_strict = evaluate_concepts(test_docs, concept_pred, MatchCriterion::Strict);
    cell.concept_lenient = evaluate_concepts(test_docs, concept_pred, MatchCriterion::Lenient);
    cell.relation_strict = evaluate_relations(test_docs, relation_pred, MatchCriterion::Strict);
    cell.relation_lenient = evaluate_relations(test_docs, relation_pred, MatchCriterion::Lenient);
    comparison.cells.push_back(std::move(cell));
  }
  return comparison;
}

std::string comparison_to_tsv(const StrategyComparison& comparison) {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed;
  os << "strategy\tconcept_strict_f1\tconcept_lenient_f1\trelation_strict_f1\t"
        "relation_lenient_f1\n";
  for (const auto& cell : comparison.cells) {
    os << to_string(cell.strategy);
    append_cell(os, cell.concept_strict, cell.concept_lenient);
    append_cell(os, cell.relation_strict, cell.relation_lenient);
    os << '\n';
  }
  return os.str();
}

CrossSplitReport cross_split_eval(const std::vector<Document>& train_docs,
                                  const std::vector<Document>& test_same,
                                  const std::vector<Document>& test_other, const Schema& schema,
                                  Strategy strategy, ModelConfig model_config,
                                  const TrainConfig& train_config) {
  if (train_docs.empty()) throw InputError("harness: empty training corpus");
  if (test_same.empty()) throw InputError("harness: empty same-institution test corpus");
  if (test_other.empty()) throw InputError("harness: empty other-institution test corpus");

  Model model = train_task(concept_instances(train_docs, schema, strategy), schema, strategy,
                           model_config, train_config);

  auto predict_all = [&](const std::vector<Document>& docs) {
    std::vector<Document> pred;
    for (const auto& doc : docs) {
      Document p{doc.doc_id, doc.text, {}, {}};
      p.concepts = predict_concepts(doc, model, schema, schema.concept_categories, strategy);
      pred.push_back(std::move(p));
    }
    return pred;
  };

  CrossSplitReport report;
  report.same = evaluate_concepts(test_same, predict_all(test_same), MatchCriterion::Strict);
  report.other = evaluate_concepts(test_other, predict_all(test_other), MatchCriterion::Strict);
  report.f1_same = micro_f1(report.same);
  report.f1_other = micro_f1(report.other);
  report.drop = report.f1_same - report.f1_other;
  return report;
}

std::string cross_split_to_tsv(const CrossSplitReport& report) {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed;
  os << "f1_same\tf1_other\tdrop\n";
  os << report.f1_same << '\t' << report.f1_other << '\t' << report.drop << '\n';
  return os.str();
}

}  // namespace mrc
