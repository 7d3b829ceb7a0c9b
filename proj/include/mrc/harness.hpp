#pragma once

#include <string>
#include <vector>

#include "mrc/metrics.hpp"
#include "mrc/model.hpp"
#include "mrc/train.hpp"

namespace mrc {

struct StrategyCell {
  Strategy strategy = Strategy::Natural;
  EvalReport concept_strict, concept_lenient;
  EvalReport relation_strict, relation_lenient;
};

struct StrategyComparison {
  std::vector<StrategyCell> cells;  // natural first, then pseudo
};

/// Trains otherwise-identical concept and relation models per strategy and
/// scores both tasks on the test split: a 2-strategy x 2-task table. Makes no
/// claim about which strategy should win.
StrategyComparison compare_question_strategies(const std::vector<Document>& train_docs,
                                               const std::vector<Document>& test_docs,
                                               const Schema& schema, ModelConfig model_config,
                                               const TrainConfig& train_config);

std::string comparison_to_tsv(const StrategyComparison& comparison);

struct CrossSplitReport {
  EvalReport same, other;
  double f1_same = 0.0;
  double f1_other = 0.0;
  double drop = 0.0;  // f1_same - f1_other
};

/// Train on one corpus, evaluate strict micro concept F1 on both test
/// corpora, and report the absolute drop.
CrossSplitReport cross_split_eval(const std::vector<Document>& train_docs,
                                  const std::vector<Document>& test_same,
                                  const std::vector<Document>& test_other, const Schema& schema,
                                  Strategy strategy, ModelConfig model_config,
                                  const TrainConfig& train_config);

std::string cross_split_to_tsv(const CrossSplitReport& report);

}  // namespace mrc
