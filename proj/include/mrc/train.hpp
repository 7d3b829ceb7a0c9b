#pragma once

#include <string>
#include <vector>

#include "mrc/instance.hpp"
#include "mrc/model.hpp"
#include "mrc/rng.hpp"

namespace mrc {

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 8;
  int max_epochs = 50;
  int patience = 5;
  std::string optimizer = "adam";  // adam | sgd
  double alpha = 1.0;              // overrides for the loss weights
  double beta = 1.0;
  double gamma = 1.0;
  uint64_t seed = 0;
  std::vector<double> grid_learning_rates = {1e-6, 1e-5, 3e-5};
  std::vector<int> grid_batch_sizes = {1, 4, 8};

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
  bool operator==(const TrainConfig&) const = default;
};

struct EpochLog {
  int epoch = 0;
  double l_start = 0.0;
  double l_end = 0.0;
  double l_span = 0.0;
  double l_total = 0.0;
  double val_f1 = 0.0;
};

std::string epoch_log_to_tsv(const std::vector<EpochLog>& log);

struct TrainResult {
  Model model;  // parameters from the best-metric epoch
  std::vector<EpochLog> log;
  int best_epoch = -1;
  double best_metric = 0.0;
};

/// Mini-batch training over encoded copies of the given instances. The
/// tracked metric is exact-span micro F1 over the validation instances
/// (the training instances when `val` is empty), evaluated without dropout.
TrainResult train_model(const std::vector<MrcInstance>& train,
                        const std::vector<MrcInstance>& val, const Schema& schema,
                        Strategy strategy, ModelConfig model_config, const TrainConfig& config);

/// Exact-span micro F1 of decoded answers against gold answers. Instances
/// not yet encoded are encoded against the model's own vocabulary.
double instance_span_f1(const Model& model, const std::vector<MrcInstance>& instances);

/// Seeded shuffle dealt round-robin into k document-level folds.
std::vector<std::vector<std::string>> make_folds(const std::vector<std::string>& doc_ids, int k,
                                                 Rng& rng);

struct GridCell {
  double learning_rate = 0.0;
  int batch_size = 0;
  std::vector<double> fold_f1;  // held-out strict micro F1 per fold
  double mean_f1 = 0.0;
};

struct CrossValResult {
  std::vector<GridCell> cells;
  TrainConfig best;  // winning cell applied on top of the base config
  int runs = 0;
};

std::string grid_to_tsv(const CrossValResult& result);

/// Five-fold cross-validation over the hyperparameter grid: trains one model
/// per (cell, fold) on concept instances from the other folds and scores
/// held-out documents with the strict micro concept scorer. Ties prefer the
/// larger learning rate, then the larger batch size.
CrossValResult cross_validate(const std::vector<Document>& corpus, const Schema& schema,
                              Strategy strategy, ModelConfig model_config,
                              const TrainConfig& base, int k = 5);

}  // namespace mrc
