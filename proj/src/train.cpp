#include "mrc/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "mrc/errors.hpp"
#include "mrc/metrics.hpp"
#include "mrc/pipeline.hpp"

namespace mrc {

void TrainConfig::validate() const {
  if (learning_rate < 0.0) throw ConfigError("learning rate must be >= 0");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (max_epochs < 1) throw ConfigError("max epochs must be >= 1");
  if (patience < 0) throw ConfigError("patience must be >= 0");
  if (optimizer != "adam" && optimizer != "sgd")
    throw ConfigError("unknown optimizer '" + optimizer + "' (expected adam|sgd)");
  if (alpha < 0.0 || beta < 0.0 || gamma < 0.0)
    throw ConfigError("loss weights must be >= 0");
  if (grid_learning_rates.empty() || grid_batch_sizes.empty())
    throw ConfigError("hyperparameter grid must be non-empty");
  for (double lr : grid_learning_rates)
    if (lr < 0.0) throw ConfigError("grid learning rates must be >= 0");
  for (int bs : grid_batch_sizes)
    if (bs < 1) throw ConfigError("grid batch sizes must be >= 1");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"learning_rate", learning_rate},
          {"batch_size", batch_size},
          {"max_epochs", max_epochs},
          {"patience", patience},
          {"optimizer", optimizer},
          {"alpha", alpha},
          {"beta", beta},
          {"gamma", gamma},
          {"seed", seed},
          {"grid_learning_rates", grid_learning_rates},
          {"grid_batch_sizes", grid_batch_sizes}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig cfg;
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.max_epochs = j.value("max_epochs", cfg.max_epochs);
  cfg.patience = j.value("patience", cfg.patience);
  cfg.optimizer = j.value("optimizer", cfg.optimizer);
  cfg.alpha = j.value("alpha", cfg.alpha);
  cfg.beta = j.value("beta", cfg.beta);
  cfg.gamma = j.value("gamma", cfg.gamma);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.grid_learning_rates = j.value("grid_learning_rates", cfg.grid_learning_rates);
  cfg.grid_batch_sizes = j.value("grid_batch_sizes", cfg.grid_batch_sizes);
  return cfg;
}

std::string epoch_log_to_tsv(const std::vector<EpochLog>& log) {
  std::ostringstream out;
  out.precision(8);
  out << "epoch\tl_start\tl_end\tl_span\tl_total\tval_f1\n";
  for (const auto& e : log)
    out << e.epoch << '\t' << e.l_start << '\t' << e.l_end << '\t' << e.l_span << '\t'
        << e.l_total << '\t' << e.val_f1 << '\n';
  return out.str();
}

namespace {

/// Adam first/second moments shaped like the model parameters.
struct Optimizer {
  bool adam;
  double lr;
  long t = 0;
  EncoderParams m_enc, v_enc;
  SpanHeadParams m_head, v_head;

  Optimizer(const ModelConfig& mc, const TrainConfig& tc)
      : adam(tc.optimizer == "adam"),
        lr(tc.learning_rate),
        m_enc(zero_params(mc.encoder)),
        v_enc(zero_params(mc.encoder)),
        m_head(zero_head(mc.encoder.d)),
        v_head(zero_head(mc.encoder.d)) {}

  void step(Model& model, EncoderParams& enc_grads, SpanHeadParams& head_grads) {
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    ++t;
    auto update = [&](std::vector<TensorView> params, std::vector<TensorView> grads,
                      std::vector<TensorView> m, std::vector<TensorView> v) {
      for (size_t i = 0; i < params.size(); ++i) {
        for (size_t k = 0; k < params[i].len; ++k) {
          double g = grads[i].data[k];
          if (!adam) {
            params[i].data[k] -= lr * g;
            continue;
          }
          double& mk = m[i].data[k];
          double& vk = v[i].data[k];
          mk = kBeta1 * mk + (1.0 - kBeta1) * g;
          vk = kBeta2 * vk + (1.0 - kBeta2) * g * g;
          double mhat = mk / (1.0 - std::pow(kBeta1, static_cast<double>(t)));
          double vhat = vk / (1.0 - std::pow(kBeta2, static_cast<double>(t)));
          params[i].data[k] -= lr * mhat / (std::sqrt(vhat) + kEps);
        }
      }
    };
    update(model.params.tensor_views(), enc_grads.tensor_views(), m_enc.tensor_views(),
           v_enc.tensor_views());
    update(model.head.tensor_views(), head_grads.tensor_views(), m_head.tensor_views(),
           v_head.tensor_views());
  }
};

void scale_grads(EncoderParams& enc, SpanHeadParams& head, double factor) {
  for (auto& v : enc.tensor_views())
    for (size_t i = 0; i < v.len; ++i) v.data[i] *= factor;
  for (auto& v : head.tensor_views())
    for (size_t i = 0; i < v.len; ++i) v.data[i] *= factor;
}

void zero_grads(EncoderParams& enc, SpanHeadParams& head) {
  for (auto& v : enc.tensor_views()) std::fill(v.data, v.data + v.len, 0.0);
  for (auto& v : head.tensor_views()) std::fill(v.data, v.data + v.len, 0.0);
}

}  // namespace

double instance_span_f1(const Model& model, const std::vector<MrcInstance>& instances) {
  PRF prf;
  for (const auto& raw : instances) {
    MrcInstance local;
    const MrcInstance* chosen = &raw;
    if (!raw.encoded()) {
      local = raw;
      encode_instance(local, model.vocab, model.config.encoder.max_seq_len);
      chosen = &local;
    }
    const MrcInstance& inst = *chosen;
    std::multiset<TokenSpan> gold(inst.answer_spans.begin(), inst.answer_spans.end());
    if (inst.context_rows > 0) {
      for (const auto& s : predict_spans(model, inst)) {
        auto it = gold.find(s);
        if (it != gold.end()) {
          gold.erase(it);
          ++prf.tp;
        } else {
          ++prf.fp;
        }
      }
    }
    prf.fn += static_cast<long>(gold.size());
  }
  return prf.f1();
}

TrainResult train_model(const std::vector<MrcInstance>& train_in,
                        const std::vector<MrcInstance>& val_in, const Schema& schema,
                        Strategy strategy, ModelConfig model_config, const TrainConfig& config) {
  config.validate();
  if (train_in.empty()) throw InputError("no training instances");

  std::vector<MrcInstance> train = train_in;
  std::vector<MrcInstance> val = val_in;

  Vocabulary vocab = build_vocabulary(train);
  model_config.encoder.vocab_size = vocab.size();
  model_config.head.alpha = config.alpha;
  model_config.head.beta = config.beta;
  model_config.head.gamma = config.gamma;
  model_config.validate();

  for (auto& inst : train) encode_instance(inst, vocab, model_config.encoder.max_seq_len);
  for (auto& inst : val) encode_instance(inst, vocab, model_config.encoder.max_seq_len);

  Rng rng(config.seed);
  Model model;
  model.config = model_config;
  model.vocab = std::move(vocab);
  model.schema_name = schema.name;
  model.schema_fingerprint = schema.fingerprint();
  model.strategy = strategy;
  model.params = init_params(model_config.encoder, rng);
  model.head = init_head(model_config.encoder.d, rng);

  const std::vector<MrcInstance>& val_set = val.empty() ? train : val;
  const size_t d = model_config.encoder.d;

  Optimizer opt(model_config, config);
  EncoderParams enc_grads = zero_params(model_config.encoder);
  SpanHeadParams head_grads = zero_head(d);

  TrainResult result;
  EncoderParams best_params = model.params;
  SpanHeadParams best_head = model.head;
  double best_metric = -1.0;
  int best_epoch = -1;
  int epochs_since_improvement = 0;

  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), size_t{0});

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    rng.shuffle(order);
    EpochLog entry;
    entry.epoch = epoch;
    size_t counted = 0;

    for (size_t begin = 0; begin < order.size(); begin += static_cast<size_t>(config.batch_size)) {
      size_t end = std::min(order.size(), begin + static_cast<size_t>(config.batch_size));
      zero_grads(enc_grads, head_grads);
      size_t processed = 0;

      for (size_t bi = begin; bi < end; ++bi) {
        MrcInstance& inst = train[order[bi]];
        if (inst.context_rows == 0) continue;

        EncoderCache cache;
        bool use_dropout = model_config.encoder.dropout_rate > 0.0;
        Mat h = encoder_forward(model.params, inst.input_ids, inst.segment_ids, use_dropout,
                                use_dropout ? &rng : nullptr, &cache);
        size_t n = static_cast<size_t>(inst.context_rows);
        Mat ctx(n, d);
        for (size_t i = 0; i < n; ++i) {
          const double* src = h.row(static_cast<size_t>(inst.context_row_begin) + i);
          std::copy(src, src + d, ctx.row(i));
        }

        auto gold = make_gold_labels(inst, n);
        auto probs = predict_start_end(ctx, model.head);
        auto pairs = build_training_pairs(gold, candidate_indices(probs),
                                          model_config.head.max_span_len, rng);

        Mat d_ctx(n, d);
        auto report =
            compute_loss_and_grad(ctx, model.head, gold, pairs, model_config.head, head_grads, d_ctx);
        if (!std::isfinite(report.l_total))
          throw TrainError("non-finite loss at epoch " + std::to_string(epoch) +
                           " (instance " + std::to_string(order[bi]) + "); training diverged");

        entry.l_start += report.l_start;
        entry.l_end += report.l_end;
        entry.l_span += report.l_span;
        entry.l_total += report.l_total;
        ++counted;

        Mat d_h(h.rows, h.cols);
        for (size_t i = 0; i < n; ++i) {
          const double* src = d_ctx.row(i);
          std::copy(src, src + d, d_h.row(static_cast<size_t>(inst.context_row_begin) + i));
        }
        encoder_backward(model.params, cache, d_h, enc_grads);
        ++processed;
      }

      if (processed == 0) continue;
      scale_grads(enc_grads, head_grads, 1.0 / static_cast<double>(processed));
      opt.step(model, enc_grads, head_grads);
    }

    if (counted > 0) {
      entry.l_start /= static_cast<double>(counted);
      entry.l_end /= static_cast<double>(counted);
      entry.l_span /= static_cast<double>(counted);
      entry.l_total /= static_cast<double>(counted);
    }
    entry.val_f1 = instance_span_f1(model, val_set);
    result.log.push_back(entry);

    if (entry.val_f1 > best_metric) {
      best_metric = entry.val_f1;
      best_epoch = epoch;
      best_params = model.params;
      best_head = model.head;
      epochs_since_improvement = 0;
    } else {
      ++epochs_since_improvement;
      if (epochs_since_improvement > config.patience) break;
    }
  }

  model.params = std::move(best_params);
  model.head = std::move(best_head);
  model.metadata = {{"best_epoch", best_epoch},
                    {"best_metric", best_metric},
                    {"epochs_run", result.log.size()},
                    {"train_instances", train.size()},
                    {"train_config", config.to_json()}};
  result.model = std::move(model);
  result.best_epoch = best_epoch;
  result.best_metric = best_metric;
  return result;
}

std::vector<std::vector<std::string>> make_folds(const std::vector<std::string>& doc_ids, int k,
                                                 Rng& rng) {
  if (k < 2) throw ConfigError("fold count must be >= 2");
  if (static_cast<int>(doc_ids.size()) < k)
    throw ConfigError("cross-validation needs at least " + std::to_string(k) + " documents, got " +
                      std::to_string(doc_ids.size()));
  std::vector<std::string> ids = doc_ids;
  rng.shuffle(ids);
  std::vector<std::vector<std::string>> folds(static_cast<size_t>(k));
  for (size_t i = 0; i < ids.size(); ++i) folds[i % static_cast<size_t>(k)].push_back(ids[i]);
  return folds;
}

std::string grid_to_tsv(const CrossValResult& result) {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed;
  size_t k = result.cells.empty() ? 0 : result.cells[0].fold_f1.size();
  out << "learning_rate\tbatch_size";
  for (size_t f = 0; f < k; ++f) out << "\tfold" << f;
  out << "\tmean_f1\n";
  for (const auto& cell : result.cells) {
    out << cell.learning_rate << '\t' << cell.batch_size;
    for (double f1 : cell.fold_f1) out << '\t' << f1;
    out << '\t' << cell.mean_f1 << '\n';
  }
  return out.str();
}

CrossValResult cross_validate(const std::vector<Document>& corpus, const Schema& schema,
                              Strategy strategy, ModelConfig model_config,
                              const TrainConfig& base, int k) {
  base.validate();
  if (static_cast<int>(corpus.size()) < k)
    throw ConfigError("cross-validation needs at least " + std::to_string(k) +
                      " documents, got " + std::to_string(corpus.size()));

  std::vector<std::string> ids;
  ids.reserve(corpus.size());
  for (const auto& d : corpus) ids.push_back(d.doc_id);

  Rng fold_rng(base.seed);
  auto folds = make_folds(ids, k, fold_rng);

  std::set<std::string> coverage;
  for (const auto& fold : folds)
    for (const auto& id : fold)
      if (!coverage.insert(id).second)
        throw Error("document '" + id + "' assigned to two folds");
  if (coverage.size() != corpus.size()) throw Error("fold assignment dropped a document");

  std::map<std::string, const Document*> by_id;
  for (const auto& d : corpus) by_id[d.doc_id] = &d;

  // one seed per fold, shared across grid cells, so cells form a paired
  // comparison and identical training dynamics earn identical scores
  Rng seed_source(base.seed);
  std::vector<uint64_t> fold_seeds;
  for (int f = 0; f < k; ++f) fold_seeds.push_back(seed_source.fork(static_cast<uint64_t>(f)).next_u64());
  CrossValResult result;

  for (double lr : base.grid_learning_rates) {
    for (int bs : base.grid_batch_sizes) {
      GridCell cell;
      cell.learning_rate = lr;
      cell.batch_size = bs;

      for (int f = 0; f < k; ++f) {
        std::vector<Document> held, rest;
        std::set<std::string> held_ids(folds[static_cast<size_t>(f)].begin(),
                                       folds[static_cast<size_t>(f)].end());
        for (const auto& d : corpus)
          (held_ids.count(d.doc_id) ? held : rest).push_back(d);

        std::vector<MrcInstance> train_insts, held_insts;
        for (const auto& d : rest) {
          auto insts = build_concept_instances(d, schema, strategy);
          train_insts.insert(train_insts.end(), insts.begin(), insts.end());
        }
        for (const auto& d : held) {
          auto insts = build_concept_instances(d, schema, strategy);
          held_insts.insert(held_insts.end(), insts.begin(), insts.end());
        }

        TrainConfig tc = base;
        tc.learning_rate = lr;
        tc.batch_size = bs;
        tc.seed = fold_seeds[static_cast<size_t>(f)];

        auto trained = train_model(train_insts, held_insts, schema, strategy, model_config, tc);

        std::vector<Document> preds;
        for (const auto& d : held) {
          Document pd;
          pd.doc_id = d.doc_id;
          pd.text = d.text;
          pd.concepts =
              predict_concepts(d, trained.model, schema, schema.concept_categories, strategy);
          preds.push_back(std::move(pd));
        }
        cell.fold_f1.push_back(
            evaluate_concepts(held, preds, MatchCriterion::Strict).micro.f1());
      }

      cell.mean_f1 = std::accumulate(cell.fold_f1.begin(), cell.fold_f1.end(), 0.0) /
                     static_cast<double>(cell.fold_f1.size());
      result.cells.push_back(std::move(cell));
      result.runs += k;
    }
  }

  const GridCell* best = nullptr;
  for (const auto& cell : result.cells) {
    if (best == nullptr ||
        std::tie(cell.mean_f1, cell.learning_rate, cell.batch_size) >
            std::tie(best->mean_f1, best->learning_rate, best->batch_size))
      best = &cell;
  }
  result.best = base;
  result.best.learning_rate = best->learning_rate;
  result.best.batch_size = best->batch_size;
  return result;
}

}  // namespace mrc
