#pragma once

#include <vector>

#include "mrc/encoder.hpp"
#include "mrc/instance.hpp"
#include "mrc/rng.hpp"
#include "mrc/tensor.hpp"

namespace mrc {

/// Two-stage linear start/end classifiers (d -> d -> 2) plus the start-end
/// match scorer over concatenated hidden rows (2d -> 1).
struct SpanHeadParams {
  Mat w_start;   // d x d
  Vec b_start1;  // d
  Mat v_start;   // d x 2
  Vec b_start2;  // 2
  Mat w_end;
  Vec b_end1;
  Mat v_end;
  Vec b_end2;
  Vec match_w;  // 2d
  double match_b = 0.0;

  std::vector<TensorView> tensor_views();
  size_t param_count() const;
};

SpanHeadParams zero_head(size_t d);
SpanHeadParams init_head(size_t d, Rng& rng);

/// Decode-time and loss-weight knobs.
struct HeadConfig {
  double tau = 0.5;
  int max_span_len = 30;
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;

  void validate() const;
  nlohmann::json to_json() const;
  static HeadConfig from_json(const nlohmann::json& j);
  bool operator==(const HeadConfig&) const = default;
};

struct SpanProbabilities {
  Mat p_start;  // n x 2, rows sum to 1
  Mat p_end;
};

struct CandidateIndices {
  std::vector<int> i_start;
  std::vector<int> i_end;
};

struct ScoredPair {
  int start;
  int end;
  double prob;
};

struct MatchPrediction {
  std::vector<ScoredPair> pairs;
};

/// Intermediates needed by the loss gradient.
struct SpanHeadCache {
  Mat z_start;  // H*W + b, first stage
  Mat z_end;
};

SpanProbabilities predict_start_end(const Mat& h_context, const SpanHeadParams& params,
                                    SpanHeadCache* cache = nullptr);

/// Argmax per row; a 0.5/0.5 tie counts as positive.
CandidateIndices candidate_indices(const SpanProbabilities& probs);

/// Score every (i, j) with i in I_start, j in I_end, i <= j, j - i < max_span_len.
MatchPrediction match_spans(const Mat& h_context, const CandidateIndices& candidates,
                            const SpanHeadParams& params, int max_span_len);

double match_probability(const Mat& h_context, int i, int j, const SpanHeadParams& params);

/// Per start index keep the highest-probability end among pairs with
/// prob >= tau; ties prefer the smaller end. Output sorted by (start, end).
std::vector<TokenSpan> decode_answers(const MatchPrediction& match, double tau);

/// One labeled pair for the match loss.
struct TrainingPair {
  int start;
  int end;
  int label;
};

/// Gold starts x gold ends (i <= j, length bound) labeled by membership in
/// y_match, plus up to an equal number of sampled negatives drawn from
/// predicted-but-not-gold candidate pairs.
std::vector<TrainingPair> build_training_pairs(const GoldSpanLabels& gold,
                                               const CandidateIndices& candidates,
                                               int max_span_len, Rng& rng);

struct LossReport {
  double l_start = 0.0;
  double l_end = 0.0;
  double l_span = 0.0;
  double l_total = 0.0;
};

/// Forward-only loss evaluation over a fixed pair set.
LossReport compute_loss(const SpanProbabilities& probs, const Mat& h_context,
                        const SpanHeadParams& params, const GoldSpanLabels& gold,
                        const std::vector<TrainingPair>& pairs, const HeadConfig& config);

/// Loss plus exact gradients: head gradients accumulate into `grads`, and the
/// gradient w.r.t. the context hidden rows is returned through d_h_context.
LossReport compute_loss_and_grad(const Mat& h_context, const SpanHeadParams& params,
                                 const GoldSpanLabels& gold,
                                 const std::vector<TrainingPair>& pairs,
                                 const HeadConfig& config, SpanHeadParams& grads,
                                 Mat& d_h_context);

}  // namespace mrc
