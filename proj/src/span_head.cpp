#include "mrc/span_head.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "mrc/errors.hpp"
#include "mrc/kernels.hpp"

namespace mrc {

using kernels::add_row_bias;
using kernels::matmul;
using kernels::matmul_a_bt;
using kernels::matmul_at_b;
using kernels::softmax_rows;

namespace {

constexpr double kProbFloor = 1e-12;

double clamped_log(double p) { return std::log(std::max(p, kProbFloor)); }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Vec col_sums(const Mat& m) {
  Vec out(m.cols, 0.0);
  for (size_t i = 0; i < m.rows; ++i)
    for (size_t j = 0; j < m.cols; ++j) out[j] += m(i, j);
  return out;
}

void add_into(Vec& dst, const Vec& src) {
  for (size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void add_into(Mat& dst, const Mat& src) {
  for (size_t i = 0; i < dst.size(); ++i) dst.data[i] += src.data[i];
}

}  // namespace

std::vector<TensorView> SpanHeadParams::tensor_views() {
  std::vector<TensorView> views;
  auto mat = [&](const std::string& name, Mat& m) {
    views.push_back({name, m.data.data(), m.size(), {m.rows, m.cols}});
  };
  auto vec = [&](const std::string& name, Vec& v) {
    views.push_back({name, v.data(), v.size(), {v.size()}});
  };
  mat("head.w_start", w_start);
  vec("head.b_start1", b_start1);
  mat("head.v_start", v_start);
  vec("head.b_start2", b_start2);
  mat("head.w_end", w_end);
  vec("head.b_end1", b_end1);
  mat("head.v_end", v_end);
  vec("head.b_end2", b_end2);
  vec("head.match_w", match_w);
  views.push_back({"head.match_b", &match_b, 1, {1}});
  return views;
}

size_t SpanHeadParams::param_count() const {
  size_t n = 0;
  for (auto& v : const_cast<SpanHeadParams*>(this)->tensor_views()) n += v.len;
  return n;
}

SpanHeadParams zero_head(size_t d) {
  SpanHeadParams p;
  p.w_start = Mat(d, d);
  p.b_start1.assign(d, 0.0);
  p.v_start = Mat(d, 2);
  p.b_start2.assign(2, 0.0);
  p.w_end = Mat(d, d);
  p.b_end1.assign(d, 0.0);
  p.v_end = Mat(d, 2);
  p.b_end2.assign(2, 0.0);
  p.match_w.assign(2 * d, 0.0);
  p.match_b = 0.0;
  return p;
}

SpanHeadParams init_head(size_t d, Rng& rng) {
  SpanHeadParams p = zero_head(d);
  for (auto& view : p.tensor_views())
    for (size_t i = 0; i < view.len; ++i) view.data[i] = rng.normal(0.0, 0.02);
  return p;
}

void HeadConfig::validate() const {
  if (tau <= 0.0 || tau >= 1.0) throw ConfigError("decode threshold must lie in (0, 1)");
  if (max_span_len < 1) throw ConfigError("max_span_len must be >= 1");
  auto in01 = [](double w) { return w >= 0.0 && w <= 1.0; };
  if (!in01(alpha) || !in01(beta) || !in01(gamma))
    throw ConfigError("loss weights must lie in [0, 1]");
  if (alpha == 0.0 && beta == 0.0 && gamma == 0.0)
    throw ConfigError("at least one loss weight must be positive");
}

nlohmann::json HeadConfig::to_json() const {
  return {{"tau", tau},     {"max_span_len", max_span_len}, {"alpha", alpha},
          {"beta", beta},   {"gamma", gamma}};
}

HeadConfig HeadConfig::from_json(const nlohmann::json& j) {
  HeadConfig c;
  c.tau = j.value("tau", c.tau);
  c.max_span_len = j.value("max_span_len", c.max_span_len);
  c.alpha = j.value("alpha", c.alpha);
  c.beta = j.value("beta", c.beta);
  c.gamma = j.value("gamma", c.gamma);
  return c;
}

SpanProbabilities predict_start_end(const Mat& h_context, const SpanHeadParams& params,
                                    SpanHeadCache* cache) {
  if (h_context.cols != params.w_start.rows)
    throw Error("hidden size does not match span-head parameters");
  SpanProbabilities out;
  SpanHeadCache local;
  SpanHeadCache& c = cache ? *cache : local;

  matmul(h_context, params.w_start, c.z_start);
  add_row_bias(c.z_start, params.b_start1);
  matmul(c.z_start, params.v_start, out.p_start);
  add_row_bias(out.p_start, params.b_start2);
  softmax_rows(out.p_start);

  matmul(h_context, params.w_end, c.z_end);
  add_row_bias(c.z_end, params.b_end1);
  matmul(c.z_end, params.v_end, out.p_end);
  add_row_bias(out.p_end, params.b_end2);
  softmax_rows(out.p_end);
  return out;
}

CandidateIndices candidate_indices(const SpanProbabilities& probs) {
  CandidateIndices out;
  for (size_t i = 0; i < probs.p_start.rows; ++i)
    if (probs.p_start(i, 1) >= probs.p_start(i, 0)) out.i_start.push_back(static_cast<int>(i));
  for (size_t i = 0; i < probs.p_end.rows; ++i)
    if (probs.p_end(i, 1) >= probs.p_end(i, 0)) out.i_end.push_back(static_cast<int>(i));
  return out;
}

double match_probability(const Mat& h_context, int i, int j, const SpanHeadParams& params) {
  size_t d = h_context.cols;
  const double* hi = h_context.row(static_cast<size_t>(i));
  const double* hj = h_context.row(static_cast<size_t>(j));
  double s = params.match_b;
  for (size_t k = 0; k < d; ++k) s += params.match_w[k] * hi[k];
  for (size_t k = 0; k < d; ++k) s += params.match_w[d + k] * hj[k];
  return sigmoid(s);
}

MatchPrediction match_spans(const Mat& h_context, const CandidateIndices& candidates,
                            const SpanHeadParams& params, int max_span_len) {
  MatchPrediction out;
  for (int i : candidates.i_start)
    for (int j : candidates.i_end) {
      if (j < i || j - i >= max_span_len) continue;
      out.pairs.push_back({i, j, match_probability(h_context, i, j, params)});
    }
  return out;
}

std::vector<TokenSpan> decode_answers(const MatchPrediction& match, double tau) {
  std::map<int, ScoredPair> best;
  for (const auto& p : match.pairs) {
    if (p.prob < tau) continue;
    auto it = best.find(p.start);
    if (it == best.end() || p.prob > it->second.prob ||
        (p.prob == it->second.prob && p.end < it->second.end))
      best[p.start] = p;
  }
  std::vector<TokenSpan> out;
  out.reserve(best.size());
  for (const auto& [start, pair] : best) out.push_back({start, pair.end});
  return out;
}

std::vector<TrainingPair> build_training_pairs(const GoldSpanLabels& gold,
                                               const CandidateIndices& candidates,
                                               int max_span_len, Rng& rng) {
  std::set<TokenSpan> match_set(gold.y_match.begin(), gold.y_match.end());
  std::vector<int> gold_starts, gold_ends;
  for (size_t i = 0; i < gold.y_start.size(); ++i)
    if (gold.y_start[i] == 1) gold_starts.push_back(static_cast<int>(i));
  for (size_t j = 0; j < gold.y_end.size(); ++j)
    if (gold.y_end[j] == 1) gold_ends.push_back(static_cast<int>(j));

  std::vector<TrainingPair> pairs;
  std::set<TokenSpan> used;
  for (int i : gold_starts)
    for (int j : gold_ends) {
      if (j < i || j - i >= max_span_len) continue;
      pairs.push_back({i, j, match_set.count({i, j}) ? 1 : 0});
      used.insert({i, j});
    }

  std::vector<TokenSpan> negatives;
  for (int i : candidates.i_start)
    for (int j : candidates.i_end) {
      if (j < i || j - i >= max_span_len) continue;
      if (used.count({i, j})) continue;
      negatives.push_back({i, j});
    }
  rng.shuffle(negatives);
  size_t take = std::min(negatives.size(), pairs.size());
  for (size_t k = 0; k < take; ++k) pairs.push_back({negatives[k].first, negatives[k].second, 0});
  return pairs;
}

namespace {

double start_end_loss(const Mat& p, const std::vector<int>& y) {
  double loss = 0.0;
  for (size_t i = 0; i < p.rows; ++i) loss -= clamped_log(p(i, static_cast<size_t>(y[i])));
  return loss / static_cast<double>(p.rows);
}

double span_loss(const Mat& h_context, const SpanHeadParams& params,
                 const std::vector<TrainingPair>& pairs) {
  if (pairs.empty()) return 0.0;
  double loss = 0.0;
  for (const auto& pr : pairs) {
    double p = match_probability(h_context, pr.start, pr.end, params);
    loss -= pr.label == 1 ? clamped_log(p) : clamped_log(1.0 - p);
  }
  return loss / static_cast<double>(pairs.size());
}

}  // namespace

LossReport compute_loss(const SpanProbabilities& probs, const Mat& h_context,
                        const SpanHeadParams& params, const GoldSpanLabels& gold,
                        const std::vector<TrainingPair>& pairs, const HeadConfig& config) {
  size_t n = h_context.rows;
  if (gold.y_start.size() != n || gold.y_end.size() != n)
    throw InputError("gold label length does not match context length");
  LossReport report;
  report.l_start = start_end_loss(probs.p_start, gold.y_start);
  report.l_end = start_end_loss(probs.p_end, gold.y_end);
  report.l_span = span_loss(h_context, params, pairs);
  report.l_total =
      config.alpha * report.l_start + config.beta * report.l_end + config.gamma * report.l_span;
  return report;
}

LossReport compute_loss_and_grad(const Mat& h_context, const SpanHeadParams& params,
                                 const GoldSpanLabels& gold,
                                 const std::vector<TrainingPair>& pairs,
                                 const HeadConfig& config, SpanHeadParams& grads,
                                 Mat& d_h_context) {
  size_t n = h_context.rows;
  size_t d = h_context.cols;
  SpanHeadCache cache;
  SpanProbabilities probs = predict_start_end(h_context, params, &cache);
  LossReport report = compute_loss(probs, h_context, params, gold, pairs, config);

  d_h_context = Mat(n, d);

  // Start/end softmax cross-entropy: dlogits = (p - onehot(y)) * weight / n.
  auto classifier_backward = [&](const Mat& p, const std::vector<int>& y, const Mat& z,
                                 const Mat& w, const Mat& v, double weight, Mat& dw, Vec& db1,
                                 Mat& dv, Vec& db2) {
    if (weight == 0.0) return;
    Mat dlogits(n, 2);
    double scale = weight / static_cast<double>(n);
    for (size_t i = 0; i < n; ++i) {
      dlogits(i, 0) = (p(i, 0) - (y[i] == 0 ? 1.0 : 0.0)) * scale;
      dlogits(i, 1) = (p(i, 1) - (y[i] == 1 ? 1.0 : 0.0)) * scale;
    }
    Mat dv_local;
    matmul_at_b(z, dlogits, dv_local);
    add_into(dv, dv_local);
    add_into(db2, col_sums(dlogits));
    Mat dz;
    matmul_a_bt(dlogits, v, dz);
    Mat dw_local;
    matmul_at_b(h_context, dz, dw_local);
    add_into(dw, dw_local);
    add_into(db1, col_sums(dz));
    Mat dh;
    matmul_a_bt(dz, w, dh);
    add_into(d_h_context, dh);
  };
  classifier_backward(probs.p_start, gold.y_start, cache.z_start, params.w_start, params.v_start,
                      config.alpha, grads.w_start, grads.b_start1, grads.v_start,
                      grads.b_start2);
  classifier_backward(probs.p_end, gold.y_end, cache.z_end, params.w_end, params.v_end,
                      config.beta, grads.w_end, grads.b_end1, grads.v_end, grads.b_end2);

  // Match BCE: ds = (sigmoid(s) - label) * gamma / |pairs|.
  if (config.gamma != 0.0 && !pairs.empty()) {
    double scale = config.gamma / static_cast<double>(pairs.size());
    for (const auto& pr : pairs) {
      double p = match_probability(h_context, pr.start, pr.end, params);
      double ds = (p - static_cast<double>(pr.label)) * scale;
      const double* hi = h_context.row(static_cast<size_t>(pr.start));
      const double* hj = h_context.row(static_cast<size_t>(pr.end));
      double* dhi = d_h_context.row(static_cast<size_t>(pr.start));
      double* dhj = d_h_context.row(static_cast<size_t>(pr.end));
      for (size_t k = 0; k < d; ++k) {
        grads.match_w[k] += ds * hi[k];
        grads.match_w[d + k] += ds * hj[k];
        dhi[k] += ds * params.match_w[k];
        dhj[k] += ds * params.match_w[d + k];
      }
      grads.match_b += ds;
    }
  }
  return report;
}

}  // namespace mrc
