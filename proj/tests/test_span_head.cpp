#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "mrc/errors.hpp"
#include "mrc/rng.hpp"
#include "mrc/span_head.hpp"

using namespace mrc;

namespace {

Mat random_mat(size_t rows, size_t cols, Rng& rng, double scale = 1.0) {
  Mat m(rows, cols);
  for (auto& v : m.data) v = rng.normal(0.0, scale);
  return m;
}

SpanHeadParams random_head(size_t d, uint64_t seed, double scale = 0.5) {
  Rng rng(seed);
  auto head = zero_head(d);
  for (auto& view : head.tensor_views())
    for (size_t i = 0; i < view.len; ++i) view.data[i] = rng.normal(0.0, scale);
  return head;
}

std::vector<TokenSpan> decode_pairs(std::vector<ScoredPair> pairs, double tau) {
  MatchPrediction match;
  match.pairs = std::move(pairs);
  return decode_answers(match, tau);
}

LossReport loss_of(const Mat& h, SpanHeadParams& head, const GoldSpanLabels& gold,
                   const std::vector<TrainingPair>& pairs, const HeadConfig& cfg) {
  auto probs = predict_start_end(h, head);
  return compute_loss(probs, h, head, gold, pairs, cfg);
}

// Exhaustive reference decoder: enumerate every (i, j) pair directly from the
// probability matrices and apply the selection rules by brute force.
std::vector<TokenSpan> oracle_decode(const Mat& h, const SpanHeadParams& head,
                                     const HeadConfig& cfg) {
  size_t n = h.rows;
  SpanProbabilities probs = predict_start_end(h, head);
  std::map<int, std::pair<int, double>> best;  // start -> (end, prob)
  for (size_t i = 0; i < n; ++i) {
    if (probs.p_start(i, 1) < probs.p_start(i, 0)) continue;
    for (size_t j = i; j < n && j - i < static_cast<size_t>(cfg.max_span_len); ++j) {
      if (probs.p_end(j, 1) < probs.p_end(j, 0)) continue;
      double p = match_probability(h, static_cast<int>(i), static_cast<int>(j), head);
      if (p < cfg.tau) continue;
      int ii = static_cast<int>(i), jj = static_cast<int>(j);
      auto it = best.find(ii);
      if (it == best.end() || p > it->second.second ||
          (p == it->second.second && jj < it->second.first))
        best[ii] = {jj, p};
    }
  }
  std::vector<TokenSpan> out;
  for (auto& [s, ep] : best) out.emplace_back(s, ep.first);
  return out;
}

}  // namespace

TEST_CASE("zero parameters give uniform start and end rows") {
  auto head = zero_head(8);
  Rng rng(1);
  Mat h = random_mat(5, 8, rng);
  auto probs = predict_start_end(h, head);
  for (size_t i = 0; i < 5; ++i) {
    CHECK(probs.p_start(i, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(probs.p_end(i, 1) == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("probability rows sum to one on randomized inputs") {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    size_t n = static_cast<size_t>(rng.uniform_int(1, 12));
    Mat h = random_mat(n, 8, rng, 3.0);
    auto head = random_head(8, 1000 + static_cast<uint64_t>(trial), 2.0);
    auto probs = predict_start_end(h, head);
    for (size_t i = 0; i < n; ++i) {
      CHECK(std::abs(probs.p_start(i, 0) + probs.p_start(i, 1) - 1.0) <= 1e-9);
      CHECK(std::abs(probs.p_end(i, 0) + probs.p_end(i, 1) - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("adding a constant to both output biases leaves probabilities unchanged") {
  Rng rng(3);
  Mat h = random_mat(4, 8, rng);
  auto head = random_head(8, 4);
  auto probs1 = predict_start_end(h, head);
  head.b_start2[0] += 7.5;
  head.b_start2[1] += 7.5;
  auto probs2 = predict_start_end(h, head);
  for (size_t i = 0; i < probs1.p_start.size(); ++i)
    CHECK(probs1.p_start.data[i] == doctest::Approx(probs2.p_start.data[i]).epsilon(1e-12));
}

TEST_CASE("head size mismatch is rejected") {
  auto head = zero_head(8);
  Mat h(3, 4);
  CHECK_THROWS_AS(predict_start_end(h, head), Error);
}

TEST_CASE("candidate indices follow the argmax rule") {
  SpanProbabilities probs;
  probs.p_start = Mat(4, 2);
  probs.p_start(0, 0) = 0.9; probs.p_start(0, 1) = 0.1;
  probs.p_start(1, 0) = 0.3; probs.p_start(1, 1) = 0.7;
  probs.p_start(2, 0) = 0.9; probs.p_start(2, 1) = 0.1;
  probs.p_start(3, 0) = 0.5; probs.p_start(3, 1) = 0.5;  // exact tie counts
  probs.p_end = Mat(4, 2);
  for (size_t i = 0; i < 4; ++i) { probs.p_end(i, 0) = 0.9; probs.p_end(i, 1) = 0.1; }

  auto idx = candidate_indices(probs);
  CHECK(idx.i_start == std::vector<int>{1, 3});
  CHECK(idx.i_end.empty());
}

TEST_CASE("match head with zero parameters outputs one half") {
  auto head = zero_head(8);
  Rng rng(5);
  Mat h = random_mat(4, 8, rng);
  CHECK(match_probability(h, 0, 3, head) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("match pairing respects ordering and width") {
  auto head = zero_head(4);
  Rng rng(6);
  Mat h = random_mat(8, 4, rng);

  CandidateIndices cands;
  cands.i_start = {1};
  cands.i_end = {3};
  auto match = match_spans(h, cands, head, 30);
  REQUIRE(match.pairs.size() == 1);
  CHECK(match.pairs[0].start == 1);
  CHECK(match.pairs[0].end == 3);

  cands.i_start = {1, 4};
  cands.i_end = {2, 6};
  match = match_spans(h, cands, head, 30);
  REQUIRE(match.pairs.size() == 3);  // (1,2) (1,6) (4,6); (4,2) violates i <= j
  CHECK(match.pairs[0].start == 1);
  CHECK(match.pairs[0].end == 2);
  CHECK(match.pairs[1].start == 1);
  CHECK(match.pairs[1].end == 6);
  CHECK(match.pairs[2].start == 4);
  CHECK(match.pairs[2].end == 6);

  match = match_spans(h, cands, head, 3);
  REQUIRE(match.pairs.size() == 2);  // (1,6) now too wide
  CHECK(match.pairs[0].end == 2);
  CHECK(match.pairs[1].start == 4);
}

TEST_CASE("decode keeps the best end per start") {
  auto spans = decode_pairs({{1, 2, 0.8}, {1, 6, 0.6}, {4, 6, 0.9}}, 0.5);
  REQUIRE(spans.size() == 2);
  CHECK(spans[0] == TokenSpan{1, 2});
  CHECK(spans[1] == TokenSpan{4, 6});

  spans = decode_pairs({{1, 5, 0.7}, {1, 2, 0.7}}, 0.5);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0] == TokenSpan{1, 2});  // equal probability, smaller end wins

  CHECK(decode_pairs({{0, 1, 0.4}, {2, 3, 0.49}}, 0.5).empty());

  spans = decode_pairs({{2, 2, 0.5}}, 0.5);
  REQUIRE(spans.size() == 1);  // threshold is inclusive
}

TEST_CASE("nested answers survive decoding") {
  // Starts 1 and 2, ends 3 and 6 can produce both (2,3) and the containing
  // (1,6) simultaneously, which one-label-per-token tagging cannot.
  auto spans = decode_pairs({{1, 6, 0.9}, {1, 3, 0.6}, {2, 3, 0.8}, {2, 6, 0.7}}, 0.5);
  REQUIRE(spans.size() == 2);
  CHECK(spans[0] == TokenSpan{1, 6});
  CHECK(spans[1] == TokenSpan{2, 3});
}

TEST_CASE("decoder agrees with the exhaustive oracle") {
  Rng rng(7);
  int nonempty = 0;
  for (int trial = 0; trial < 300; ++trial) {
    size_t n = static_cast<size_t>(rng.uniform_int(1, 12));
    Mat h = random_mat(n, 8, rng, 2.0);
    auto head = random_head(8, 5000 + static_cast<uint64_t>(trial), 1.5);
    HeadConfig cfg;
    cfg.max_span_len = rng.uniform_int(1, 12);

    auto probs = predict_start_end(h, head);
    auto match = match_spans(h, candidate_indices(probs), head, cfg.max_span_len);
    auto got = decode_answers(match, cfg.tau);
    auto expected = oracle_decode(h, head, cfg);
    CHECK(got == expected);
    if (!got.empty()) ++nonempty;
  }
  CHECK(nonempty > 30);  // the comparison must exercise real decisions
}

TEST_CASE("loss on a perfect prediction is near zero") {
  size_t n = 4, d = 4;
  auto head = zero_head(d);
  // w = identity, v routes saturated coordinates to the class-1 logit.
  for (size_t i = 0; i < d; ++i) { head.w_start(i, i) = 1.0; head.w_end(i, i) = 1.0; }
  head.v_start(0, 1) = 40.0;
  head.v_end(1, 1) = 40.0;
  head.match_w[2] = 40.0;

  Mat h(n, d);
  for (size_t i = 0; i < n; ++i) { h(i, 0) = -1.0; h(i, 1) = -1.0; h(i, 2) = 1.0; }
  h(1, 0) = 1.0;  // row 1 is the start
  h(2, 1) = 1.0;  // row 2 is the end

  GoldSpanLabels gold;
  gold.y_start = {0, 1, 0, 0};
  gold.y_end = {0, 0, 1, 0};
  gold.y_match = {{1, 2}};
  std::vector<TrainingPair> pairs = {{1, 2, 1}};

  HeadConfig cfg;
  auto report = loss_of(h, head, gold, pairs, cfg);
  CHECK(report.l_total < 1e-10);
}

TEST_CASE("uniform rows give log two start and end loss") {
  size_t n = 5, d = 8;
  auto head = zero_head(d);
  Rng rng(8);
  Mat h = random_mat(n, d, rng);
  GoldSpanLabels gold;
  gold.y_start = {0, 1, 0, 0, 1};
  gold.y_end = {0, 0, 1, 0, 1};
  HeadConfig cfg;
  auto report = loss_of(h, head, gold, {}, cfg);
  CHECK(report.l_start == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(report.l_end == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(report.l_span == 0.0);
  CHECK(report.l_total == doctest::Approx(2 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("loss decomposes with the configured weights") {
  Rng rng(9);
  size_t n = 6, d = 8;
  Mat h = random_mat(n, d, rng);
  auto head = random_head(d, 10);
  GoldSpanLabels gold;
  gold.y_start = {0, 1, 0, 0, 0, 0};
  gold.y_end = {0, 0, 0, 1, 0, 0};
  gold.y_match = {{1, 3}};
  std::vector<TrainingPair> pairs = {{1, 3, 1}, {2, 4, 0}};
  HeadConfig cfg;
  cfg.alpha = 0.5;
  cfg.beta = 0.25;
  cfg.gamma = 1.0;
  auto report = loss_of(h, head, gold, pairs, cfg);
  double recomposed = 0.5 * report.l_start + 0.25 * report.l_end + 1.0 * report.l_span;
  CHECK(report.l_total == doctest::Approx(recomposed).epsilon(1e-12));
  CHECK(report.l_start > 0.0);
  CHECK(report.l_span > 0.0);
}

TEST_CASE("label length mismatch is rejected") {
  Rng rng(11);
  Mat h = random_mat(4, 8, rng);
  auto head = zero_head(8);
  GoldSpanLabels gold;
  gold.y_start = {0, 1};
  gold.y_end = {0, 0, 0, 0};
  HeadConfig cfg;
  CHECK_THROWS_AS(loss_of(h, head, gold, {}, cfg), InputError);
}

TEST_CASE("training pairs label gold pairs and sample balanced negatives") {
  GoldSpanLabels gold;
  gold.y_start = {0, 1, 0, 1, 0, 0};
  gold.y_end = {0, 0, 1, 0, 1, 0};
  gold.y_match = {{1, 2}, {3, 4}};

  CandidateIndices cands;
  cands.i_start = {0, 1, 5};
  cands.i_end = {0, 2, 5};

  Rng rng(12);
  auto pairs = build_training_pairs(gold, cands, 30, rng);

  int positives = 0, negatives = 0;
  std::set<std::pair<int, int>> seen;
  for (auto& p : pairs) {
    CHECK(p.start <= p.end);
    CHECK(seen.insert({p.start, p.end}).second);
    if (p.label) ++positives; else ++negatives;
  }
  // Gold starts x gold ends with i <= j: (1,2) (1,4) (3,4); two are true matches.
  CHECK(positives == 2);
  bool has_14 = false;
  for (auto& p : pairs)
    if (p.start == 1 && p.end == 4) { has_14 = true; CHECK(p.label == 0); }
  CHECK(has_14);
  CHECK(negatives >= 1);
  for (auto& p : pairs)
    if (p.start == 0) CHECK(p.label == 0);

  Rng rng2(12);
  auto pairs2 = build_training_pairs(gold, cands, 30, rng2);
  REQUIRE(pairs.size() == pairs2.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    CHECK(pairs[i].start == pairs2[i].start);
    CHECK(pairs[i].end == pairs2[i].end);
  }
}

TEST_CASE("span head gradients match finite differences") {
  Rng rng(13);
  size_t n = 6, d = 8;
  Mat h = random_mat(n, d, rng);
  auto head = random_head(d, 14);
  GoldSpanLabels gold;
  gold.y_start = {0, 1, 0, 0, 1, 0};
  gold.y_end = {0, 0, 1, 0, 0, 1};
  gold.y_match = {{1, 2}, {4, 5}};
  std::vector<TrainingPair> pairs = {{1, 2, 1}, {4, 5, 1}, {1, 5, 0}, {0, 3, 0}};
  HeadConfig cfg;
  cfg.alpha = 1.0;
  cfg.beta = 0.7;
  cfg.gamma = 1.3;

  auto head_grads = zero_head(d);
  Mat dh(n, d);
  compute_loss_and_grad(h, head, gold, pairs, cfg, head_grads, dh);

  const double step = 1e-5;
  auto loss_at = [&]() { return loss_of(h, head, gold, pairs, cfg).l_total; };

  auto views = head.tensor_views();
  auto grad_views = head_grads.tensor_views();
  double max_rel = 0.0;
  for (size_t t = 0; t < views.size(); ++t) {
    for (size_t i = 0; i < views[t].len; ++i) {
      double saved = views[t].data[i];
      views[t].data[i] = saved + step;
      double up = loss_at();
      views[t].data[i] = saved - step;
      double down = loss_at();
      views[t].data[i] = saved;
      double fd = (up - down) / (2 * step);
      double analytic = grad_views[t].data[i];
      double rel = std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-6});
      max_rel = std::max(max_rel, rel);
    }
  }
  for (size_t i = 0; i < h.size(); ++i) {
    double saved = h.data[i];
    h.data[i] = saved + step;
    double up = loss_at();
    h.data[i] = saved - step;
    double down = loss_at();
    h.data[i] = saved;
    double fd = (up - down) / (2 * step);
    double rel = std::abs(dh.data[i] - fd) / std::max({std::abs(dh.data[i]), std::abs(fd), 1e-6});
    max_rel = std::max(max_rel, rel);
  }
  CHECK(max_rel <= 1e-4);
}

TEST_CASE("zero span weight removes match head gradients") {
  Rng rng(15);
  size_t n = 5, d = 8;
  Mat h = random_mat(n, d, rng);
  auto head = random_head(d, 16);
  GoldSpanLabels gold;
  gold.y_start = {0, 1, 0, 0, 0};
  gold.y_end = {0, 0, 1, 0, 0};
  gold.y_match = {{1, 2}};
  std::vector<TrainingPair> pairs = {{1, 2, 1}, {0, 4, 0}};
  HeadConfig cfg;
  cfg.gamma = 0.0;

  auto head_grads = zero_head(d);
  Mat dh(n, d);
  compute_loss_and_grad(h, head, gold, pairs, cfg, head_grads, dh);
  for (double v : head_grads.match_w) CHECK(v == 0.0);
  CHECK(head_grads.match_b == 0.0);
  bool any = false;
  for (double v : head_grads.w_start.data) any = any || v != 0.0;
  CHECK(any);
}

TEST_CASE("head config validation and serialization") {
  HeadConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.tau = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = HeadConfig{};
  cfg.max_span_len = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = HeadConfig{};
  cfg.alpha = cfg.beta = cfg.gamma = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = HeadConfig{};
  cfg.tau = 0.4;
  cfg.max_span_len = 12;
  cfg.beta = 0.5;
  auto j = cfg.to_json();
  auto back = HeadConfig::from_json(j);
  CHECK(back == cfg);
}

TEST_CASE("head parameter count") {
  auto head = zero_head(8);
  // start stage: 8*8 + 8 + 8*2 + 2 = 90, same for end, match: 16 + 1 = 17
  CHECK(head.param_count() == 197);
}
