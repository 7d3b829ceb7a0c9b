#include "mrc/encoder.hpp"

#include <cmath>

#include "mrc/errors.hpp"
#include "mrc/kernels.hpp"

namespace mrc {

using kernels::add_row_bias;
using kernels::layer_norm;
using kernels::layer_norm_backward;
using kernels::matmul;
using kernels::matmul_a_bt;
using kernels::matmul_at_b;
using kernels::softmax_rows;

void EncoderConfig::validate() const {
  if (d == 0 || layers == 0 || num_heads == 0 || ffn_size == 0 || max_seq_len == 0 ||
      vocab_size == 0)
    throw ConfigError("encoder sizes must all be >= 1");
  if (d % num_heads != 0)
    throw ConfigError("hidden size " + std::to_string(d) + " not divisible by " +
                      std::to_string(num_heads) + " heads");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0)
    throw ConfigError("dropout rate must lie in [0, 1)");
  if (ln_eps <= 0.0) throw ConfigError("layer-norm epsilon must be positive");
}

nlohmann::json EncoderConfig::to_json() const {
  return {{"vocab_size", vocab_size}, {"d", d},
          {"layers", layers},         {"num_heads", num_heads},
          {"ffn_size", ffn_size},     {"max_seq_len", max_seq_len},
          {"dropout_rate", dropout_rate}, {"ln_eps", ln_eps}};
}

EncoderConfig EncoderConfig::from_json(const nlohmann::json& j) {
  EncoderConfig c;
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.d = j.value("d", c.d);
  c.layers = j.value("layers", c.layers);
  c.num_heads = j.value("num_heads", c.num_heads);
  c.ffn_size = j.value("ffn_size", c.ffn_size);
  c.max_seq_len = j.value("max_seq_len", c.max_seq_len);
  c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
  c.ln_eps = j.value("ln_eps", c.ln_eps);
  return c;
}

std::vector<TensorView> EncoderParams::tensor_views() {
  std::vector<TensorView> views;
  auto mat = [&](const std::string& name, Mat& m) {
    views.push_back({name, m.data.data(), m.size(), {m.rows, m.cols}});
  };
  auto vec = [&](const std::string& name, Vec& v) {
    views.push_back({name, v.data(), v.size(), {v.size()}});
  };
  mat("tok_emb", tok_emb);
  mat("pos_emb", pos_emb);
  mat("seg_emb", seg_emb);
  for (size_t l = 0; l < layers.size(); ++l) {
    std::string p = "layer" + std::to_string(l) + ".";
    LayerParams& lp = layers[l];
    mat(p + "wq", lp.wq);
    vec(p + "bq", lp.bq);
    mat(p + "wk", lp.wk);
    vec(p + "bk", lp.bk);
    mat(p + "wv", lp.wv);
    vec(p + "bv", lp.bv);
    mat(p + "wo", lp.wo);
    vec(p + "bo", lp.bo);
    vec(p + "ln1_gain", lp.ln1_gain);
    vec(p + "ln1_bias", lp.ln1_bias);
    mat(p + "w1", lp.w1);
    vec(p + "b1", lp.b1);
    mat(p + "w2", lp.w2);
    vec(p + "b2", lp.b2);
    vec(p + "ln2_gain", lp.ln2_gain);
    vec(p + "ln2_bias", lp.ln2_bias);
  }
  return views;
}

size_t EncoderParams::param_count() const {
  size_t n = 0;
  for (auto& v : const_cast<EncoderParams*>(this)->tensor_views()) n += v.len;
  return n;
}

EncoderParams zero_params(const EncoderConfig& config) {
  config.validate();
  EncoderParams p;
  p.config = config;
  p.tok_emb = Mat(config.vocab_size, config.d);
  p.pos_emb = Mat(config.max_seq_len, config.d);
  p.seg_emb = Mat(2, config.d);
  p.layers.resize(config.layers);
  for (auto& lp : p.layers) {
    lp.wq = lp.wk = lp.wv = lp.wo = Mat(config.d, config.d);
    lp.bq = lp.bk = lp.bv = lp.bo = Vec(config.d, 0.0);
    lp.ln1_gain.assign(config.d, 0.0);
    lp.ln1_bias.assign(config.d, 0.0);
    lp.w1 = Mat(config.d, config.ffn_size);
    lp.b1.assign(config.ffn_size, 0.0);
    lp.w2 = Mat(config.ffn_size, config.d);
    lp.b2.assign(config.d, 0.0);
    lp.ln2_gain.assign(config.d, 0.0);
    lp.ln2_bias.assign(config.d, 0.0);
  }
  return p;
}

EncoderParams init_params(const EncoderConfig& config, Rng& rng) {
  EncoderParams p = zero_params(config);
  for (auto& view : p.tensor_views()) {
    bool is_gain = view.name.find("ln") != std::string::npos &&
                   view.name.find("gain") != std::string::npos;
    bool is_ln_bias = view.name.find("ln") != std::string::npos &&
                      view.name.find("bias") != std::string::npos;
    for (size_t i = 0; i < view.len; ++i) {
      if (is_gain)
        view.data[i] = 1.0;
      else if (is_ln_bias)
        view.data[i] = 0.0;
      else
        view.data[i] = rng.normal(0.0, 0.02);
    }
  }
  return p;
}

namespace {

Vec col_sums(const Mat& m) {
  Vec out(m.cols, 0.0);
  for (size_t i = 0; i < m.rows; ++i) {
    const double* row = m.row(i);
    for (size_t j = 0; j < m.cols; ++j) out[j] += row[j];
  }
  return out;
}

void add_into(Vec& dst, const Vec& src) {
  for (size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void add_into(Mat& dst, const Mat& src) {
  for (size_t i = 0; i < dst.size(); ++i) dst.data[i] += src.data[i];
}

Mat head_slice(const Mat& m, size_t head, size_t dk) {
  Mat out(m.rows, dk);
  for (size_t i = 0; i < m.rows; ++i)
    for (size_t j = 0; j < dk; ++j) out(i, j) = m(i, head * dk + j);
  return out;
}

void head_slice_add(Mat& dst, const Mat& part, size_t head, size_t dk) {
  for (size_t i = 0; i < part.rows; ++i)
    for (size_t j = 0; j < dk; ++j) dst(i, head * dk + j) += part(i, j);
}

Mat sample_dropout_mask(size_t rows, size_t cols, double rate, Rng& rng) {
  Mat mask(rows, cols);
  double keep_scale = 1.0 / (1.0 - rate);
  for (size_t i = 0; i < mask.size(); ++i)
    mask.data[i] = rng.uniform() < rate ? 0.0 : keep_scale;
  return mask;
}

void apply_mask(Mat& m, const Mat& mask) {
  for (size_t i = 0; i < m.size(); ++i) m.data[i] *= mask.data[i];
}

// Row-wise softmax jacobian product: ds = p .* (dp - sum(dp .* p)).
Mat softmax_backward_rows(const Mat& p, const Mat& dp) {
  Mat ds(p.rows, p.cols);
  for (size_t i = 0; i < p.rows; ++i) {
    const double* pr = p.row(i);
    const double* dpr = dp.row(i);
    double dot = 0.0;
    for (size_t j = 0; j < p.cols; ++j) dot += dpr[j] * pr[j];
    double* out = ds.row(i);
    for (size_t j = 0; j < p.cols; ++j) out[j] = pr[j] * (dpr[j] - dot);
  }
  return ds;
}

}  // namespace

Mat encoder_forward(const EncoderParams& params, const std::vector<int>& input_ids,
                    const std::vector<int>& segment_ids, bool train, Rng* rng,
                    EncoderCache* cache) {
  const EncoderConfig& cfg = params.config;
  size_t n = input_ids.size();
  if (n == 0) throw InputError("empty input sequence");
  if (n > cfg.max_seq_len)
    throw InputError("sequence of " + std::to_string(n) + " tokens exceeds max_seq_len " +
                     std::to_string(cfg.max_seq_len));
  if (segment_ids.size() != n) throw InputError("segment_ids length mismatch");

  Mat x(n, cfg.d);
  for (size_t i = 0; i < n; ++i) {
    int tok = input_ids[i];
    int seg = segment_ids[i];
    if (tok < 0 || static_cast<size_t>(tok) >= cfg.vocab_size)
      throw InputError("token id " + std::to_string(tok) + " outside vocabulary of " +
                       std::to_string(cfg.vocab_size));
    if (seg != 0 && seg != 1) throw InputError("segment ids must be 0 or 1");
    const double* te = params.tok_emb.row(static_cast<size_t>(tok));
    const double* pe = params.pos_emb.row(i);
    const double* se = params.seg_emb.row(static_cast<size_t>(seg));
    double* out = x.row(i);
    for (size_t j = 0; j < cfg.d; ++j) out[j] = te[j] + pe[j] + se[j];
  }

  bool dropout = train && cfg.dropout_rate > 0.0 && rng != nullptr;
  if (cache) {
    cache->input_ids = input_ids;
    cache->segment_ids = segment_ids;
    cache->layers.assign(cfg.layers, LayerCache{});
    cache->emb_drop_mask = Mat();
  }
  if (dropout) {
    Mat mask = sample_dropout_mask(n, cfg.d, cfg.dropout_rate, *rng);
    apply_mask(x, mask);
    if (cache) cache->emb_drop_mask = std::move(mask);
  }
  if (cache) cache->emb = x;

  size_t dk = cfg.d / cfg.num_heads;
  double scale = 1.0 / std::sqrt(static_cast<double>(dk));

  for (size_t l = 0; l < cfg.layers; ++l) {
    const LayerParams& lp = params.layers[l];
    LayerCache local;
    LayerCache& lc = cache ? cache->layers[l] : local;
    lc.x_in = x;

    matmul(x, lp.wq, lc.q);
    add_row_bias(lc.q, lp.bq);
    matmul(x, lp.wk, lc.k);
    add_row_bias(lc.k, lp.bk);
    matmul(x, lp.wv, lc.v);
    add_row_bias(lc.v, lp.bv);

    lc.ctx = Mat(n, cfg.d);
    lc.attn.resize(cfg.num_heads);
    for (size_t h = 0; h < cfg.num_heads; ++h) {
      Mat qh = head_slice(lc.q, h, dk);
      Mat kh = head_slice(lc.k, h, dk);
      Mat vh = head_slice(lc.v, h, dk);
      Mat scores;
      matmul_a_bt(qh, kh, scores);
      for (double& s : scores.data) s *= scale;
      softmax_rows(scores);
      lc.attn[h] = scores;
      Mat ctx_h;
      matmul(scores, vh, ctx_h);
      head_slice_add(lc.ctx, ctx_h, h, dk);
    }

    matmul(lc.ctx, lp.wo, lc.attn_out);
    add_row_bias(lc.attn_out, lp.bo);

    Mat attn_dropped = lc.attn_out;
    if (dropout) {
      lc.attn_drop_mask = sample_dropout_mask(n, cfg.d, cfg.dropout_rate, *rng);
      apply_mask(attn_dropped, lc.attn_drop_mask);
    }
    lc.sum1 = lc.x_in;
    add_into(lc.sum1, attn_dropped);
    layer_norm(lc.sum1, lp.ln1_gain, lp.ln1_bias, cfg.ln_eps, lc.ln1_out, lc.ln1_mean,
               lc.ln1_rstd);

    matmul(lc.ln1_out, lp.w1, lc.ffn_z);
    add_row_bias(lc.ffn_z, lp.b1);
    kernels::gelu(lc.ffn_z, lc.ffn_g);
    matmul(lc.ffn_g, lp.w2, lc.ffn_out);
    add_row_bias(lc.ffn_out, lp.b2);

    Mat ffn_dropped = lc.ffn_out;
    if (dropout) {
      lc.ffn_drop_mask = sample_dropout_mask(n, cfg.d, cfg.dropout_rate, *rng);
      apply_mask(ffn_dropped, lc.ffn_drop_mask);
    }
    lc.sum2 = lc.ln1_out;
    add_into(lc.sum2, ffn_dropped);
    layer_norm(lc.sum2, lp.ln2_gain, lp.ln2_bias, cfg.ln_eps, lc.ln2_out, lc.ln2_mean,
               lc.ln2_rstd);
    x = lc.ln2_out;
  }
  return x;
}

void encoder_backward(const EncoderParams& params, const EncoderCache& cache, const Mat& d_h,
                      EncoderParams& grads) {
  const EncoderConfig& cfg = params.config;
  size_t n = cache.input_ids.size();
  if (d_h.rows != n || d_h.cols != cfg.d) throw Error("upstream gradient shape mismatch");
  if (cache.layers.size() != cfg.layers) throw Error("cache does not match parameter config");

  size_t dk = cfg.d / cfg.num_heads;
  double scale = 1.0 / std::sqrt(static_cast<double>(dk));

  Mat dx = d_h;
  for (size_t li = cfg.layers; li-- > 0;) {
    const LayerParams& lp = params.layers[li];
    LayerParams& lg = grads.layers[li];
    const LayerCache& lc = cache.layers[li];

    // layer_norm 2
    Mat dsum2;
    layer_norm_backward(dx, lc.sum2, lp.ln2_gain, lc.ln2_mean, lc.ln2_rstd, dsum2, lg.ln2_gain,
                        lg.ln2_bias);

    // sum2 = ln1_out + dropout(ffn_out)
    Mat dln1_out = dsum2;
    Mat dffn_out = dsum2;
    if (lc.ffn_drop_mask.size() > 0) apply_mask(dffn_out, lc.ffn_drop_mask);

    // ffn_out = gelu(ffn_z) * w2 + b2
    Mat dg;
    matmul_a_bt(dffn_out, lp.w2, dg);
    Mat dw2;
    matmul_at_b(lc.ffn_g, dffn_out, dw2);
    add_into(lg.w2, dw2);
    add_into(lg.b2, col_sums(dffn_out));

    Mat dz;
    kernels::gelu_backward(dg, lc.ffn_z, dz);

    // ffn_z = ln1_out * w1 + b1
    Mat dln1_from_ffn;
    matmul_a_bt(dz, lp.w1, dln1_from_ffn);
    add_into(dln1_out, dln1_from_ffn);
    Mat dw1;
    matmul_at_b(lc.ln1_out, dz, dw1);
    add_into(lg.w1, dw1);
    add_into(lg.b1, col_sums(dz));

    // layer_norm 1
    Mat dsum1;
    layer_norm_backward(dln1_out, lc.sum1, lp.ln1_gain, lc.ln1_mean, lc.ln1_rstd, dsum1,
                        lg.ln1_gain, lg.ln1_bias);

    // sum1 = x_in + dropout(attn_out)
    Mat dx_in = dsum1;
    Mat dattn_out = dsum1;
    if (lc.attn_drop_mask.size() > 0) apply_mask(dattn_out, lc.attn_drop_mask);

    // attn_out = ctx * wo + bo
    Mat dctx;
    matmul_a_bt(dattn_out, lp.wo, dctx);
    Mat dwo;
    matmul_at_b(lc.ctx, dattn_out, dwo);
    add_into(lg.wo, dwo);
    add_into(lg.bo, col_sums(dattn_out));

    Mat dq(n, cfg.d), dkm(n, cfg.d), dv(n, cfg.d);
    for (size_t h = 0; h < cfg.num_heads; ++h) {
      Mat qh = head_slice(lc.q, h, dk);
      Mat kh = head_slice(lc.k, h, dk);
      Mat vh = head_slice(lc.v, h, dk);
      Mat dctx_h = head_slice(dctx, h, dk);
      const Mat& p = lc.attn[h];

      Mat dp;
      matmul_a_bt(dctx_h, vh, dp);
      Mat dvh;
      matmul_at_b(p, dctx_h, dvh);

      Mat dscores = softmax_backward_rows(p, dp);
      for (double& s : dscores.data) s *= scale;

      Mat dqh;
      matmul(dscores, kh, dqh);
      Mat dkh;
      matmul_at_b(dscores, qh, dkh);

      head_slice_add(dq, dqh, h, dk);
      head_slice_add(dkm, dkh, h, dk);
      head_slice_add(dv, dvh, h, dk);
    }

    // q = x_in * wq + bq (and k, v alike)
    auto proj_backward = [&](const Mat& dproj, const Mat& w, Mat& wgrad, Vec& bgrad) {
      Mat dw;
      matmul_at_b(lc.x_in, dproj, dw);
      add_into(wgrad, dw);
      add_into(bgrad, col_sums(dproj));
      Mat dx_part;
      matmul_a_bt(dproj, w, dx_part);
      add_into(dx_in, dx_part);
    };
    proj_backward(dq, lp.wq, lg.wq, lg.bq);
    proj_backward(dkm, lp.wk, lg.wk, lg.bk);
    proj_backward(dv, lp.wv, lg.wv, lg.bv);

    dx = std::move(dx_in);
  }

  if (cache.emb_drop_mask.size() > 0) apply_mask(dx, cache.emb_drop_mask);
  for (size_t i = 0; i < n; ++i) {
    const double* g = dx.row(i);
    double* tg = grads.tok_emb.row(static_cast<size_t>(cache.input_ids[i]));
    double* pg = grads.pos_emb.row(i);
    double* sg = grads.seg_emb.row(static_cast<size_t>(cache.segment_ids[i]));
    for (size_t j = 0; j < cfg.d; ++j) {
      tg[j] += g[j];
      pg[j] += g[j];
      sg[j] += g[j];
    }
  }
}

}  // namespace mrc
