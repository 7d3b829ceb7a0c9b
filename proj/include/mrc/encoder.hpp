#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrc/rng.hpp"
#include "mrc/tensor.hpp"

namespace mrc {

struct EncoderConfig {
  size_t vocab_size = 0;  // filled from the training vocabulary
  size_t d = 64;
  size_t layers = 2;
  size_t num_heads = 4;
  size_t ffn_size = 256;
  size_t max_seq_len = 128;
  double dropout_rate = 0.1;
  double ln_eps = 1e-9;

  void validate() const;
  nlohmann::json to_json() const;
  static EncoderConfig from_json(const nlohmann::json& j);
  bool operator==(const EncoderConfig&) const = default;
};

struct LayerParams {
  Mat wq, wk, wv, wo;  // d x d
  Vec bq, bk, bv, bo;  // d
  Vec ln1_gain, ln1_bias;
  Mat w1;  // d x ffn
  Vec b1;  // ffn
  Mat w2;  // ffn x d
  Vec b2;  // d
  Vec ln2_gain, ln2_bias;
};

/// Named view of one parameter tensor; the traversal order over views is
/// fixed, which optimizer state and checkpoints rely on.
struct TensorView {
  std::string name;
  double* data;
  size_t len;
  std::vector<size_t> shape;
};

struct EncoderParams {
  EncoderConfig config;
  Mat tok_emb;  // vocab x d
  Mat pos_emb;  // max_seq_len x d
  Mat seg_emb;  // 2 x d
  std::vector<LayerParams> layers;

  std::vector<TensorView> tensor_views();
  size_t param_count() const;
};

/// Shape-allocated parameters, all zero.
EncoderParams zero_params(const EncoderConfig& config);

/// Embeddings and weights ~ N(0, 0.02^2); layer-norm gain 1, bias 0.
EncoderParams init_params(const EncoderConfig& config, Rng& rng);

struct LayerCache {
  Mat x_in;
  Mat q, k, v;
  std::vector<Mat> attn;  // per-head n x n softmax rows
  Mat ctx;
  Mat attn_out;
  Mat attn_drop_mask;
  Mat sum1;
  Mat ln1_out;
  Vec ln1_mean, ln1_rstd;
  Mat ffn_z;
  Mat ffn_g;
  Mat ffn_out;
  Mat ffn_drop_mask;
  Mat sum2;
  Vec ln2_mean, ln2_rstd;
  Mat ln2_out;
};

struct EncoderCache {
  std::vector<int> input_ids;
  std::vector<int> segment_ids;
  Mat emb;  // summed embeddings after dropout
  Mat emb_drop_mask;
  std::vector<LayerCache> layers;
};

/// H over the whole input sequence (k x d). With train=true and an rng,
/// inverted-dropout masks are sampled and recorded in the cache so backward
/// differentiates the exact sampled function.
Mat encoder_forward(const EncoderParams& params, const std::vector<int>& input_ids,
                    const std::vector<int>& segment_ids, bool train = false, Rng* rng = nullptr,
                    EncoderCache* cache = nullptr);

/// Accumulate (+=) exact gradients of a scalar loss into `grads`, given dL/dH.
void encoder_backward(const EncoderParams& params, const EncoderCache& cache, const Mat& d_h,
                      EncoderParams& grads);

}  // namespace mrc
