#pragma once

#include <string>
#include <vector>

#include "mrc/encoder.hpp"
#include "mrc/instance.hpp"
#include "mrc/schema.hpp"
#include "mrc/span_head.hpp"
#include "mrc/tokenizer.hpp"

namespace mrc {

struct ModelConfig {
  EncoderConfig encoder;
  HeadConfig head;

  void validate() const;
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
  bool operator==(const ModelConfig&) const = default;
};

/// A trained extractor: encoder + span head + the vocabulary and schema
/// binding they were trained against.
struct Model {
  ModelConfig config;
  Vocabulary vocab;
  std::string schema_name;
  std::string schema_fingerprint;
  Strategy strategy = Strategy::Natural;
  EncoderParams params;
  SpanHeadParams head;
  nlohmann::json metadata = nlohmann::json::object();
};

/// Hidden rows for the context tokens of an already-encoded instance.
Mat context_hidden(const Model& model, const MrcInstance& inst);

/// Decoded answer spans (context-token indices) for an encoded instance.
std::vector<TokenSpan> predict_spans(const Model& model, const MrcInstance& inst);

/// Binary checkpoint: magic, JSON header (config, vocab, schema binding,
/// tensor manifest), then raw float64 payloads in manifest order.
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace mrc
