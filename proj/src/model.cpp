#include "mrc/model.hpp"

#include <cstring>
#include <fstream>

#include "mrc/errors.hpp"

namespace mrc {

namespace {

constexpr char kMagic[8] = {'M', 'R', 'C', 'K', 'P', 'T', '1', '\n'};

std::vector<TensorView> model_views(Model& model) {
  auto views = model.params.tensor_views();
  auto head_views = model.head.tensor_views();
  views.insert(views.end(), head_views.begin(), head_views.end());
  return views;
}

}  // namespace

void ModelConfig::validate() const {
  encoder.validate();
  head.validate();
}

nlohmann::json ModelConfig::to_json() const {
  return {{"encoder", encoder.to_json()}, {"head", head.to_json()}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig cfg;
  if (j.contains("encoder")) cfg.encoder = EncoderConfig::from_json(j.at("encoder"));
  if (j.contains("head")) cfg.head = HeadConfig::from_json(j.at("head"));
  return cfg;
}

Mat context_hidden(const Model& model, const MrcInstance& inst) {
  if (!inst.encoded()) throw InputError("instance has not been encoded");
  Mat h = encoder_forward(model.params, inst.input_ids, inst.segment_ids);
  Mat ctx(static_cast<size_t>(inst.context_rows), h.cols);
  for (int i = 0; i < inst.context_rows; ++i) {
    const double* src = h.row(static_cast<size_t>(inst.context_row_begin + i));
    std::copy(src, src + h.cols, ctx.row(static_cast<size_t>(i)));
  }
  return ctx;
}

std::vector<TokenSpan> predict_spans(const Model& model, const MrcInstance& inst) {
  Mat ctx = context_hidden(model, inst);
  auto probs = predict_start_end(ctx, model.head);
  auto match = match_spans(ctx, candidate_indices(probs), model.head,
                           model.config.head.max_span_len);
  return decode_answers(match, model.config.head.tau);
}

void save_model(const Model& model, const std::string& path) {
  Model& m = const_cast<Model&>(model);
  auto views = model_views(m);

  nlohmann::json manifest = nlohmann::json::array();
  for (auto& v : views) manifest.push_back({{"name", v.name}, {"shape", v.shape}});

  nlohmann::json header = {
      {"format", 1},
      {"config", model.config.to_json()},
      {"vocab", model.vocab.to_json()},
      {"schema_name", model.schema_name},
      {"schema_fingerprint", model.schema_fingerprint},
      {"strategy", to_string(model.strategy)},
      {"metadata", model.metadata},
      {"tensors", manifest},
  };
  std::string header_bytes = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  uint64_t len = header_bytes.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(header_bytes.data(), static_cast<std::streamsize>(header_bytes.size()));
  for (auto& v : views)
    out.write(reinterpret_cast<const char*>(v.data),
              static_cast<std::streamsize>(v.len * sizeof(double)));
  if (!out) throw IoError("failed writing checkpoint: " + path);
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);

  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw ParseError(path + ": not a model checkpoint");

  uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || len == 0 || len > (1ull << 30))
    throw ParseError(path + ": corrupt checkpoint header");

  std::string header_bytes(len, '\0');
  in.read(header_bytes.data(), static_cast<std::streamsize>(len));
  if (!in) throw ParseError(path + ": truncated checkpoint header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_bytes);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": bad checkpoint header: " + e.what());
  }

  Model model;
  try {
    if (header.at("format").get<int>() != 1)
      throw ParseError(path + ": unsupported checkpoint format");
    model.config = ModelConfig::from_json(header.at("config"));
    model.config.validate();
    model.vocab = Vocabulary::from_json(header.at("vocab"));
    model.schema_name = header.at("schema_name").get<std::string>();
    model.schema_fingerprint = header.at("schema_fingerprint").get<std::string>();
    model.strategy = strategy_from_string(header.at("strategy").get<std::string>());
    model.metadata = header.value("metadata", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": bad checkpoint header: " + e.what());
  }

  if (model.vocab.size() != model.config.encoder.vocab_size)
    throw ParseError(path + ": vocabulary size does not match encoder config");

  model.params = zero_params(model.config.encoder);
  model.head = zero_head(model.config.encoder.d);

  auto views = model_views(model);
  auto manifest = header.at("tensors");
  if (manifest.size() != views.size())
    throw ParseError(path + ": checkpoint tensor manifest does not match config");
  for (size_t i = 0; i < views.size(); ++i) {
    if (manifest[i].at("name").get<std::string>() != views[i].name ||
        manifest[i].at("shape").get<std::vector<size_t>>() != views[i].shape)
      throw ParseError(path + ": tensor mismatch at '" + views[i].name + "'");
    in.read(reinterpret_cast<char*>(views[i].data),
            static_cast<std::streamsize>(views[i].len * sizeof(double)));
    if (!in) throw ParseError(path + ": truncated tensor payload at '" + views[i].name + "'");
  }
  return model;
}

}  // namespace mrc
