// ONNX Runtime implementation of the model backend. Only compiled when the
// ONNX Runtime C++ headers are found at configure time.

#include <algorithm>
#include <array>
#include <charconv>
#include <string>

#include <onnxruntime_cxx_api.h>

#include "fomc_absa/error.hpp"
#include "fomc_absa/model_backend.hpp"

namespace fomc_absa {
namespace {

Ort::Env& ort_env() {
  static Ort::Env env(ORT_LOGGING_LEVEL_WARNING, "fomc_absa");
  return env;
}

struct PaddedBatch {
  std::vector<std::int64_t> ids, mask;
  std::int64_t batch = 0, seq = 0;
};

PaddedBatch pad(std::span<const TokenSequence> batch, TokenId pad_id) {
  PaddedBatch p;
  p.batch = static_cast<std::int64_t>(batch.size());
  for (const auto& s : batch) p.seq = std::max<std::int64_t>(p.seq, static_cast<std::int64_t>(s.ids.size()));
  p.ids.assign(static_cast<std::size_t>(p.batch * p.seq), pad_id);
  p.mask.assign(p.ids.size(), 0);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    for (std::size_t t = 0; t < batch[b].ids.size(); ++t) {
      p.ids[b * static_cast<std::size_t>(p.seq) + t] = batch[b].ids[t];
      p.mask[b * static_cast<std::size_t>(p.seq) + t] = 1;
    }
  }
  return p;
}

class Graph {
 public:
  explicit Graph(const std::filesystem::path& path) : session_(make_session(path)) {
    Ort::AllocatorWithDefaultOptions allocator;
    for (std::size_t i = 0; i < session_.GetOutputCount(); ++i) {
      outputs_.emplace_back(session_.GetOutputNameAllocated(i, allocator).get());
    }
  }

  const std::vector<std::string>& outputs() const { return outputs_; }

  std::vector<Ort::Value> run(const PaddedBatch& p, const std::vector<std::string>& names) const {
    auto mem = Ort::MemoryInfo::CreateCpu(OrtArenaAllocator, OrtMemTypeDefault);
    std::array<std::int64_t, 2> shape{p.batch, p.seq};
    auto& ids = const_cast<std::vector<std::int64_t>&>(p.ids);
    auto& mask = const_cast<std::vector<std::int64_t>&>(p.mask);
    std::array<Ort::Value, 2> inputs{
        Ort::Value::CreateTensor<std::int64_t>(mem, ids.data(), ids.size(), shape.data(), shape.size()),
        Ort::Value::CreateTensor<std::int64_t>(mem, mask.data(), mask.size(), shape.data(), shape.size())};
    const char* input_names[] = {"input_ids", "attention_mask"};
    std::vector<const char*> output_names;
    for (const auto& n : names) output_names.push_back(n.c_str());
    return const_cast<Ort::Session&>(session_).Run(Ort::RunOptions{nullptr}, input_names, inputs.data(),
                                                   inputs.size(), output_names.data(), output_names.size());
  }

 private:
  static Ort::Session make_session(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw ConfigError("model file not found: " + path.string());
    Ort::SessionOptions options;
    options.SetIntraOpNumThreads(1);
    return Ort::Session(ort_env(), path.c_str(), options);
  }

  Ort::Session session_;
  std::vector<std::string> outputs_;
};

class OnnxEncoder final : public EncoderBackend {
 public:
  OnnxEncoder(const std::filesystem::path& path, TokenId pad_id) : graph_(path), pad_id_(pad_id) {
    std::vector<std::pair<int, std::string>> hidden;
    for (const auto& name : graph_.outputs()) {
      if (!name.starts_with("hidden_")) continue;
      int k = 0;
      auto digits = std::string_view(name).substr(7);
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
      if (ec == std::errc() && ptr == digits.data() + digits.size()) hidden.emplace_back(k, name);
    }
    if (hidden.size() < kPooledLayers) {
      throw ConfigError("encoder " + path.string() + " exposes fewer than 4 hidden_<k> outputs");
    }
    std::sort(hidden.begin(), hidden.end());
    for (std::size_t i = hidden.size() - kPooledLayers; i < hidden.size(); ++i) names_.push_back(hidden[i].second);
    // Probe the hidden size with a two-token sequence.
    TokenSequence probe;
    probe.ids = {pad_id_, pad_id_};
    auto out = graph_.run(pad(std::span(&probe, 1), pad_id_), {names_.back()});
    dim_ = static_cast<std::size_t>(out[0].GetTensorTypeAndShapeInfo().GetShape().back());
  }

  std::size_t hidden_size() const override { return dim_; }

  std::vector<LayerStates> encode(std::span<const TokenSequence> batch) const override {
    auto p = pad(batch, pad_id_);
    auto outs = graph_.run(p, names_);
    std::vector<LayerStates> result;
    for (std::size_t b = 0; b < batch.size(); ++b) {
      result.emplace_back(kPooledLayers, batch[b].ids.size(), dim_);
    }
    for (std::size_t l = 0; l < outs.size(); ++l) {
      auto shape = outs[l].GetTensorTypeAndShapeInfo().GetShape();
      if (shape.size() != 3 || shape[0] != p.batch || shape[1] != p.seq ||
          static_cast<std::size_t>(shape[2]) != dim_) {
        throw EmbeddingError("encoder output " + names_[l] + " has unexpected shape");
      }
      const float* data = outs[l].GetTensorData<float>();
      for (std::size_t b = 0; b < batch.size(); ++b) {
        for (std::size_t t = 0; t < batch[b].ids.size(); ++t) {
          const float* src = data + (b * static_cast<std::size_t>(p.seq) + t) * dim_;
          std::copy(src, src + dim_, result[b].row(l, t).begin());
        }
      }
    }
    return result;
  }

 private:
  Graph graph_;
  TokenId pad_id_;
  std::vector<std::string> names_;
  std::size_t dim_ = 0;
};

class OnnxClassifier final : public LogitsClassifier {
 public:
  OnnxClassifier(const std::filesystem::path& path, TokenId pad_id) : graph_(path), pad_id_(pad_id) {
    const auto& outs = graph_.outputs();
    if (std::find(outs.begin(), outs.end(), "logits") == outs.end()) {
      throw ConfigError("classifier " + path.string() + " has no 'logits' output");
    }
  }

  std::vector<Logits> logits(std::span<const TokenSequence> batch) const override {
    auto p = pad(batch, pad_id_);
    auto outs = graph_.run(p, {"logits"});
    auto shape = outs[0].GetTensorTypeAndShapeInfo().GetShape();
    if (shape.size() != 2 || shape[0] != p.batch || shape[1] != static_cast<std::int64_t>(kNumSentimentClasses)) {
      throw EmbeddingError("classifier logits have unexpected shape");
    }
    const float* data = outs[0].GetTensorData<float>();
    std::vector<Logits> result(batch.size());
    for (std::size_t b = 0; b < batch.size(); ++b) {
      for (std::size_t c = 0; c < kNumSentimentClasses; ++c) result[b][c] = data[b * kNumSentimentClasses + c];
    }
    return result;
  }

 private:
  Graph graph_;
  TokenId pad_id_;
};

}  // namespace

bool model_backend_available() { return true; }

std::unique_ptr<EncoderBackend> load_onnx_encoder(const std::filesystem::path& path, TokenId pad_id) {
  return std::make_unique<OnnxEncoder>(path, pad_id);
}

std::unique_ptr<LogitsClassifier> load_onnx_classifier(const std::filesystem::path& path, TokenId pad_id) {
  return std::make_unique<OnnxClassifier>(path, pad_id);
}

}  // namespace fomc_absa
