#pragma once

// Exported-model runtime. Encoder graphs take int64 `input_ids` and
// `attention_mask` of shape [batch, seq] and expose float32 outputs
// `hidden_<k>` of shape [batch, seq, d]; the four highest k are pooled.
// Classifier graphs take the same inputs and produce `logits` [batch, 3] in
// the order recorded by the labels sidecar.

#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "fomc_absa/embedding.hpp"
#include "fomc_absa/sentiment.hpp"

namespace fomc_absa {

class LogitsClassifier {
 public:
  virtual ~LogitsClassifier() = default;
  virtual std::vector<Logits> logits(std::span<const TokenSequence> batch) const = 0;
};

// True when this build links ONNX Runtime.
bool model_backend_available();

// Throw ConfigError when the build lacks ONNX Runtime.
std::unique_ptr<EncoderBackend> load_onnx_encoder(const std::filesystem::path& path, TokenId pad_id);
std::unique_ptr<LogitsClassifier> load_onnx_classifier(const std::filesystem::path& path, TokenId pad_id);

// {"labels": ["positive", "negative", "neutral"]}; any other order is rejected.
void check_label_sidecar(const std::filesystem::path& path);

}  // namespace fomc_absa
