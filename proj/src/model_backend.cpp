#include "fomc_absa/model_backend.hpp"

#include <nlohmann/json.hpp>

#include "fomc_absa/error.hpp"
#include "fomc_absa/text.hpp"

namespace fomc_absa {

#ifndef FOMC_ABSA_HAVE_ONNXRUNTIME
namespace {
[[noreturn]] void unavailable() {
  throw ConfigError(
      "model backend unavailable: built without ONNX Runtime (configure with "
      "-DFOMC_ABSA_ONNXRUNTIME_ROOT=<prefix>), use --backend stub or cache, or run "
      "model mode from Python through fomc_absa.onnx");
}
}  // namespace

bool model_backend_available() { return false; }

std::unique_ptr<EncoderBackend> load_onnx_encoder(const std::filesystem::path&, TokenId) { unavailable(); }

std::unique_ptr<LogitsClassifier> load_onnx_classifier(const std::filesystem::path&, TokenId) { unavailable(); }
#endif

void check_label_sidecar(const std::filesystem::path& path) {
  std::vector<std::string> labels;
  try {
    labels = nlohmann::json::parse(read_file(path)).at("labels").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError("labels sidecar " + path.string() + ": " + e.what());
  }
  const std::vector<std::string> expected = {"positive", "negative", "neutral"};
  if (labels != expected) {
    throw ConfigError("labels sidecar " + path.string() + " must list positive, negative, neutral in that order");
  }
}

}  // namespace fomc_absa
