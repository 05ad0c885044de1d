#pragma once

// Stage orchestration with file-based handoffs. Every stage reads its inputs
// from the output directory, writes its artifact atomically, and produces
// byte-identical output for identical inputs regardless of worker count.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fomc_absa/aspect.hpp"
#include "fomc_absa/corpus.hpp"
#include "fomc_absa/embedding.hpp"
#include "fomc_absa/embedding_cache.hpp"
#include "fomc_absa/model_backend.hpp"
#include "fomc_absa/regression.hpp"
#include "fomc_absa/sentiment.hpp"

namespace fomc_absa {

enum class Stage { Ingest, Stats, Embed, Aspects, Sentiment, Series, Regress, ComparePooling, RunAll };

std::string_view stage_name(Stage stage);

enum class BackendMode { Model, Cache, Stub };

struct MacroSpec {
  std::string aspect;
  std::string indicator;
  std::filesystem::path path;
};

struct PipelineConfig {
  std::filesystem::path corpus_dir;
  std::filesystem::path blacklist_path;
  std::filesystem::path encoder_path;
  std::filesystem::path classifier_path;
  std::filesystem::path labels_path;
  std::filesystem::path vocab_path;
  std::filesystem::path anchors_path;
  std::filesystem::path head_path;   // dense head JSON for cache/stub sentiment
  std::filesystem::path cache_path;  // precomputed embeddings for cache mode
  std::filesystem::path series_path; // regress input override
  std::filesystem::path output_dir = "out";

  std::string pooling = "sentence";  // "sentence" or "word"
  BackendMode backend_mode = BackendMode::Stub;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::size_t batch_size = 16;
  std::size_t stub_dim = 64;
  std::optional<double> min_cos;
  int lead = 0;
  bool svg = false;
  std::vector<MacroSpec> macro;

  // Unknown keys are rejected. Relative paths resolve against the config
  // file's directory.
  static PipelineConfig from_json_file(const std::filesystem::path& path);
  // Throws ConfigError for values that are invalid for any stage.
  void validate() const;
};

BackendMode parse_backend_mode(std::string_view text);
std::string_view backend_mode_name(BackendMode mode);

namespace artifacts {
inline constexpr const char* kSentences = "sentences.jsonl";
inline constexpr const char* kCorpusStats = "corpus_stats.json";
inline constexpr const char* kEmbeddings = "embeddings.jsonl";
inline constexpr const char* kAspects = "aspects.jsonl";
inline constexpr const char* kSentiment = "sentiment.jsonl";
inline constexpr const char* kSeries = "series.csv";
inline constexpr const char* kRegressionJson = "regression.json";
inline constexpr const char* kRegressionText = "regression.txt";
inline constexpr const char* kPoolingComparison = "pooling_comparison.json";
}  // namespace artifacts

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config);
  ~Pipeline();

  void run(Stage stage);

  void ingest();
  void stats();
  void embed();
  void aspects();
  void sentiment();
  void series();
  void regress();
  void compare_pooling();
  void run_all();

  const PipelineConfig& config() const { return config_; }

  // Model mode normally loads encoder_path and classifier_path itself. These
  // supply the runtimes directly instead, e.g. from an embedding host language.
  void set_encoder(std::unique_ptr<EncoderBackend> encoder);
  void set_classifier(std::unique_ptr<LogitsClassifier> classifier);

 private:
  std::filesystem::path out(const char* name) const { return config_.output_dir / name; }
  std::string read_artifact(const char* name) const;
  const Tokenizer& tokenizer();
  const EncoderBackend& backend();
  std::vector<AnchorSpec> anchor_specs() const;
  std::vector<AspectAnchor> anchors_from_cache(const EmbeddingCache& cache) const;
  std::vector<TokenSequence> tokenize_all(const std::vector<Sentence>& sentences);
  unsigned effective_workers(const EncoderBackend& backend) const;
  void log(Stage stage, const std::string& message) const;

  PipelineConfig config_;
  std::unique_ptr<Tokenizer> tokenizer_;
  std::unique_ptr<EncoderBackend> backend_;
  std::unique_ptr<LogitsClassifier> classifier_;
};

}  // namespace fomc_absa
