#pragma once

// Sentence sentiment from a dense softmax head over the [CLS] state, and the
// net-tone aggregation to document and monthly per-aspect indices.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fomc_absa/aspect.hpp"
#include "fomc_absa/date.hpp"
#include "fomc_absa/embedding.hpp"

namespace fomc_absa {

// Class order is fixed; it doubles as the argmax tie-break order.
enum class SentimentLabel { Positive = 0, Negative = 1, Neutral = 2 };
inline constexpr std::size_t kNumSentimentClasses = 3;

std::string_view sentiment_name(SentimentLabel label);
SentimentLabel parse_sentiment(std::string_view name);

using Logits = std::array<double, kNumSentimentClasses>;
using Probs = std::array<double, kNumSentimentClasses>;

// Weights stored row-major, one row of `dim` per class.
struct DenseHead {
  std::size_t dim = 0;
  std::vector<double> weight;
  Logits bias{};

  Logits apply(std::span<const double> x) const;

  // {"weight": [[...], [...], [...]], "bias": [b0, b1, b2]}
  static DenseHead load_json(const std::filesystem::path& path);
  // Gaussian weights with a fixed scale, for model-free runs.
  static DenseHead stub(std::size_t dim, std::uint64_t seed);
};

// Stable softmax (max-shifted).
Probs softmax(const Logits& logits);

struct SentimentOutput {
  Probs probs{};
  SentimentLabel label = SentimentLabel::Neutral;
};

// Throws NumericError on non-finite logits.
SentimentOutput prediction_from_logits(const Logits& logits);
SentimentOutput classify_sentiment(const SentenceEmbedding& cls_vec, const DenseHead& head);

struct SentencePrediction {
  std::string doc_id;
  std::size_t sent_index = 0;
  Probs probs{};
  SentimentLabel label = SentimentLabel::Neutral;
};

struct AspectTone {
  double score = 0.0;  // (n_pos - n_neg) / n
  std::size_t n_positive = 0, n_negative = 0, n_neutral = 0;

  std::size_t n() const { return n_positive + n_negative + n_neutral; }
};

// Net tone per aspect for one document. Unclassified sentences are skipped;
// aspects with no sentences are absent. Throws InputError listing orphaned
// (doc_id, sent_index) keys when predictions and assignments do not join.
std::map<std::string, AspectTone> document_aspect_score(std::span<const SentencePrediction> preds,
                                                        std::span<const AspectAssignment> assigns,
                                                        const std::string& doc_id);

struct DocumentScores {
  std::string doc_id;
  Date date;
  std::map<std::string, AspectTone> tones;
};

struct SeriesRow {
  Month month;
  std::string aspect;
  double score = 0.0;
  std::size_t n_sentences = 0;

  bool operator==(const SeriesRow&) const = default;
};

// Monthly score = unweighted mean of that month's document scores; months
// without documents get no row. Rows ordered by (month, aspect).
std::vector<SeriesRow> build_series(std::span<const DocumentScores> documents);

// (month, score) pairs of one aspect, in month order.
std::vector<std::pair<Month, double>> series_for_aspect(std::span<const SeriesRow> rows, std::string_view aspect);

std::string predictions_to_jsonl(std::span<const SentencePrediction> preds);
std::vector<SentencePrediction> predictions_from_jsonl(std::string_view content);

// month,aspect,score,n_sentences
std::string series_to_csv(std::span<const SeriesRow> rows);
std::vector<SeriesRow> series_from_csv(std::string_view content);

}  // namespace fomc_absa
