#pragma once

// Weakly supervised aspect classification: each sentence goes to the aspect
// whose anchor embedding has the highest cosine similarity with it.

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fomc_absa/embedding.hpp"

namespace fomc_absa {

// Default closed label set; an anchor file may replace it.
const std::vector<std::string>& default_aspect_labels();

// Throws NumericError on zero norm or dimension mismatch. Result is clamped
// to [-1, 1].
double cosine_similarity(std::span<const double> u, std::span<const double> v);

struct AspectAnchor {
  std::string label;
  std::vector<std::string> seed_terms;
  SentenceEmbedding anchor;
};

struct AnchorSpec {
  std::string label;
  std::vector<std::string> seeds;
};

// [{"label": "inflation", "seeds": ["inflation"]}, ...]; labels must be unique
// and every seed list non-empty.
std::vector<AnchorSpec> load_anchor_specs(const std::filesystem::path& path);
std::vector<AnchorSpec> default_anchor_specs();

// Anchor = mean of the sentence embeddings of each seed term, every seed
// encoded as its own sequence.
AspectAnchor build_anchor(const std::string& label, const std::vector<std::string>& seed_terms,
                          const Tokenizer& tokenizer, const EncoderBackend& backend);
// Same, from seed embeddings already computed (e.g. read from a cache).
AspectAnchor anchor_from_embeddings(const std::string& label, const std::vector<std::string>& seed_terms,
                                    const std::vector<Vector>& seed_vectors);

struct AspectAssignment {
  std::string doc_id;
  std::size_t sent_index = 0;
  std::optional<std::string> label;  // nullopt: unclassified
  std::map<std::string, double> scores;

  bool classified() const { return label.has_value(); }
};

struct ClassifyOptions {
  // When set, sentences whose best score falls below it stay unclassified.
  std::optional<double> min_cos;
};

// Highest-cosine anchor wins; exact ties go to the lexicographically smallest
// label, so anchor order never matters. A zero-norm embedding yields an
// unclassified assignment with no scores.
AspectAssignment classify_aspect(const SentenceEmbedding& emb, std::span<const AspectAnchor> anchors,
                                 const ClassifyOptions& options = {});

// Word-level variant: score(label) is the max cosine over content-token rows.
AspectAssignment classify_aspect_wordlevel(const TokenEmbeddingMatrix& matrix, std::span<const AspectAnchor> anchors,
                                           const ClassifyOptions& options = {});

// Counts per label over classified assignments; every label in `labels`
// appears, possibly with zero.
std::map<std::string, std::size_t> aspect_distribution(std::span<const AspectAssignment> assignments,
                                                       std::span<const std::string> labels);

// Shannon entropy (natural log) of the normalized counts. Throws when the
// total is zero.
double distribution_entropy(const std::map<std::string, std::size_t>& counts);

struct PoolingComparison {
  std::map<std::string, std::size_t> counts_sentence;
  std::map<std::string, std::size_t> counts_word;
  double entropy_sentence = 0.0;
  double entropy_word = 0.0;
};

PoolingComparison compare_pooling(std::span<const AspectAssignment> sentence_level,
                                  std::span<const AspectAssignment> word_level, std::span<const std::string> labels);

std::string assignments_to_jsonl(std::span<const AspectAssignment> assignments);
std::vector<AspectAssignment> assignments_from_jsonl(std::string_view content);
std::string pooling_comparison_to_json(const PoolingComparison& comparison);

}  // namespace fomc_absa
