#pragma once

// Token- and sentence-level embeddings from a layered transformer encoder.
//
// Word embeddings are the per-token mean of the last four encoder layers.
// Sentence embeddings mean-pool those rows over content tokens only, so the
// [CLS] and [SEP] rows never enter the average. The classifier input is the
// final-layer state of the [CLS] position.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fomc_absa/tokenizer.hpp"

namespace fomc_absa {

using Vector = std::vector<double>;

inline constexpr std::size_t kPooledLayers = 4;

enum class Pooling { SentenceMean, Word, Cls };

std::string_view pooling_tag(Pooling pooling);  // "sentence-mean", "word", "cls"
Pooling parse_pooling_tag(std::string_view tag);

// Hidden states of one sequence, laid out [layer][token][dim], oldest layer first.
class LayerStates {
 public:
  LayerStates() = default;
  LayerStates(std::size_t layers, std::size_t tokens, std::size_t dim);

  std::size_t layers() const { return layers_; }
  std::size_t tokens() const { return tokens_; }
  std::size_t dim() const { return dim_; }

  std::span<float> row(std::size_t layer, std::size_t token);
  std::span<const float> row(std::size_t layer, std::size_t token) const;
  std::vector<float>& data() { return data_; }
  const std::vector<float>& data() const { return data_; }

 private:
  std::size_t layers_ = 0, tokens_ = 0, dim_ = 0;
  std::vector<float> data_;
};

struct TokenEmbeddingMatrix {
  std::size_t dim = 0;
  std::vector<Vector> rows;  // one per attended token, [CLS] and [SEP] included
  std::string pooling_source = "last4-mean";
};

struct SentenceEmbedding {
  Vector vector;
  Pooling pooling = Pooling::SentenceMean;
  double norm = 0.0;

  static SentenceEmbedding make(Vector vector, Pooling pooling);
};

class EncoderBackend {
 public:
  virtual ~EncoderBackend() = default;

  virtual std::size_t hidden_size() const = 0;

  // One LayerStates per input sequence with at least kPooledLayers layers,
  // covering exactly the sequence's attended tokens. Results must not depend
  // on which other sequences share the batch.
  virtual std::vector<LayerStates> encode(std::span<const TokenSequence> batch) const = 0;

  // False when encode() must not be called from several threads at once.
  virtual bool thread_safe() const { return true; }
};

// Deterministic encoder for tests and model-free runs. Each token id owns a
// pseudo-random base vector. Deeper layers blend in a per-layer perturbation
// and a growing share of the normalized mean content vector; the [CLS] row
// becomes that summary at the last layer. States depend only on the
// sequence itself, never on the rest of the batch.
class StubBackend final : public EncoderBackend {
 public:
  explicit StubBackend(std::size_t dim = 64, std::size_t layers = 6, std::uint64_t seed = 0);

  std::size_t hidden_size() const override { return dim_; }
  std::size_t num_layers() const { return layers_; }
  std::uint64_t seed() const { return seed_; }
  std::vector<LayerStates> encode(std::span<const TokenSequence> batch) const override;

 private:
  LayerStates encode_one(const TokenSequence& seq) const;

  std::size_t dim_, layers_;
  std::uint64_t seed_;
};

// Adapts an arbitrary callable, e.g. a Python-side runtime.
class FunctionBackend final : public EncoderBackend {
 public:
  using EncodeFn = std::function<std::vector<LayerStates>(std::span<const TokenSequence>)>;

  FunctionBackend(std::size_t dim, EncodeFn fn, bool thread_safe = false);

  std::size_t hidden_size() const override { return dim_; }
  std::vector<LayerStates> encode(std::span<const TokenSequence> batch) const override;
  bool thread_safe() const override { return thread_safe_; }

 private:
  std::size_t dim_;
  EncodeFn fn_;
  bool thread_safe_;
};

// Unit vector drawn from Gaussian components produced by a counter-based
// generator keyed on a 64-bit hash of `text` (mixed with `seed`).
SentenceEmbedding stub_embed(std::string_view text, std::size_t dim, std::uint64_t seed = 0);

TokenEmbeddingMatrix word_embeddings_from_states(const LayerStates& states);
// Mean over content rows, i.e. all rows but the first and the last.
SentenceEmbedding pool_content_rows(const TokenEmbeddingMatrix& matrix);
SentenceEmbedding cls_from_states(const LayerStates& states);

TokenEmbeddingMatrix word_embeddings(const TokenSequence& seq, const EncoderBackend& backend);
SentenceEmbedding sentence_embedding(const TokenSequence& seq, const EncoderBackend& backend);
SentenceEmbedding cls_state(const TokenSequence& seq, const EncoderBackend& backend);

struct SequenceEmbeddings {
  TokenEmbeddingMatrix words;
  SentenceEmbedding sentence;
  SentenceEmbedding cls;
};

// Encodes a batch in one backend call and derives all three views of each
// sequence. Backend failures are rethrown as EmbeddingError naming the
// first sentence of the batch.
std::vector<SequenceEmbeddings> embed_batch(std::span<const TokenSequence> batch, const EncoderBackend& backend);

}  // namespace fomc_absa
