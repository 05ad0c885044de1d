#include "fomc_absa/embedding.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fomc_absa/error.hpp"
#include "fomc_absa/text.hpp"

namespace fomc_absa {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Uniform in (0, 1].
double unit_open(std::uint64_t bits) { return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53; }

std::string provenance(const TokenSequence& seq) {
  constexpr std::size_t kMax = 80;
  if (seq.original_text.size() <= kMax) return "\"" + seq.original_text + "\"";
  return "\"" + seq.original_text.substr(0, kMax) + "...\"";
}

void check_finite(const Vector& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw EmbeddingError(std::string("non-finite value in ") + what);
  }
}

}  // namespace

std::string_view pooling_tag(Pooling pooling) {
  switch (pooling) {
    case Pooling::SentenceMean:
      return "sentence-mean";
    case Pooling::Word:
      return "word";
    case Pooling::Cls:
      return "cls";
  }
  return "unknown";
}

Pooling parse_pooling_tag(std::string_view tag) {
  if (tag == "sentence-mean") return Pooling::SentenceMean;
  if (tag == "word") return Pooling::Word;
  if (tag == "cls") return Pooling::Cls;
  throw InputError("unknown pooling tag: " + std::string(tag));
}

LayerStates::LayerStates(std::size_t layers, std::size_t tokens, std::size_t dim)
    : layers_(layers), tokens_(tokens), dim_(dim), data_(layers * tokens * dim, 0.0f) {}

std::span<float> LayerStates::row(std::size_t layer, std::size_t token) {
  return {data_.data() + (layer * tokens_ + token) * dim_, dim_};
}

std::span<const float> LayerStates::row(std::size_t layer, std::size_t token) const {
  return {data_.data() + (layer * tokens_ + token) * dim_, dim_};
}

SentenceEmbedding SentenceEmbedding::make(Vector vector, Pooling pooling) {
  double sq = 0.0;
  for (double x : vector) sq += x * x;
  return SentenceEmbedding{std::move(vector), pooling, std::sqrt(sq)};
}

SentenceEmbedding stub_embed(std::string_view text, std::size_t dim, std::uint64_t seed) {
  const std::uint64_t key = fnv1a64(text) ^ splitmix64(seed);
  Vector v(dim);
  // Box-Muller over consecutive counter pairs.
  for (std::size_t i = 0; i < dim; i += 2) {
    double u1 = unit_open(splitmix64(key + 2 * i));
    double u2 = unit_open(splitmix64(key + 2 * i + 1));
    double r = std::sqrt(-2.0 * std::log(u1));
    v[i] = r * std::cos(2.0 * std::numbers::pi * u2);
    if (i + 1 < dim) v[i + 1] = r * std::sin(2.0 * std::numbers::pi * u2);
  }
  double sq = 0.0;
  for (double x : v) sq += x * x;
  double norm = std::sqrt(sq);
  for (double& x : v) x /= norm;
  return SentenceEmbedding::make(std::move(v), Pooling::SentenceMean);
}

StubBackend::StubBackend(std::size_t dim, std::size_t layers, std::uint64_t seed)
    : dim_(dim), layers_(layers), seed_(seed) {
  if (dim == 0) throw ConfigError("stub dimension must be positive");
  if (layers < kPooledLayers) throw ConfigError("stub backend needs at least 4 layers");
}

LayerStates StubBackend::encode_one(const TokenSequence& seq) const {
  const std::size_t n = seq.ids.size();
  std::vector<Vector> base(n);
  Vector context(dim_, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    base[t] = stub_embed("token:" + std::to_string(seq.ids[t]), dim_, seed_).vector;
    if (t == 0 || t + 1 == n) continue;
    for (std::size_t k = 0; k < dim_; ++k) context[k] += base[t][k];
  }
  double sq = 0.0;
  for (double x : context) sq += x * x;
  if (sq > 0.0) {
    for (double& x : context) x /= std::sqrt(sq);
  }

  LayerStates states(layers_, n, dim_);
  for (std::size_t l = 0; l < layers_; ++l) {
    double mix = static_cast<double>(l + 1) / static_cast<double>(layers_);
    for (std::size_t t = 0; t < n; ++t) {
      // [CLS] drifts fully onto the sentence summary by the last layer.
      double share = t == 0 ? mix : 0.5 * mix;
      auto noise = stub_embed("token:" + std::to_string(seq.ids[t]) + "/layer:" + std::to_string(l), dim_, seed_);
      auto row = states.row(l, t);
      for (std::size_t k = 0; k < dim_; ++k) {
        row[k] = static_cast<float>((1.0 - share) * base[t][k] + 0.25 * noise.vector[k] + share * context[k]);
      }
    }
  }
  return states;
}

std::vector<LayerStates> StubBackend::encode(std::span<const TokenSequence> batch) const {
  std::vector<LayerStates> out;
  out.reserve(batch.size());
  for (const auto& seq : batch) out.push_back(encode_one(seq));
  return out;
}

FunctionBackend::FunctionBackend(std::size_t dim, EncodeFn fn, bool thread_safe)
    : dim_(dim), fn_(std::move(fn)), thread_safe_(thread_safe) {}

std::vector<LayerStates> FunctionBackend::encode(std::span<const TokenSequence> batch) const {
  return fn_(batch);
}

TokenEmbeddingMatrix word_embeddings_from_states(const LayerStates& states) {
  if (states.layers() < kPooledLayers) {
    throw EmbeddingError("backend returned " + std::to_string(states.layers()) + " layers, need at least 4");
  }
  TokenEmbeddingMatrix m;
  m.dim = states.dim();
  m.rows.assign(states.tokens(), Vector(states.dim(), 0.0));
  const std::size_t first = states.layers() - kPooledLayers;
  for (std::size_t t = 0; t < states.tokens(); ++t) {
    auto& row = m.rows[t];
    for (std::size_t l = first; l < states.layers(); ++l) {
      auto src = states.row(l, t);
      for (std::size_t k = 0; k < m.dim; ++k) row[k] += static_cast<double>(src[k]);
    }
    for (double& x : row) x /= static_cast<double>(kPooledLayers);
    check_finite(row, "word embeddings");
  }
  return m;
}

SentenceEmbedding pool_content_rows(const TokenEmbeddingMatrix& matrix) {
  if (matrix.rows.size() < 3) throw EmbeddingError("no content tokens");
  Vector mean(matrix.dim, 0.0);
  for (std::size_t t = 1; t + 1 < matrix.rows.size(); ++t) {
    for (std::size_t k = 0; k < matrix.dim; ++k) mean[k] += matrix.rows[t][k];
  }
  const auto n = static_cast<double>(matrix.rows.size() - 2);
  for (double& x : mean) x /= n;
  return SentenceEmbedding::make(std::move(mean), Pooling::SentenceMean);
}

SentenceEmbedding cls_from_states(const LayerStates& states) {
  if (states.layers() == 0 || states.tokens() == 0) throw EmbeddingError("empty encoder output");
  auto src = states.row(states.layers() - 1, 0);
  Vector v(src.begin(), src.end());
  check_finite(v, "[CLS] state");
  return SentenceEmbedding::make(std::move(v), Pooling::Cls);
}

namespace {

LayerStates encode_single(const TokenSequence& seq, const EncoderBackend& backend) {
  std::vector<LayerStates> out;
  try {
    out = backend.encode(std::span<const TokenSequence>(&seq, 1));
  } catch (const std::exception& e) {
    throw EmbeddingError("encoder failed on " + provenance(seq) + ": " + e.what());
  }
  if (out.size() != 1 || out[0].tokens() != seq.ids.size() || out[0].dim() != backend.hidden_size()) {
    throw EmbeddingError("encoder output shape mismatch on " + provenance(seq));
  }
  return std::move(out[0]);
}

}  // namespace

TokenEmbeddingMatrix word_embeddings(const TokenSequence& seq, const EncoderBackend& backend) {
  return word_embeddings_from_states(encode_single(seq, backend));
}

SentenceEmbedding sentence_embedding(const TokenSequence& seq, const EncoderBackend& backend) {
  return pool_content_rows(word_embeddings(seq, backend));
}

SentenceEmbedding cls_state(const TokenSequence& seq, const EncoderBackend& backend) {
  return cls_from_states(encode_single(seq, backend));
}

std::vector<SequenceEmbeddings> embed_batch(std::span<const TokenSequence> batch, const EncoderBackend& backend) {
  if (batch.empty()) return {};
  std::vector<LayerStates> states;
  try {
    states = backend.encode(batch);
  } catch (const std::exception& e) {
    throw EmbeddingError("encoder failed on batch starting with " + provenance(batch.front()) + ": " + e.what());
  }
  if (states.size() != batch.size()) throw EmbeddingError("encoder returned wrong batch size");
  std::vector<SequenceEmbeddings> out;
  out.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (states[i].tokens() != batch[i].ids.size() || states[i].dim() != backend.hidden_size()) {
      throw EmbeddingError("encoder output shape mismatch on " + provenance(batch[i]));
    }
    try {
      SequenceEmbeddings e;
      e.words = word_embeddings_from_states(states[i]);
      e.sentence = pool_content_rows(e.words);
      e.cls = cls_from_states(states[i]);
      out.push_back(std::move(e));
    } catch (const EmbeddingError& err) {
      throw EmbeddingError(std::string(err.what()) + " (sentence " + provenance(batch[i]) + ")");
    }
  }
  return out;
}

}  // namespace fomc_absa
