#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fomc_absa {

using TokenId = std::int64_t;

inline constexpr std::size_t kMaxSequenceLength = 512;
inline constexpr std::size_t kMaxContentTokens = kMaxSequenceLength - 2;

// [CLS] content... [SEP], unpadded. Padding is the backend's business.
struct TokenSequence {
  std::vector<TokenId> ids;
  std::string original_text;
  bool truncated = false;

  std::size_t attention_length() const { return ids.size(); }
  std::size_t content_length() const { return ids.size() - 2; }
};

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;

  // Throws EmbeddingError("empty input") for text without any token.
  virtual TokenSequence tokenize(std::string_view text) const = 0;
  virtual TokenId cls_id() const = 0;
  virtual TokenId sep_id() const = 0;
  virtual TokenId pad_id() const = 0;
};

// BERT-style (uncased) pre-tokenization: lowercase, strip Latin-1 accents,
// drop control and zero-width characters, split on whitespace, and make
// every punctuation character its own word.
std::vector<std::string> basic_tokenize(std::string_view text);

// WordPiece vocabulary: line number is the token id.
class Vocabulary {
 public:
  explicit Vocabulary(std::vector<std::string> tokens);
  static Vocabulary load(const std::filesystem::path& path);

  bool contains(std::string_view token) const;
  TokenId id(std::string_view token) const;  // throws std::out_of_range
  const std::string& token(TokenId id) const;
  std::size_t size() const { return tokens_.size(); }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

// Greedy longest-match-first WordPiece. A word with no complete segmentation
// becomes a single [UNK], as do words longer than 100 bytes.
class WordPieceTokenizer final : public Tokenizer {
 public:
  // Throws InputError unless [CLS], [SEP], [UNK] and [PAD] are present.
  explicit WordPieceTokenizer(Vocabulary vocab);

  TokenSequence tokenize(std::string_view text) const override;
  std::vector<TokenId> wordpiece(std::string_view word) const;

  TokenId cls_id() const override { return cls_; }
  TokenId sep_id() const override { return sep_; }
  TokenId pad_id() const override { return pad_; }
  TokenId unk_id() const { return unk_; }
  const Vocabulary& vocab() const { return vocab_; }

 private:
  Vocabulary vocab_;
  TokenId cls_, sep_, unk_, pad_;
};

// Vocabulary-free tokenizer for the stub backend: each pre-token gets an id
// derived from its hash, so equal words share an id. Uses BERT's special ids.
class HashingTokenizer final : public Tokenizer {
 public:
  static constexpr TokenId kPad = 0, kUnk = 100, kCls = 101, kSep = 102;
  static constexpr TokenId kFirstWordId = 1000;

  TokenSequence tokenize(std::string_view text) const override;
  TokenId cls_id() const override { return kCls; }
  TokenId sep_id() const override { return kSep; }
  TokenId pad_id() const override { return kPad; }
};

}  // namespace fomc_absa
