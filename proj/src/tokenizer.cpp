#include "fomc_absa/tokenizer.hpp"

#include <stdexcept>
#include <utility>

#include "fomc_absa/error.hpp"
#include "fomc_absa/text.hpp"

namespace fomc_absa {
namespace {

constexpr std::size_t kMaxWordBytes = 100;

// Returns the code point at text[i] and its byte length. Invalid sequences
// decode as U+FFFD, one byte at a time.
std::pair<char32_t, std::size_t> decode_utf8(std::string_view text, std::size_t i) {
  auto b = [&](std::size_t k) { return static_cast<unsigned char>(text[i + k]); };
  unsigned char c = b(0);
  if (c < 0x80) return {c, 1};
  std::size_t len = c >= 0xF0 ? 4 : c >= 0xE0 ? 3 : c >= 0xC0 ? 2 : 0;
  if (len == 0 || i + len > text.size()) return {0xFFFD, 1};
  char32_t cp = c & (0x7F >> len);
  for (std::size_t k = 1; k < len; ++k) {
    if ((b(k) & 0xC0) != 0x80) return {0xFFFD, 1};
    cp = (cp << 6) | (b(k) & 0x3F);
  }
  return {cp, len};
}

bool is_unicode_space(char32_t cp) {
  return cp == 0xA0 || cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x202F || cp == 0x205F ||
         cp == 0x3000;
}

bool is_format_char(char32_t cp) {
  return (cp >= 0x80 && cp <= 0x9F) || cp == 0xAD || (cp >= 0x200B && cp <= 0x200F) ||
         (cp >= 0x202A && cp <= 0x202E) || (cp >= 0x2060 && cp <= 0x2064) || cp == 0xFEFF;
}

// All ASCII symbols count, as in BERT; beyond ASCII only the common
// punctuation blocks.
bool is_punctuation(char32_t cp) {
  if (cp < 128) return (cp >= 33 && cp <= 47) || (cp >= 58 && cp <= 64) || (cp >= 91 && cp <= 96) || (cp >= 123 && cp <= 126);
  switch (cp) {
    case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
      return true;
    default:
      return (cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205E) || (cp >= 0x3001 && cp <= 0x3003);
  }
}

// Lowercase and strip diacritics for U+00C0..U+00FF. Letters without a
// decomposition (æ, ð, ø, þ, ß) and the two operators pass through lowercased.
std::string fold_latin1(char32_t cp) {
  static constexpr std::string_view kBase = "aaaaaa?ceeeeiiii?nooooo??uuuuy??aaaaaa?ceeeeiiii?nooooo??uuuuy?y";
  char base = kBase[cp - 0xC0];
  if (base != '?') return std::string(1, base);
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) cp += 0x20;
  std::string out(2, '\0');
  out[0] = static_cast<char>(0xC0 | (cp >> 6));
  out[1] = static_cast<char>(0x80 | (cp & 0x3F));
  return out;
}

TokenSequence frame(std::vector<TokenId> content, TokenId cls, TokenId sep, std::string_view text) {
  if (content.empty()) throw EmbeddingError("empty input");
  TokenSequence seq;
  seq.original_text = std::string(text);
  if (content.size() > kMaxContentTokens) {
    content.resize(kMaxContentTokens);
    seq.truncated = true;
  }
  seq.ids.reserve(content.size() + 2);
  seq.ids.push_back(cls);
  seq.ids.insert(seq.ids.end(), content.begin(), content.end());
  seq.ids.push_back(sep);
  return seq;
}

}  // namespace

std::vector<std::string> basic_tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    auto [cp, len] = decode_utf8(text, i);
    auto raw = text.substr(i, len);
    i += len;
    if (is_space(raw.front()) || is_unicode_space(cp)) {
      flush();
    } else if (cp == 0 || cp == 0xFFFD || cp < 32 || cp == 127 || is_format_char(cp)) {
      continue;
    } else if (is_punctuation(cp)) {
      flush();
      out.emplace_back(raw);
    } else if (cp < 128) {
      char c = raw.front();
      current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c + 32) : c);
    } else if (cp >= 0xC0 && cp <= 0xFF) {
      current.append(fold_latin1(cp));
    } else {
      current.append(raw);
    }
  }
  flush();
  return out;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  ids_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    // First occurrence wins, as in the reference loaders.
    ids_.emplace(tokens_[i], static_cast<TokenId>(i));
  }
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  auto content = read_file(path);
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start < content.size()) {
    auto end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    std::string line = content.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(std::move(line));
    start = end + 1;
  }
  return Vocabulary(std::move(tokens));
}

bool Vocabulary::contains(std::string_view token) const { return ids_.count(std::string(token)) > 0; }

TokenId Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end()) throw std::out_of_range("token not in vocabulary: " + std::string(token));
  return it->second;
}

const std::string& Vocabulary::token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }

WordPieceTokenizer::WordPieceTokenizer(Vocabulary vocab) : vocab_(std::move(vocab)) {
  for (const char* special : {"[CLS]", "[SEP]", "[UNK]", "[PAD]"}) {
    if (!vocab_.contains(special)) throw InputError(std::string("vocabulary lacks ") + special);
  }
  cls_ = vocab_.id("[CLS]");
  sep_ = vocab_.id("[SEP]");
  unk_ = vocab_.id("[UNK]");
  pad_ = vocab_.id("[PAD]");
}

std::vector<TokenId> WordPieceTokenizer::wordpiece(std::string_view word) const {
  if (word.size() > kMaxWordBytes) return {unk_};
  std::vector<TokenId> pieces;
  std::size_t start = 0;
  std::string candidate;
  while (start < word.size()) {
    std::size_t end = word.size();
    TokenId found = -1;
    while (end > start) {
      candidate.assign(start > 0 ? "##" : "");
      candidate.append(word.substr(start, end - start));
      if (vocab_.contains(candidate)) {
        found = vocab_.id(candidate);
        break;
      }
      --end;
    }
    if (found < 0) return {unk_};
    pieces.push_back(found);
    start = end;
  }
  return pieces;
}

TokenSequence WordPieceTokenizer::tokenize(std::string_view text) const {
  std::vector<TokenId> content;
  for (const auto& word : basic_tokenize(text)) {
    auto pieces = wordpiece(word);
    content.insert(content.end(), pieces.begin(), pieces.end());
    if (content.size() > kMaxContentTokens) break;
  }
  return frame(std::move(content), cls_, sep_, text);
}

TokenSequence HashingTokenizer::tokenize(std::string_view text) const {
  std::vector<TokenId> content;
  for (const auto& word : basic_tokenize(text)) {
    content.push_back(kFirstWordId + static_cast<TokenId>(fnv1a64(word) >> 24));
    if (content.size() > kMaxContentTokens) break;
  }
  return frame(std::move(content), kCls, kSep, text);
}

}  // namespace fomc_absa
