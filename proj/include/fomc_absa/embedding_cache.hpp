#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "fomc_absa/embedding.hpp"

namespace fomc_absa {

struct CacheRecord {
  std::string doc_id;
  std::size_t sent_index = 0;
  Pooling pooling = Pooling::SentenceMean;
  Vector vector;
};

// Precomputed embeddings keyed by (doc_id, sent_index, pooling). Serialized as
// JSON Lines; doubles use shortest round-trip text, so a write/read cycle is
// bit-exact.
class EmbeddingCache {
 public:
  // Anchor seed embeddings live in the same file under this doc_id prefix.
  static constexpr std::string_view kAnchorPrefix = "@anchor/";

  void put(CacheRecord record);
  const CacheRecord* find(std::string_view doc_id, std::size_t sent_index, Pooling pooling) const;
  std::vector<const CacheRecord*> records_for(std::string_view doc_id, Pooling pooling) const;
  std::size_t size() const { return records_.size(); }

  // Records in insertion order.
  std::string to_jsonl() const;
  static EmbeddingCache from_jsonl(std::string_view content);

 private:
  std::vector<CacheRecord> records_;
  std::map<std::tuple<std::string, std::size_t, Pooling>, std::size_t, std::less<>> index_;
};

}  // namespace fomc_absa
