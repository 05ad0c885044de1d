#include "fomc_absa/embedding_cache.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "fomc_absa/error.hpp"

namespace fomc_absa {

void EmbeddingCache::put(CacheRecord record) {
  auto key = std::make_tuple(record.doc_id, record.sent_index, record.pooling);
  if (auto it = index_.find(key); it != index_.end()) {
    records_[it->second] = std::move(record);
    return;
  }
  index_.emplace(std::move(key), records_.size());
  records_.push_back(std::move(record));
}

const CacheRecord* EmbeddingCache::find(std::string_view doc_id, std::size_t sent_index, Pooling pooling) const {
  auto it = index_.find(std::make_tuple(std::string(doc_id), sent_index, pooling));
  return it == index_.end() ? nullptr : &records_[it->second];
}

std::vector<const CacheRecord*> EmbeddingCache::records_for(std::string_view doc_id, Pooling pooling) const {
  std::vector<const CacheRecord*> out;
  for (auto it = index_.lower_bound(std::make_tuple(std::string(doc_id), std::size_t{0}, Pooling::SentenceMean));
       it != index_.end() && std::get<0>(it->first) == doc_id; ++it) {
    if (std::get<2>(it->first) == pooling) out.push_back(&records_[it->second]);
  }
  return out;
}

std::string EmbeddingCache::to_jsonl() const {
  std::string out;
  for (const auto& r : records_) {
    nlohmann::ordered_json j;
    j["doc_id"] = r.doc_id;
    j["sent_index"] = r.sent_index;
    j["pooling"] = std::string(pooling_tag(r.pooling));
    j["vector"] = r.vector;
    out += j.dump();
    out += '\n';
  }
  return out;
}

EmbeddingCache EmbeddingCache::from_jsonl(std::string_view content) {
  EmbeddingCache cache;
  std::size_t start = 0, line_no = 0;
  std::size_t dim = 0;
  while (start < content.size()) {
    auto end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    auto line = content.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    CacheRecord r;
    try {
      auto j = nlohmann::json::parse(line);
      r.doc_id = j.at("doc_id").get<std::string>();
      r.sent_index = j.at("sent_index").get<std::size_t>();
      r.pooling = parse_pooling_tag(j.at("pooling").get<std::string>());
      r.vector = j.at("vector").get<Vector>();
    } catch (const std::exception& e) {
      throw InputError("embedding cache line " + std::to_string(line_no) + ": " + e.what());
    }
    if (r.vector.empty()) throw InputError("embedding cache line " + std::to_string(line_no) + ": empty vector");
    if (dim == 0) dim = r.vector.size();
    if (r.vector.size() != dim) {
      throw InputError("embedding cache line " + std::to_string(line_no) + ": dimension " +
                       std::to_string(r.vector.size()) + " differs from " + std::to_string(dim));
    }
    for (double x : r.vector) {
      if (!std::isfinite(x)) throw InputError("embedding cache line " + std::to_string(line_no) + ": non-finite value");
    }
    cache.put(std::move(r));
  }
  return cache;
}

}  // namespace fomc_absa
