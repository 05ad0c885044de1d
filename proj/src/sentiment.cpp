#include "fomc_absa/sentiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "fomc_absa/error.hpp"
#include "fomc_absa/text.hpp"

namespace fomc_absa {

std::string_view sentiment_name(SentimentLabel label) {
  switch (label) {
    case SentimentLabel::Positive:
      return "positive";
    case SentimentLabel::Negative:
      return "negative";
    case SentimentLabel::Neutral:
      return "neutral";
  }
  return "unknown";
}

SentimentLabel parse_sentiment(std::string_view name) {
  if (name == "positive") return SentimentLabel::Positive;
  if (name == "negative") return SentimentLabel::Negative;
  if (name == "neutral") return SentimentLabel::Neutral;
  throw InputError("unknown sentiment label: " + std::string(name));
}

Logits DenseHead::apply(std::span<const double> x) const {
  if (x.size() != dim) {
    throw NumericError("classifier head expects dimension " + std::to_string(dim) + ", got " + std::to_string(x.size()));
  }
  Logits out = bias;
  for (std::size_t c = 0; c < kNumSentimentClasses; ++c) {
    const double* w = weight.data() + c * dim;
    double acc = 0.0;
    for (std::size_t k = 0; k < dim; ++k) acc += w[k] * x[k];
    out[c] += acc;
  }
  return out;
}

DenseHead DenseHead::load_json(const std::filesystem::path& path) {
  DenseHead head;
  try {
    auto j = nlohmann::json::parse(read_file(path));
    auto rows = j.at("weight").get<std::vector<std::vector<double>>>();
    auto bias = j.at("bias").get<std::vector<double>>();
    if (rows.size() != kNumSentimentClasses || bias.size() != kNumSentimentClasses) {
      throw InputError("head must have exactly 3 weight rows and 3 biases");
    }
    head.dim = rows.front().size();
    if (head.dim == 0) throw InputError("empty weight rows");
    for (const auto& r : rows) {
      if (r.size() != head.dim) throw InputError("ragged weight rows");
      head.weight.insert(head.weight.end(), r.begin(), r.end());
    }
    std::copy(bias.begin(), bias.end(), head.bias.begin());
  } catch (const nlohmann::json::exception& e) {
    throw InputError("classifier head " + path.string() + ": " + e.what());
  }
  return head;
}

DenseHead DenseHead::stub(std::size_t dim, std::uint64_t seed) {
  constexpr double kScale = 2.0;
  DenseHead head;
  head.dim = dim;
  for (std::size_t c = 0; c < kNumSentimentClasses; ++c) {
    auto row = stub_embed("sentiment-head/" + std::to_string(c), dim, seed).vector;
    // stub_embed is unit-norm; rescale to roughly N(0, kScale^2) per entry.
    for (double& w : row) w *= kScale * std::sqrt(static_cast<double>(dim));
    head.weight.insert(head.weight.end(), row.begin(), row.end());
  }
  return head;
}

Probs softmax(const Logits& logits) {
  double m = *std::max_element(logits.begin(), logits.end());
  Probs p{};
  double total = 0.0;
  for (std::size_t c = 0; c < kNumSentimentClasses; ++c) {
    p[c] = std::exp(logits[c] - m);
    total += p[c];
  }
  for (double& x : p) x /= total;
  return p;
}

SentimentOutput prediction_from_logits(const Logits& logits) {
  for (double x : logits) {
    if (!std::isfinite(x)) throw NumericError("non-finite logits");
  }
  SentimentOutput out;
  out.probs = softmax(logits);
  std::size_t best = 0;
  for (std::size_t c = 1; c < kNumSentimentClasses; ++c) {
    if (out.probs[c] > out.probs[best]) best = c;
  }
  out.label = static_cast<SentimentLabel>(best);
  return out;
}

SentimentOutput classify_sentiment(const SentenceEmbedding& cls_vec, const DenseHead& head) {
  return prediction_from_logits(head.apply(cls_vec.vector));
}

std::map<std::string, AspectTone> document_aspect_score(std::span<const SentencePrediction> preds,
                                                        std::span<const AspectAssignment> assigns,
                                                        const std::string& doc_id) {
  std::map<std::size_t, const SentencePrediction*> by_index;
  for (const auto& p : preds) {
    if (p.doc_id == doc_id) by_index.emplace(p.sent_index, &p);
  }
  std::set<std::size_t> assigned;
  std::vector<std::size_t> orphans;
  std::map<std::string, AspectTone> tones;
  for (const auto& a : assigns) {
    if (a.doc_id != doc_id) continue;
    assigned.insert(a.sent_index);
    auto it = by_index.find(a.sent_index);
    if (it == by_index.end()) {
      orphans.push_back(a.sent_index);
      continue;
    }
    if (!a.label) continue;
    auto& tone = tones[*a.label];
    switch (it->second->label) {
      case SentimentLabel::Positive:
        ++tone.n_positive;
        break;
      case SentimentLabel::Negative:
        ++tone.n_negative;
        break;
      case SentimentLabel::Neutral:
        ++tone.n_neutral;
        break;
    }
  }
  for (const auto& [index, p] : by_index) {
    if (!assigned.count(index)) orphans.push_back(index);
  }
  if (!orphans.empty()) {
    std::sort(orphans.begin(), orphans.end());
    std::string msg = "unmatched predictions/assignments for " + doc_id + " at sent_index";
    for (std::size_t i = 0; i < orphans.size() && i < 10; ++i) msg += " " + std::to_string(orphans[i]);
    if (orphans.size() > 10) msg += " ...";
    throw InputError(msg);
  }
  for (auto& [label, tone] : tones) {
    tone.score = (static_cast<double>(tone.n_positive) - static_cast<double>(tone.n_negative)) /
                 static_cast<double>(tone.n());
  }
  return tones;
}

std::vector<SeriesRow> build_series(std::span<const DocumentScores> documents) {
  struct Acc {
    double sum = 0.0;
    std::size_t docs = 0, sentences = 0;
  };
  std::map<std::pair<Month, std::string>, Acc> acc;
  for (const auto& doc : documents) {
    auto month = Month::of(doc.date);
    for (const auto& [aspect, tone] : doc.tones) {
      if (tone.n() == 0) continue;
      auto& a = acc[{month, aspect}];
      a.sum += tone.score;
      ++a.docs;
      a.sentences += tone.n();
    }
  }
  std::vector<SeriesRow> rows;
  rows.reserve(acc.size());
  for (const auto& [key, a] : acc) {
    rows.push_back(SeriesRow{key.first, key.second, a.sum / static_cast<double>(a.docs), a.sentences});
  }
  return rows;
}

std::vector<std::pair<Month, double>> series_for_aspect(std::span<const SeriesRow> rows, std::string_view aspect) {
  std::vector<std::pair<Month, double>> out;
  for (const auto& r : rows) {
    if (r.aspect == aspect) out.emplace_back(r.month, r.score);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string predictions_to_jsonl(std::span<const SentencePrediction> preds) {
  std::string out;
  for (const auto& p : preds) {
    nlohmann::ordered_json j;
    j["doc_id"] = p.doc_id;
    j["sent_index"] = p.sent_index;
    j["probs"] = p.probs;
    j["label"] = std::string(sentiment_name(p.label));
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<SentencePrediction> predictions_from_jsonl(std::string_view content) {
  std::vector<SentencePrediction> out;
  std::size_t start = 0, line_no = 0;
  while (start < content.size()) {
    auto end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    auto line = content.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      SentencePrediction p;
      p.doc_id = j.at("doc_id").get<std::string>();
      p.sent_index = j.at("sent_index").get<std::size_t>();
      p.probs = j.at("probs").get<Probs>();
      p.label = parse_sentiment(j.at("label").get<std::string>());
      out.push_back(std::move(p));
    } catch (const std::exception& e) {
      throw InputError("sentiment line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string series_to_csv(std::span<const SeriesRow> rows) {
  std::string out = "month,aspect,score,n_sentences\n";
  for (const auto& r : rows) {
    out += r.month.to_string() + "," + r.aspect + "," + format_double(r.score) + "," + std::to_string(r.n_sentences) +
           "\n";
  }
  return out;
}

std::vector<SeriesRow> series_from_csv(std::string_view content) {
  std::vector<SeriesRow> rows;
  std::size_t start = 0, line_no = 0;
  while (start < content.size()) {
    auto end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    auto line = content.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1) {
      if (line != "month,aspect,score,n_sentences") throw InputError("series CSV: unexpected header");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::size_t f = 0;
    for (;;) {
      auto comma = line.find(',', f);
      fields.push_back(line.substr(f, comma == std::string_view::npos ? std::string_view::npos : comma - f));
      if (comma == std::string_view::npos) break;
      f = comma + 1;
    }
    auto fail = [&] { throw InputError("series CSV line " + std::to_string(line_no) + ": malformed row"); };
    if (fields.size() != 4) fail();
    auto month = Month::parse(fields[0]);
    if (!month || fields[1].empty()) fail();
    SeriesRow row{*month, std::string(fields[1]), 0.0, 0};
    auto [p1, e1] = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), row.score);
    auto [p2, e2] = std::from_chars(fields[3].data(), fields[3].data() + fields[3].size(), row.n_sentences);
    if (e1 != std::errc() || p1 != fields[2].data() + fields[2].size() || e2 != std::errc() ||
        p2 != fields[3].data() + fields[3].size()) {
      fail();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace fomc_absa
