#include "fomc_absa/aspect.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "fomc_absa/error.hpp"
#include "fomc_absa/text.hpp"

namespace fomc_absa {

const std::vector<std::string>& default_aspect_labels() {
  static const std::vector<std::string> kLabels = {"inflation", "growth", "employment"};
  return kLabels;
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw NumericError("dimension mismatch: " + std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  }
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (!(uu > 0.0) || !(vv > 0.0)) throw NumericError("degenerate vector");
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

std::vector<AnchorSpec> default_anchor_specs() {
  std::vector<AnchorSpec> specs;
  for (const auto& label : default_aspect_labels()) specs.push_back({label, {label}});
  return specs;
}

std::vector<AnchorSpec> load_anchor_specs(const std::filesystem::path& path) {
  std::vector<AnchorSpec> specs;
  std::set<std::string> seen;
  try {
    auto j = nlohmann::json::parse(read_file(path));
    for (const auto& entry : j) {
      AnchorSpec spec{entry.at("label").get<std::string>(), entry.at("seeds").get<std::vector<std::string>>()};
      if (spec.label.empty()) throw InputError("empty label");
      if (spec.seeds.empty()) throw InputError("label '" + spec.label + "' has no seeds");
      if (!seen.insert(spec.label).second) throw InputError("duplicate label '" + spec.label + "'");
      specs.push_back(std::move(spec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError("anchor file " + path.string() + ": " + e.what());
  }
  if (specs.empty()) throw InputError("anchor file " + path.string() + " defines no aspects");
  return specs;
}

AspectAnchor anchor_from_embeddings(const std::string& label, const std::vector<std::string>& seed_terms,
                                    const std::vector<Vector>& seed_vectors) {
  if (seed_vectors.empty()) throw InputError("aspect '" + label + "' needs at least one seed term");
  const std::size_t dim = seed_vectors.front().size();
  Vector mean(dim, 0.0);
  for (const auto& v : seed_vectors) {
    if (v.size() != dim) throw NumericError("seed embeddings disagree in dimension for '" + label + "'");
    for (std::size_t k = 0; k < dim; ++k) mean[k] += v[k];
  }
  for (double& x : mean) x /= static_cast<double>(seed_vectors.size());
  auto emb = SentenceEmbedding::make(std::move(mean), Pooling::SentenceMean);
  if (!(emb.norm > 0.0)) throw NumericError("anchor for '" + label + "' has zero norm");
  return AspectAnchor{label, seed_terms, std::move(emb)};
}

AspectAnchor build_anchor(const std::string& label, const std::vector<std::string>& seed_terms,
                          const Tokenizer& tokenizer, const EncoderBackend& backend) {
  std::vector<Vector> vectors;
  for (const auto& seed : seed_terms) {
    vectors.push_back(sentence_embedding(tokenizer.tokenize(seed), backend).vector);
  }
  return anchor_from_embeddings(label, seed_terms, vectors);
}

namespace {

std::vector<const AspectAnchor*> sorted_by_label(std::span<const AspectAnchor> anchors) {
  if (anchors.empty()) throw InputError("no aspect anchors");
  std::vector<const AspectAnchor*> order;
  for (const auto& a : anchors) order.push_back(&a);
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->label < b->label; });
  return order;
}

void pick_label(AspectAssignment& out, const std::vector<const AspectAnchor*>& order, const ClassifyOptions& options) {
  const std::string* best = nullptr;
  double best_score = -2.0;
  for (const auto* a : order) {
    double s = out.scores.at(a->label);
    if (s > best_score) {
      best_score = s;
      best = &a->label;
    }
  }
  if (best && (!options.min_cos || best_score >= *options.min_cos)) out.label = *best;
}

bool has_zero_norm(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

}  // namespace

AspectAssignment classify_aspect(const SentenceEmbedding& emb, std::span<const AspectAnchor> anchors,
                                 const ClassifyOptions& options) {
  auto order = sorted_by_label(anchors);
  AspectAssignment out;
  if (has_zero_norm(emb.vector)) return out;
  for (const auto* a : order) out.scores[a->label] = cosine_similarity(emb.vector, a->anchor.vector);
  pick_label(out, order, options);
  return out;
}

AspectAssignment classify_aspect_wordlevel(const TokenEmbeddingMatrix& matrix, std::span<const AspectAnchor> anchors,
                                           const ClassifyOptions& options) {
  auto order = sorted_by_label(anchors);
  if (matrix.rows.size() < 3) throw EmbeddingError("no content tokens");
  AspectAssignment out;
  bool any_row = false;
  for (std::size_t t = 1; t + 1 < matrix.rows.size(); ++t) {
    const auto& row = matrix.rows[t];
    if (has_zero_norm(row)) continue;
    for (const auto* a : order) {
      double s = cosine_similarity(row, a->anchor.vector);
      auto [it, inserted] = out.scores.emplace(a->label, s);
      if (!inserted) it->second = std::max(it->second, s);
    }
    any_row = true;
  }
  if (!any_row) return out;
  pick_label(out, order, options);
  return out;
}

std::map<std::string, std::size_t> aspect_distribution(std::span<const AspectAssignment> assignments,
                                                       std::span<const std::string> labels) {
  std::map<std::string, std::size_t> counts;
  for (const auto& l : labels) counts[l] = 0;
  for (const auto& a : assignments) {
    if (a.label) ++counts[*a.label];
  }
  return counts;
}

double distribution_entropy(const std::map<std::string, std::size_t>& counts) {
  std::size_t total = 0;
  for (const auto& [label, n] : counts) total += n;
  if (total == 0) throw InputError("empty corpus");
  double h = 0.0;
  for (const auto& [label, n] : counts) {
    if (n == 0) continue;
    double p = static_cast<double>(n) / static_cast<double>(total);
    h -= p * std::log(p);
  }
  return h;
}

PoolingComparison compare_pooling(std::span<const AspectAssignment> sentence_level,
                                  std::span<const AspectAssignment> word_level, std::span<const std::string> labels) {
  PoolingComparison c;
  c.counts_sentence = aspect_distribution(sentence_level, labels);
  c.counts_word = aspect_distribution(word_level, labels);
  c.entropy_sentence = distribution_entropy(c.counts_sentence);
  c.entropy_word = distribution_entropy(c.counts_word);
  return c;
}

std::string assignments_to_jsonl(std::span<const AspectAssignment> assignments) {
  std::string out;
  for (const auto& a : assignments) {
    nlohmann::ordered_json j;
    j["doc_id"] = a.doc_id;
    j["sent_index"] = a.sent_index;
    j["label"] = a.label ? nlohmann::ordered_json(*a.label) : nlohmann::ordered_json(nullptr);
    j["scores"] = nlohmann::ordered_json::object();
    for (const auto& [label, s] : a.scores) j["scores"][label] = s;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<AspectAssignment> assignments_from_jsonl(std::string_view content) {
  std::vector<AspectAssignment> out;
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
      AspectAssignment a;
      a.doc_id = j.at("doc_id").get<std::string>();
      a.sent_index = j.at("sent_index").get<std::size_t>();
      if (!j.at("label").is_null()) a.label = j.at("label").get<std::string>();
      a.scores = j.at("scores").get<std::map<std::string, double>>();
      out.push_back(std::move(a));
    } catch (const std::exception& e) {
      throw InputError("aspects line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string pooling_comparison_to_json(const PoolingComparison& c) {
  nlohmann::ordered_json j;
  j["entropy_sentence"] = c.entropy_sentence;
  j["entropy_word"] = c.entropy_word;
  j["counts_sentence"] = c.counts_sentence;
  j["counts_word"] = c.counts_word;
  return j.dump(2) + "\n";
}

}  // namespace fomc_absa
