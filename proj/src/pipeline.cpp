#include "fomc_absa/pipeline.hpp"

#include <cmath>
#include <iostream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "fomc_absa/embedding_cache.hpp"
#include "fomc_absa/error.hpp"
#include "fomc_absa/parallel.hpp"
#include "fomc_absa/report.hpp"
#include "fomc_absa/text.hpp"

namespace fomc_absa {
namespace fs = std::filesystem;

namespace {

// Logit agreement required between the exported classifier graph and the
// [CLS] state multiplied through the dense head.
constexpr double kLogitParityTolerance = 1e-4;

std::string anchor_doc_id(const std::string& label) {
  return std::string(EmbeddingCache::kAnchorPrefix) + label;
}

struct BatchRange {
  std::size_t begin, end;
};

std::vector<BatchRange> make_batches(std::size_t n, std::size_t batch_size) {
  std::vector<BatchRange> out;
  for (std::size_t b = 0; b < n; b += batch_size) out.push_back({b, std::min(n, b + batch_size)});
  return out;
}

}  // namespace

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::Ingest: return "ingest";
    case Stage::Stats: return "stats";
    case Stage::Embed: return "embed";
    case Stage::Aspects: return "aspects";
    case Stage::Sentiment: return "sentiment";
    case Stage::Series: return "series";
    case Stage::Regress: return "regress";
    case Stage::ComparePooling: return "compare-pooling";
    case Stage::RunAll: return "run-all";
  }
  return "unknown";
}

BackendMode parse_backend_mode(std::string_view text) {
  if (text == "model") return BackendMode::Model;
  if (text == "cache") return BackendMode::Cache;
  if (text == "stub") return BackendMode::Stub;
  throw ConfigError("unknown backend mode '" + std::string(text) + "' (want model, cache or stub)");
}

std::string_view backend_mode_name(BackendMode mode) {
  switch (mode) {
    case BackendMode::Model: return "model";
    case BackendMode::Cache: return "cache";
    case BackendMode::Stub: return "stub";
  }
  return "unknown";
}

PipelineConfig PipelineConfig::from_json_file(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  PipelineConfig c;
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) -> fs::path {
    if (p.empty()) return {};
    fs::path q(p);
    return q.is_absolute() ? q : base / q;
  };
  try {
    auto j = nlohmann::json::parse(read_file(path));
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (key == "corpus_dir") c.corpus_dir = resolve(value.get<std::string>());
      else if (key == "blacklist_path") c.blacklist_path = resolve(value.get<std::string>());
      else if (key == "encoder_path") c.encoder_path = resolve(value.get<std::string>());
      else if (key == "classifier_path") c.classifier_path = resolve(value.get<std::string>());
      else if (key == "labels_path") c.labels_path = resolve(value.get<std::string>());
      else if (key == "vocab_path") c.vocab_path = resolve(value.get<std::string>());
      else if (key == "anchors_path") c.anchors_path = resolve(value.get<std::string>());
      else if (key == "head_path") c.head_path = resolve(value.get<std::string>());
      else if (key == "cache_path") c.cache_path = resolve(value.get<std::string>());
      else if (key == "series_path") c.series_path = resolve(value.get<std::string>());
      else if (key == "output_dir") c.output_dir = resolve(value.get<std::string>());
      else if (key == "pooling") c.pooling = value.get<std::string>();
      else if (key == "backend_mode") c.backend_mode = parse_backend_mode(value.get<std::string>());
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "workers") c.workers = value.get<unsigned>();
      else if (key == "batch_size") c.batch_size = value.get<std::size_t>();
      else if (key == "stub_dim") c.stub_dim = value.get<std::size_t>();
      else if (key == "min_cos") c.min_cos = value.is_null() ? std::nullopt : std::optional<double>(value.get<double>());
      else if (key == "lead") c.lead = value.get<int>();
      else if (key == "svg") c.svg = value.get<bool>();
      else if (key == "macro") {
        for (const auto& m : value) {
          c.macro.push_back(MacroSpec{m.at("aspect").get<std::string>(), m.at("indicator").get<std::string>(),
                                      resolve(m.at("path").get<std::string>())});
        }
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return c;
}

void PipelineConfig::validate() const {
  if (pooling != "sentence" && pooling != "word") throw ConfigError("pooling must be 'sentence' or 'word'");
  if (workers == 0) throw ConfigError("workers must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (stub_dim == 0) throw ConfigError("stub_dim must be positive");
  if (lead < 0) throw ConfigError("lead must be non-negative");
  if (min_cos && (*min_cos < -1.0 || *min_cos > 1.0)) throw ConfigError("min_cos must lie in [-1, 1]");
  if (output_dir.empty()) throw ConfigError("output_dir is required");
}

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)) { config_.validate(); }

Pipeline::~Pipeline() = default;

void Pipeline::log(Stage stage, const std::string& message) const {
  std::cerr << "[" << stage_name(stage) << "] " << message << "\n";
}

std::string Pipeline::read_artifact(const char* name) const {
  auto path = out(name);
  if (!fs::exists(path)) throw MissingArtifactError(path.string());
  return read_file(path);
}

const Tokenizer& Pipeline::tokenizer() {
  if (!tokenizer_) {
    if (!config_.vocab_path.empty()) {
      if (!fs::exists(config_.vocab_path)) throw ConfigError("vocabulary not found: " + config_.vocab_path.string());
      tokenizer_ = std::make_unique<WordPieceTokenizer>(Vocabulary::load(config_.vocab_path));
    } else if (config_.backend_mode == BackendMode::Model) {
      throw ConfigError("model backend requires vocab_path");
    } else {
      tokenizer_ = std::make_unique<HashingTokenizer>();
    }
  }
  return *tokenizer_;
}

void Pipeline::set_encoder(std::unique_ptr<EncoderBackend> encoder) {
  if (config_.backend_mode != BackendMode::Model) throw ConfigError("an external encoder needs the model backend");
  backend_ = std::move(encoder);
}

void Pipeline::set_classifier(std::unique_ptr<LogitsClassifier> classifier) {
  if (config_.backend_mode != BackendMode::Model) throw ConfigError("an external classifier needs the model backend");
  classifier_ = std::move(classifier);
}

const EncoderBackend& Pipeline::backend() {
  if (!backend_) {
    switch (config_.backend_mode) {
      case BackendMode::Stub:
        backend_ = std::make_unique<StubBackend>(config_.stub_dim, 6, config_.seed);
        break;
      case BackendMode::Model:
        if (config_.encoder_path.empty()) throw ConfigError("model backend requires encoder_path");
        backend_ = load_onnx_encoder(config_.encoder_path, tokenizer().pad_id());
        break;
      case BackendMode::Cache:
        throw ConfigError("this operation needs an encoder; the cache backend only serves precomputed vectors");
    }
  }
  return *backend_;
}

unsigned Pipeline::effective_workers(const EncoderBackend& b) const {
  return b.thread_safe() ? config_.workers : 1u;
}

std::vector<AnchorSpec> Pipeline::anchor_specs() const {
  return config_.anchors_path.empty() ? default_anchor_specs() : load_anchor_specs(config_.anchors_path);
}

std::vector<AspectAnchor> Pipeline::anchors_from_cache(const EmbeddingCache& cache) const {
  std::vector<AspectAnchor> anchors;
  for (const auto& spec : anchor_specs()) {
    std::vector<Vector> vectors;
    for (std::size_t i = 0; i < spec.seeds.size(); ++i) {
      const auto* rec = cache.find(anchor_doc_id(spec.label), i, Pooling::SentenceMean);
      if (!rec) throw InputError("embeddings lack anchor seed " + std::to_string(i) + " of '" + spec.label + "'");
      vectors.push_back(rec->vector);
    }
    anchors.push_back(anchor_from_embeddings(spec.label, spec.seeds, vectors));
  }
  return anchors;
}

std::vector<TokenSequence> Pipeline::tokenize_all(const std::vector<Sentence>& sentences) {
  const auto& tok = tokenizer();
  std::vector<TokenSequence> seqs(sentences.size());
  parallel_for(sentences.size(), config_.workers, [&](std::size_t i) { seqs[i] = tok.tokenize(sentences[i].text); });
  return seqs;
}

void Pipeline::run(Stage stage) {
  switch (stage) {
    case Stage::Ingest: return ingest();
    case Stage::Stats: return stats();
    case Stage::Embed: return embed();
    case Stage::Aspects: return aspects();
    case Stage::Sentiment: return sentiment();
    case Stage::Series: return series();
    case Stage::Regress: return regress();
    case Stage::ComparePooling: return compare_pooling();
    case Stage::RunAll: return run_all();
  }
}

void Pipeline::ingest() {
  if (config_.corpus_dir.empty()) throw ConfigError("corpus_dir is required");
  if (!fs::is_directory(config_.corpus_dir)) throw MissingArtifactError(config_.corpus_dir.string());
  auto blacklist = config_.blacklist_path.empty() ? Blacklist::defaults() : Blacklist::load(config_.blacklist_path);
  auto docs = load_corpus(config_.corpus_dir);
  auto sentences = ingest_corpus(docs, blacklist, config_.workers);
  write_file_atomic(out(artifacts::kSentences), sentences_to_jsonl(sentences));
  log(Stage::Ingest, std::to_string(docs.size()) + " documents, " + std::to_string(sentences.size()) + " sentences");
}

void Pipeline::stats() {
  if (config_.corpus_dir.empty()) throw ConfigError("corpus_dir is required");
  if (!fs::is_directory(config_.corpus_dir)) throw MissingArtifactError(config_.corpus_dir.string());
  auto sentences = sentences_from_jsonl(read_artifact(artifacts::kSentences));
  auto docs = load_corpus(config_.corpus_dir);
  write_file_atomic(out(artifacts::kCorpusStats), corpus_stats_to_json(corpus_stats(docs, sentences)));
}

void Pipeline::embed() {
  auto sentences = sentences_from_jsonl(read_artifact(artifacts::kSentences));
  auto specs = anchor_specs();
  EmbeddingCache result;

  if (config_.backend_mode == BackendMode::Cache) {
    if (config_.cache_path.empty()) throw ConfigError("cache backend requires cache_path");
    if (!fs::exists(config_.cache_path)) throw MissingArtifactError(config_.cache_path.string());
    auto cache = EmbeddingCache::from_jsonl(read_file(config_.cache_path));
    for (const auto& s : sentences) {
      const auto* rec = cache.find(s.doc_id, s.sent_index, Pooling::SentenceMean);
      if (!rec) {
        throw InputError("cache lacks a sentence-mean vector for " + s.doc_id + "#" + std::to_string(s.sent_index));
      }
      result.put(*rec);
      if (const auto* cls = cache.find(s.doc_id, s.sent_index, Pooling::Cls)) result.put(*cls);
    }
    for (const auto& spec : specs) {
      for (std::size_t i = 0; i < spec.seeds.size(); ++i) {
        const auto* rec = cache.find(anchor_doc_id(spec.label), i, Pooling::SentenceMean);
        if (!rec) throw InputError("cache lacks anchor seed " + std::to_string(i) + " of '" + spec.label + "'");
        result.put(*rec);
      }
    }
  } else {
    const auto& enc = backend();
    auto seqs = tokenize_all(sentences);
    auto batches = make_batches(seqs.size(), config_.batch_size);
    std::vector<SequenceEmbeddings> embedded(seqs.size());
    parallel_for(batches.size(), effective_workers(enc), [&](std::size_t b) {
      auto [begin, end] = batches[b];
      auto out = embed_batch(std::span(seqs).subspan(begin, end - begin), enc);
      std::move(out.begin(), out.end(), embedded.begin() + static_cast<std::ptrdiff_t>(begin));
    });
    std::size_t truncated = 0;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      truncated += seqs[i].truncated;
      result.put({sentences[i].doc_id, sentences[i].sent_index, Pooling::SentenceMean,
                  std::move(embedded[i].sentence.vector)});
      result.put({sentences[i].doc_id, sentences[i].sent_index, Pooling::Cls, std::move(embedded[i].cls.vector)});
    }
    if (truncated) log(Stage::Embed, std::to_string(truncated) + " sequences truncated to 512 tokens");
    for (const auto& spec : specs) {
      for (std::size_t i = 0; i < spec.seeds.size(); ++i) {
        auto emb = sentence_embedding(tokenizer().tokenize(spec.seeds[i]), enc);
        result.put({anchor_doc_id(spec.label), i, Pooling::SentenceMean, std::move(emb.vector)});
      }
    }
  }
  write_file_atomic(out(artifacts::kEmbeddings), result.to_jsonl());
  log(Stage::Embed, std::to_string(result.size()) + " vectors (" + std::string(backend_mode_name(config_.backend_mode)) +
                        " backend)");
}

void Pipeline::aspects() {
  auto sentences = sentences_from_jsonl(read_artifact(artifacts::kSentences));
  auto cache = EmbeddingCache::from_jsonl(read_artifact(artifacts::kEmbeddings));
  auto anchors = anchors_from_cache(cache);
  ClassifyOptions options{config_.min_cos};
  std::vector<AspectAssignment> assigns(sentences.size());

  if (config_.pooling == "sentence") {
    parallel_for(sentences.size(), config_.workers, [&](std::size_t i) {
      const auto& s = sentences[i];
      const auto* rec = cache.find(s.doc_id, s.sent_index, Pooling::SentenceMean);
      if (!rec) throw InputError("no embedding for " + s.doc_id + "#" + std::to_string(s.sent_index));
      assigns[i] = classify_aspect(SentenceEmbedding::make(rec->vector, Pooling::SentenceMean), anchors, options);
    });
  } else {
    const auto& enc = backend();
    auto seqs = tokenize_all(sentences);
    auto batches = make_batches(seqs.size(), config_.batch_size);
    parallel_for(batches.size(), effective_workers(enc), [&](std::size_t b) {
      auto [begin, end] = batches[b];
      auto embedded = embed_batch(std::span(seqs).subspan(begin, end - begin), enc);
      for (std::size_t i = begin; i < end; ++i) {
        assigns[i] = classify_aspect_wordlevel(embedded[i - begin].words, anchors, options);
      }
    });
  }
  std::size_t unclassified = 0;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    assigns[i].doc_id = sentences[i].doc_id;
    assigns[i].sent_index = sentences[i].sent_index;
    unclassified += !assigns[i].classified();
  }
  write_file_atomic(out(artifacts::kAspects), assignments_to_jsonl(assigns));
  std::string msg = std::to_string(sentences.size()) + " sentences, " + config_.pooling + " pooling";
  if (unclassified) msg += ", " + std::to_string(unclassified) + " unclassified";
  log(Stage::Aspects, msg);
}

void Pipeline::sentiment() {
  auto sentences = sentences_from_jsonl(read_artifact(artifacts::kSentences));
  std::vector<SentencePrediction> preds(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    preds[i].doc_id = sentences[i].doc_id;
    preds[i].sent_index = sentences[i].sent_index;
  }
  auto provenance = [&](std::size_t i) { return sentences[i].doc_id + "#" + std::to_string(sentences[i].sent_index); };

  if (config_.backend_mode == BackendMode::Model) {
    if (!classifier_ && config_.classifier_path.empty()) throw ConfigError("model backend requires classifier_path");
    if (!config_.labels_path.empty()) check_label_sidecar(config_.labels_path);
    if (!classifier_) classifier_ = load_onnx_classifier(config_.classifier_path, tokenizer().pad_id());
    const auto& classifier = classifier_;
    std::optional<DenseHead> head;
    if (!config_.head_path.empty()) head = DenseHead::load_json(config_.head_path);
    const EncoderBackend* enc = head ? &backend() : nullptr;
    auto seqs = tokenize_all(sentences);
    auto batches = make_batches(seqs.size(), config_.batch_size);
    parallel_for(batches.size(), config_.workers, [&](std::size_t b) {
      auto [begin, end] = batches[b];
      auto span = std::span(seqs).subspan(begin, end - begin);
      auto logits = classifier->logits(span);
      std::vector<SequenceEmbeddings> embedded;
      if (enc) embedded = embed_batch(span, *enc);
      for (std::size_t i = begin; i < end; ++i) {
        if (head) {
          auto check = head->apply(embedded[i - begin].cls.vector);
          for (std::size_t c = 0; c < kNumSentimentClasses; ++c) {
            if (std::fabs(check[c] - logits[i - begin][c]) > kLogitParityTolerance) {
              throw InputError("classifier graph and [CLS]+head disagree on " + provenance(i));
            }
          }
        }
        try {
          auto p = prediction_from_logits(logits[i - begin]);
          preds[i].probs = p.probs;
          preds[i].label = p.label;
        } catch (const NumericError& e) {
          throw NumericError(std::string(e.what()) + " for " + provenance(i));
        }
      }
    });
  } else {
    auto cache = EmbeddingCache::from_jsonl(read_artifact(artifacts::kEmbeddings));
    DenseHead head;
    if (!config_.head_path.empty()) {
      head = DenseHead::load_json(config_.head_path);
    } else if (config_.backend_mode == BackendMode::Stub) {
      const auto* any = sentences.empty() ? nullptr
                                          : cache.find(sentences[0].doc_id, sentences[0].sent_index, Pooling::Cls);
      head = DenseHead::stub(any ? any->vector.size() : config_.stub_dim, config_.seed);
    } else {
      throw ConfigError("cache backend requires head_path for sentiment");
    }
    parallel_for(sentences.size(), config_.workers, [&](std::size_t i) {
      const auto* rec = cache.find(sentences[i].doc_id, sentences[i].sent_index, Pooling::Cls);
      if (!rec) throw InputError("no [CLS] embedding for " + provenance(i));
      try {
        auto p = classify_sentiment(SentenceEmbedding::make(rec->vector, Pooling::Cls), head);
        preds[i].probs = p.probs;
        preds[i].label = p.label;
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " for " + provenance(i));
      }
    });
  }
  std::array<std::size_t, kNumSentimentClasses> counts{};
  for (const auto& p : preds) ++counts[static_cast<std::size_t>(p.label)];
  write_file_atomic(out(artifacts::kSentiment), predictions_to_jsonl(preds));
  log(Stage::Sentiment, std::to_string(counts[0]) + " positive, " + std::to_string(counts[1]) + " negative, " +
                            std::to_string(counts[2]) + " neutral");
}

void Pipeline::series() {
  auto sentences = sentences_from_jsonl(read_artifact(artifacts::kSentences));
  auto assigns = assignments_from_jsonl(read_artifact(artifacts::kAspects));
  auto preds = predictions_from_jsonl(read_artifact(artifacts::kSentiment));

  std::vector<DocumentScores> docs;
  std::map<std::string, std::size_t> doc_index;
  for (const auto& s : sentences) {
    if (doc_index.emplace(s.doc_id, docs.size()).second) docs.push_back({s.doc_id, s.date, {}});
  }
  std::vector<std::vector<AspectAssignment>> doc_assigns(docs.size());
  std::vector<std::vector<SentencePrediction>> doc_preds(docs.size());
  for (auto& a : assigns) {
    auto it = doc_index.find(a.doc_id);
    if (it == doc_index.end()) throw InputError("aspect assignment for unknown document " + a.doc_id);
    doc_assigns[it->second].push_back(std::move(a));
  }
  for (auto& p : preds) {
    auto it = doc_index.find(p.doc_id);
    if (it == doc_index.end()) throw InputError("sentiment prediction for unknown document " + p.doc_id);
    doc_preds[it->second].push_back(std::move(p));
  }
  for (std::size_t d = 0; d < docs.size(); ++d) {
    docs[d].tones = document_aspect_score(doc_preds[d], doc_assigns[d], docs[d].doc_id);
  }
  auto rows = build_series(docs);
  write_file_atomic(out(artifacts::kSeries), series_to_csv(rows));
  log(Stage::Series, std::to_string(rows.size()) + " month/aspect rows from " + std::to_string(docs.size()) +
                         " documents");
}

void Pipeline::regress() {
  if (config_.macro.empty()) throw ConfigError("no macro indicators configured (use --macro/--indicator/--aspect)");
  std::string content;
  if (config_.series_path.empty()) {
    content = read_artifact(artifacts::kSeries);
  } else {
    if (!fs::exists(config_.series_path)) throw MissingArtifactError(config_.series_path.string());
    content = read_file(config_.series_path);
  }
  auto rows = series_from_csv(content);
  std::vector<RegressionResult> results;
  for (const auto& spec : config_.macro) {
    if (!fs::exists(spec.path)) throw MissingArtifactError(spec.path.string());
    auto monthly = aggregate_monthly(load_macro_csv(spec.path, spec.indicator));
    auto sentiment = series_for_aspect(rows, spec.aspect);
    auto pairs = align(sentiment, monthly, config_.lead);
    auto r = ols_fit(pairs);
    r.indicator = spec.indicator;
    r.aspect = spec.aspect;
    r.lead = config_.lead;
    if (r.degenerate_response) log(Stage::Regress, "warning: " + spec.indicator + " is constant; R^2 reported as 0");
    if (config_.svg) {
      auto name = "regression_" + spec.aspect + "_" + spec.indicator + ".svg";
      write_file_atomic(config_.output_dir / name, regression_scatter_svg(pairs, r));
    }
    results.push_back(std::move(r));
  }
  write_file_atomic(out(artifacts::kRegressionJson), regression_report_json(results));
  write_file_atomic(out(artifacts::kRegressionText), regression_report_text(results));
  std::cout << regression_report_text(results);
}

void Pipeline::compare_pooling() {
  auto sentences = sentences_from_jsonl(read_artifact(artifacts::kSentences));
  if (sentences.empty()) throw InputError("empty corpus");
  auto cache = EmbeddingCache::from_jsonl(read_artifact(artifacts::kEmbeddings));
  auto anchors = anchors_from_cache(cache);
  const auto& enc = backend();
  auto seqs = tokenize_all(sentences);
  auto batches = make_batches(seqs.size(), config_.batch_size);
  std::vector<AspectAssignment> sentence_level(sentences.size()), word_level(sentences.size());
  parallel_for(batches.size(), effective_workers(enc), [&](std::size_t b) {
    auto [begin, end] = batches[b];
    auto embedded = embed_batch(std::span(seqs).subspan(begin, end - begin), enc);
    for (std::size_t i = begin; i < end; ++i) {
      sentence_level[i] = classify_aspect(embedded[i - begin].sentence, anchors);
      word_level[i] = classify_aspect_wordlevel(embedded[i - begin].words, anchors);
    }
  });
  std::vector<std::string> labels;
  for (const auto& a : anchors) labels.push_back(a.label);
  auto comparison = fomc_absa::compare_pooling(sentence_level, word_level, labels);
  write_file_atomic(out(artifacts::kPoolingComparison), pooling_comparison_to_json(comparison));
  log(Stage::ComparePooling, "entropy sentence=" + format_double(comparison.entropy_sentence) +
                                 " word=" + format_double(comparison.entropy_word));
}

void Pipeline::run_all() {
  ingest();
  stats();
  embed();
  aspects();
  sentiment();
  series();
  if (config_.macro.empty()) {
    log(Stage::RunAll, "no macro indicators configured; skipping regress");
  } else {
    regress();
  }
}

}  // namespace fomc_absa
