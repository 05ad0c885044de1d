#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fomc_absa/aspect.hpp"
#include "fomc_absa/corpus.hpp"
#include "fomc_absa/embedding.hpp"
#include "fomc_absa/error.hpp"
#include "fomc_absa/model_backend.hpp"
#include "fomc_absa/pipeline.hpp"
#include "fomc_absa/regression.hpp"
#include "fomc_absa/sentiment.hpp"
#include "fomc_absa/stats.hpp"
#include "fomc_absa/tokenizer.hpp"

namespace py = pybind11;
using namespace fomc_absa;

namespace {

using IdBatch = std::vector<std::vector<TokenId>>;

IdBatch ids_of(std::span<const TokenSequence> batch) {
  IdBatch out;
  out.reserve(batch.size());
  for (const auto& s : batch) out.push_back(s.ids);
  return out;
}

// The callable returns one float32 array of shape [layers, tokens, dim] per sequence.
std::vector<LayerStates> call_encoder(const py::function& fn, std::span<const TokenSequence> batch, std::size_t dim) {
  py::gil_scoped_acquire gil;
  py::list results = fn(ids_of(batch));
  if (results.size() != batch.size()) {
    throw EmbeddingError("encoder returned " + std::to_string(results.size()) + " results for a batch of " +
                         std::to_string(batch.size()));
  }
  std::vector<LayerStates> out;
  out.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto arr = py::array_t<float, py::array::c_style | py::array::forcecast>::ensure(results[i]);
    if (!arr || arr.ndim() != 3) throw EmbeddingError("encoder output must be a [layers, tokens, dim] array");
    auto layers = static_cast<std::size_t>(arr.shape(0)), tokens = static_cast<std::size_t>(arr.shape(1)),
         d = static_cast<std::size_t>(arr.shape(2));
    if (d != dim) throw EmbeddingError("encoder output dim " + std::to_string(d) + ", expected " + std::to_string(dim));
    LayerStates states(layers, tokens, d);
    std::copy(arr.data(), arr.data() + arr.size(), states.data().begin());
    out.push_back(std::move(states));
  }
  return out;
}

class PyClassifier final : public LogitsClassifier {
 public:
  explicit PyClassifier(py::function fn) : fn_(std::move(fn)) {}
  ~PyClassifier() override {
    py::gil_scoped_acquire gil;
    fn_ = py::function();
  }

  std::vector<Logits> logits(std::span<const TokenSequence> batch) const override {
    py::gil_scoped_acquire gil;
    auto arr = py::array_t<double, py::array::c_style | py::array::forcecast>::ensure(fn_(ids_of(batch)));
    if (!arr || arr.ndim() != 2 || static_cast<std::size_t>(arr.shape(0)) != batch.size() ||
        arr.shape(1) != static_cast<py::ssize_t>(kNumSentimentClasses)) {
      throw InputError("classifier output must be a [batch, 3] array");
    }
    std::vector<Logits> out(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      for (std::size_t c = 0; c < kNumSentimentClasses; ++c) out[i][c] = arr.at(i, c);
    }
    return out;
  }

 private:
  py::function fn_;
};

std::vector<AspectAnchor> anchors_of(const std::map<std::string, Vector>& anchors) {
  std::vector<AspectAnchor> out;
  for (const auto& [label, v] : anchors) out.push_back({label, {label}, SentenceEmbedding::make(v, Pooling::SentenceMean)});
  return out;
}

py::dict regression_dict(const RegressionResult& r) {
  py::dict d;
  d["indicator"] = r.indicator;
  d["aspect"] = r.aspect;
  d["lead"] = r.lead;
  d["n"] = r.n;
  d["alpha"] = r.alpha;
  d["beta"] = r.beta;
  d["se_alpha"] = r.se_alpha;
  d["se_beta"] = r.se_beta;
  d["t_beta"] = r.t_beta;
  d["p_beta"] = r.p_beta;
  d["r_squared"] = r.r_squared;
  d["degenerate_response"] = r.degenerate_response;
  return d;
}

// Unset paths read as None rather than as Path('.').
template <typename Class>
void path_field(Class& cls, const char* name, std::filesystem::path PipelineConfig::*field) {
  cls.def_property(
      name,
      [field](const PipelineConfig& c) -> std::optional<std::filesystem::path> {
        if ((c.*field).empty()) return std::nullopt;
        return c.*field;
      },
      [field](PipelineConfig& c, std::optional<std::filesystem::path> v) { c.*field = v.value_or(""); });
}

template <typename Fn>
auto without_gil(Fn fn) {
  return [fn](Pipeline& p) {
    py::gil_scoped_release release;
    (p.*fn)();
  };
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Aspect-based sentiment indices from policy meeting minutes";
  m.attr("__version__") = FOMC_ABSA_VERSION;

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<MissingArtifactError>(m, "MissingArtifactError", PyExc_FileNotFoundError);
  py::register_exception<EmbeddingError>(m, "EmbeddingError", PyExc_RuntimeError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.attr("MIN_SENTENCE_WORDS") = kMinSentenceWords;
  m.attr("MAX_SENTENCE_WORDS") = kMaxSentenceWords;
  m.attr("SENTIMENT_LABELS") = py::make_tuple("positive", "negative", "neutral");

  m.def("model_backend_available", &model_backend_available);

  // Corpus
  m.def("segment_document", [](std::string_view text) { return segment_document(text); }, py::arg("text"));
  m.def(
      "preprocess_sentence",
      [](std::string_view raw, std::optional<std::vector<std::string>> blacklist) -> std::optional<std::string> {
        auto bl = blacklist ? Blacklist(*blacklist) : Blacklist::defaults();
        auto s = preprocess_sentence(raw, bl);
        if (!s) return std::nullopt;
        return s->text;
      },
      py::arg("raw"), py::arg("blacklist") = py::none(),
      "Cleaned sentence, or None when a rule drops it. `blacklist` replaces the default phrase list.");

  // Tokenization
  m.def("basic_tokenize", [](std::string_view text) { return basic_tokenize(text); }, py::arg("text"));
  py::class_<WordPieceTokenizer>(m, "WordPieceTokenizer")
      .def(py::init([](const std::filesystem::path& vocab) { return WordPieceTokenizer(Vocabulary::load(vocab)); }),
           py::arg("vocab_path"))
      .def("tokenize", [](const WordPieceTokenizer& t, std::string_view text) { return t.tokenize(text).ids; },
           py::arg("text"))
      .def("wordpiece", &WordPieceTokenizer::wordpiece, py::arg("word"))
      .def_property_readonly("cls_id", &WordPieceTokenizer::cls_id)
      .def_property_readonly("sep_id", &WordPieceTokenizer::sep_id)
      .def_property_readonly("pad_id", &WordPieceTokenizer::pad_id)
      .def_property_readonly("unk_id", &WordPieceTokenizer::unk_id)
      .def_property_readonly("vocab_size", [](const WordPieceTokenizer& t) { return t.vocab().size(); });

  // Aspects
  m.def(
      "cosine_similarity", [](const Vector& u, const Vector& v) { return cosine_similarity(u, v); }, py::arg("u"),
      py::arg("v"));
  m.def(
      "classify_aspect",
      [](const Vector& embedding, const std::map<std::string, Vector>& anchors, std::optional<double> min_cos) {
        auto a = anchors_of(anchors);
        auto r = classify_aspect(SentenceEmbedding::make(embedding, Pooling::SentenceMean), a, {min_cos});
        return std::make_pair(r.label, r.scores);
      },
      py::arg("embedding"), py::arg("anchors"), py::arg("min_cos") = py::none(),
      "(label or None, {label: cosine}) for an embedding against {label: anchor vector}.");
  m.def(
      "distribution_entropy",
      [](const std::map<std::string, std::size_t>& counts) { return distribution_entropy(counts); },
      py::arg("counts"));

  // Sentiment
  m.def("softmax", [](const Logits& l) { return softmax(l); }, py::arg("logits"));
  m.def(
      "predict_sentiment",
      [](const Logits& l) {
        auto p = prediction_from_logits(l);
        return std::make_pair(p.probs, std::string(sentiment_name(p.label)));
      },
      py::arg("logits"));

  // Statistics
  m.def(
      "ols_fit",
      [](const std::vector<double>& x, const std::vector<double>& y) { return regression_dict(ols_fit(x, y)); },
      py::arg("x"), py::arg("y"));
  m.def("student_t_two_sided_p", &student_t_two_sided_p, py::arg("t"), py::arg("df"));
  m.def("student_t_cdf", &student_t_cdf, py::arg("t"), py::arg("df"));

  // Pipeline
  py::class_<MacroSpec>(m, "MacroSpec")
      .def(py::init([](std::string aspect, std::string indicator, std::filesystem::path path) {
             return MacroSpec{std::move(aspect), std::move(indicator), std::move(path)};
           }),
           py::arg("aspect"), py::arg("indicator"), py::arg("path"))
      .def_readwrite("aspect", &MacroSpec::aspect)
      .def_readwrite("indicator", &MacroSpec::indicator)
      .def_readwrite("path", &MacroSpec::path);

  py::class_<PipelineConfig> config(m, "PipelineConfig");
  config.def(py::init<>())
      .def_static("from_json_file", &PipelineConfig::from_json_file, py::arg("path"))
      .def("validate", &PipelineConfig::validate)
      .def_readwrite("pooling", &PipelineConfig::pooling)
      .def_property(
          "backend",
          [](const PipelineConfig& c) { return std::string(backend_mode_name(c.backend_mode)); },
          [](PipelineConfig& c, std::string_view v) { c.backend_mode = parse_backend_mode(v); })
      .def_readwrite("seed", &PipelineConfig::seed)
      .def_readwrite("workers", &PipelineConfig::workers)
      .def_readwrite("batch_size", &PipelineConfig::batch_size)
      .def_readwrite("stub_dim", &PipelineConfig::stub_dim)
      .def_readwrite("min_cos", &PipelineConfig::min_cos)
      .def_readwrite("lead", &PipelineConfig::lead)
      .def_readwrite("svg", &PipelineConfig::svg)
      .def_readwrite("macro", &PipelineConfig::macro);
  path_field(config, "corpus_dir", &PipelineConfig::corpus_dir);
  path_field(config, "blacklist_path", &PipelineConfig::blacklist_path);
  path_field(config, "encoder_path", &PipelineConfig::encoder_path);
  path_field(config, "classifier_path", &PipelineConfig::classifier_path);
  path_field(config, "labels_path", &PipelineConfig::labels_path);
  path_field(config, "vocab_path", &PipelineConfig::vocab_path);
  path_field(config, "anchors_path", &PipelineConfig::anchors_path);
  path_field(config, "head_path", &PipelineConfig::head_path);
  path_field(config, "cache_path", &PipelineConfig::cache_path);
  path_field(config, "series_path", &PipelineConfig::series_path);
  path_field(config, "output_dir", &PipelineConfig::output_dir);

  py::class_<Pipeline>(m, "Pipeline")
      .def(py::init<PipelineConfig>(), py::arg("config"))
      .def_property_readonly("config", &Pipeline::config)
      .def(
          "set_encoder",
          [](Pipeline& p, py::function fn, std::size_t hidden_size) {
            // Keep the callable alive for as long as the backend, dropping it under the GIL.
            auto holder = std::shared_ptr<py::function>(new py::function(std::move(fn)), [](py::function* f) {
              py::gil_scoped_acquire gil;
              delete f;
            });
            p.set_encoder(std::make_unique<FunctionBackend>(
                hidden_size,
                [holder, hidden_size](std::span<const TokenSequence> b) { return call_encoder(*holder, b, hidden_size); },
                false));
          },
          py::arg("encode"), py::arg("hidden_size"),
          "Model-mode encoder: encode(list of id lists) -> list of float32 [layers, tokens, dim] arrays.")
      .def(
          "set_classifier",
          [](Pipeline& p, py::function fn) { p.set_classifier(std::make_unique<PyClassifier>(std::move(fn))); },
          py::arg("logits"), "Model-mode classifier: logits(list of id lists) -> [batch, 3] array.")
      .def("ingest", without_gil(&Pipeline::ingest))
      .def("stats", without_gil(&Pipeline::stats))
      .def("embed", without_gil(&Pipeline::embed))
      .def("aspects", without_gil(&Pipeline::aspects))
      .def("sentiment", without_gil(&Pipeline::sentiment))
      .def("series", without_gil(&Pipeline::series))
      .def("regress", without_gil(&Pipeline::regress))
      .def("compare_pooling", without_gil(&Pipeline::compare_pooling))
      .def("run_all", without_gil(&Pipeline::run_all));
}
