// fomc-absa: command-line driver for the minutes sentiment pipeline.
//
//   fomc-absa run-all --corpus-dir minutes/ --backend stub -o out/
//   fomc-absa regress --series out/series.csv --macro gdp.csv --indicator gdp_growth --aspect growth

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fomc_absa/error.hpp"
#include "fomc_absa/pipeline.hpp"

namespace {

using fomc_absa::Stage;

struct Overrides {
  std::string config;
  std::string corpus_dir, blacklist_path, encoder_path, classifier_path, labels_path, vocab_path, anchors_path,
      head_path, cache_path, series_path, output_dir, pooling, backend;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::size_t batch_size = 16, stub_dim = 64;
  double min_cos = 0.0;
  int lead = 0;
  std::string macro, indicator, aspect;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aspect-based sentiment indices from central bank minutes, regressed on macro indicators"};
  app.set_version_flag("--version", std::string("fomc-absa ") + FOMC_ABSA_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  auto* config_opt = app.add_option("--config", o.config, "JSON config file; flags override its fields");
  auto* corpus_opt = app.add_option("--corpus-dir,--corpus_dir", o.corpus_dir, "directory of <doc_id>__<date>.txt");
  auto* blacklist_opt = app.add_option("--blacklist-path,--blacklist_path", o.blacklist_path, "boilerplate phrases");
  auto* encoder_opt = app.add_option("--encoder-path,--encoder_path", o.encoder_path, "encoder graph (model backend)");
  auto* classifier_opt =
      app.add_option("--classifier-path,--classifier_path", o.classifier_path, "classifier graph (model backend)");
  auto* labels_opt = app.add_option("--labels-path,--labels_path", o.labels_path, "labels sidecar JSON");
  auto* vocab_opt = app.add_option("--vocab-path,--vocab_path", o.vocab_path, "WordPiece vocabulary");
  auto* anchors_opt = app.add_option("--anchors-path,--anchors_path", o.anchors_path, "aspect anchor JSON");
  auto* head_opt = app.add_option("--head-path,--head_path", o.head_path, "dense sentiment head JSON");
  auto* cache_opt = app.add_option("--cache-path,--cache_path,--cache", o.cache_path, "precomputed embeddings JSONL");
  auto* output_opt = app.add_option("-o,--output-dir,--output_dir", o.output_dir, "artifact directory");
  auto* pooling_opt = app.add_option("--pooling", o.pooling, "sentence or word")->check(CLI::IsMember({"sentence", "word"}));
  auto* backend_opt = app.add_option("--backend,--backend-mode,--backend_mode", o.backend, "model, cache or stub")
                          ->check(CLI::IsMember({"model", "cache", "stub"}));
  auto* seed_opt = app.add_option("--seed", o.seed, "stub backend seed");
  auto* workers_opt = app.add_option("--workers", o.workers, "data-parallel workers")->check(CLI::PositiveNumber);
  auto* batch_opt = app.add_option("--batch-size,--batch_size", o.batch_size, "sequences per encoder call")
                        ->check(CLI::PositiveNumber);
  auto* dim_opt = app.add_option("--stub-dim,--stub_dim", o.stub_dim, "stub embedding dimension")->check(CLI::PositiveNumber);
  auto* min_cos_opt = app.add_option("--min-cos,--min_cos", o.min_cos, "leave sentences below this cosine unclassified");
  auto* lead_opt = app.add_option("--lead", o.lead, "months between sentiment and macro observation")
                       ->check(CLI::NonNegativeNumber);
  auto* svg_flag = app.add_flag("--svg", "emit scatter plots with the regression");
  auto* series_opt = app.add_option("--series,--series-path,--series_path", o.series_path, "series CSV to regress");
  auto* macro_opt = app.add_option("--macro", o.macro, "macro indicator CSV (date,value)");
  auto* indicator_opt = app.add_option("--indicator", o.indicator, "indicator name for --macro");
  auto* aspect_opt = app.add_option("--aspect", o.aspect, "aspect regressed against --macro");

  const std::pair<const char*, Stage> stages[] = {
      {"ingest", Stage::Ingest},       {"stats", Stage::Stats},
      {"embed", Stage::Embed},         {"aspects", Stage::Aspects},
      {"sentiment", Stage::Sentiment}, {"series", Stage::Series},
      {"regress", Stage::Regress},     {"compare-pooling", Stage::ComparePooling},
      {"run-all", Stage::RunAll}};
  const char* descriptions[] = {"segment and clean the corpus into sentences",
                                "corpus length statistics",
                                "sentence and [CLS] embeddings plus aspect anchors",
                                "assign each sentence an aspect by cosine similarity",
                                "classify sentence sentiment",
                                "monthly per-aspect net-tone series",
                                "OLS of macro indicators on sentiment series",
                                "aspect balance under sentence vs word pooling",
                                "ingest through series (and regress when configured)"};
  std::vector<std::pair<CLI::App*, Stage>> subcommands;
  for (std::size_t i = 0; i < std::size(stages); ++i) {
    subcommands.emplace_back(app.add_subcommand(stages[i].first, descriptions[i]), stages[i].second);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    fomc_absa::PipelineConfig config;
    if (*config_opt) config = fomc_absa::PipelineConfig::from_json_file(o.config);
    if (*corpus_opt) config.corpus_dir = o.corpus_dir;
    if (*blacklist_opt) config.blacklist_path = o.blacklist_path;
    if (*encoder_opt) config.encoder_path = o.encoder_path;
    if (*classifier_opt) config.classifier_path = o.classifier_path;
    if (*labels_opt) config.labels_path = o.labels_path;
    if (*vocab_opt) config.vocab_path = o.vocab_path;
    if (*anchors_opt) config.anchors_path = o.anchors_path;
    if (*head_opt) config.head_path = o.head_path;
    if (*cache_opt) config.cache_path = o.cache_path;
    if (*series_opt) config.series_path = o.series_path;
    if (*output_opt) config.output_dir = o.output_dir;
    if (*pooling_opt) config.pooling = o.pooling;
    if (*backend_opt) config.backend_mode = fomc_absa::parse_backend_mode(o.backend);
    if (*seed_opt) config.seed = o.seed;
    if (*workers_opt) config.workers = o.workers;
    if (*batch_opt) config.batch_size = o.batch_size;
    if (*dim_opt) config.stub_dim = o.stub_dim;
    if (*min_cos_opt) config.min_cos = o.min_cos;
    if (*lead_opt) config.lead = o.lead;
    if (*svg_flag) config.svg = true;
    if (*macro_opt) {
      if (!*aspect_opt) throw fomc_absa::ConfigError("--macro needs --aspect");
      std::string indicator = *indicator_opt ? o.indicator : std::filesystem::path(o.macro).stem().string();
      config.macro = {{o.aspect, indicator, o.macro}};
    } else if (*indicator_opt || *aspect_opt) {
      throw fomc_absa::ConfigError("--indicator/--aspect need --macro");
    }

    fomc_absa::Pipeline pipeline(std::move(config));
    for (const auto& [sub, stage] : subcommands) {
      if (sub->parsed()) pipeline.run(stage);
    }
  } catch (const fomc_absa::MissingArtifactError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
