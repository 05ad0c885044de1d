// Acceptance suite: one PASS/FAIL/SKIP line per criterion, nonzero exit if
// any criterion fails. Each criterion also has a wall-clock budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "fomc_absa/aspect.hpp"
#include "fomc_absa/corpus.hpp"
#include "fomc_absa/error.hpp"
#include "fomc_absa/model_backend.hpp"
#include "fomc_absa/pipeline.hpp"
#include "fomc_absa/regression.hpp"
#include "fomc_absa/stats.hpp"
#include "fomc_absa/text.hpp"
#include "oracles.hpp"

using namespace fomc_absa;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  enum Kind { Pass, Fail, Skip } kind = Pass;
  std::string detail;
};

Outcome fail(std::string why) { return {Outcome::Fail, std::move(why)}; }
Outcome skip(std::string why) { return {Outcome::Skip, std::move(why)}; }

int failures = 0;

void criterion(const char* name, double budget_s, const std::function<Outcome()>& body) {
  auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = fail(std::string("exception: ") + e.what());
  }
  double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (out.kind == Outcome::Pass && elapsed > budget_s) {
    out = fail("took " + std::to_string(elapsed) + " s, budget " + std::to_string(budget_s) + " s");
  }
  const char* tag = out.kind == Outcome::Pass ? "PASS" : out.kind == Outcome::Fail ? "FAIL" : "SKIP";
  failures += out.kind == Outcome::Fail;
  std::printf("%s  %-34s %7.3fs  %s\n", tag, name, elapsed, out.detail.c_str());
  std::fflush(stdout);
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

Outcome preprocessing_suite() {
  const auto lines = lines_of(read_file(FOMC_ABSA_FIXTURES "/adversarial_sentences.txt"));
  if (lines.size() != 200) return fail("fixture has " + std::to_string(lines.size()) + " lines, want 200");
  const auto blacklist = Blacklist::defaults();
  std::size_t kept = 0, truncated = 0;
  auto check = [&](const std::string& raw) -> std::string {
    auto s = preprocess_sentence(raw, blacklist);
    if (!s) return {};
    ++kept;
    truncated += count_words(raw) > kMaxSentenceWords;
    if (s->word_count < kMinSentenceWords || s->word_count > kMaxSentenceWords) return "word count out of range";
    if (count_words(s->text) != s->word_count) return "word_count disagrees with text";
    if (to_lower(s->text) != s->text) return "not lowercase";
    if (!has_alphabetic(s->text)) return "no alphabetic content";
    if (blacklist.matches(s->text)) return "blacklisted phrase survived";
    auto again = preprocess_sentence(s->text, blacklist);
    if (!again || again->text != s->text || again->word_count != s->word_count) return "not idempotent";
    return {};
  };
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (auto why = check(lines[i]); !why.empty()) return fail("line " + std::to_string(i + 1) + ": " + why);
  }
  // Same fixture as one document through segmentation.
  RawDocument doc{"adversarial", *parse_iso_date("2020-01-29"), read_file(FOMC_ABSA_FIXTURES "/adversarial_sentences.txt")};
  std::size_t kept_lines = kept;
  for (const auto& s : ingest_document(doc, blacklist)) {
    if (auto why = check(s.text); !why.empty()) return fail("segmented sentence: " + why);
  }
  if (kept_lines == 0 || kept_lines == lines.size()) return fail("fixture does not exercise both outcomes");
  return {Outcome::Pass, std::to_string(kept_lines) + "/200 kept, " + std::to_string(truncated) + " truncated"};
}

Outcome cosine_suite() {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<std::size_t> dims(1, 64);
  const std::vector<std::string> labels{"employment", "growth", "inflation"};
  for (int i = 0; i < 10000; ++i) {
    const std::size_t d = dims(rng);
    auto u = oracle::random_unit_ish(rng, d), v = oracle::random_unit_ish(rng, d);
    double dot = 0, uu = 0, vv = 0;
    for (std::size_t k = 0; k < d; ++k) {
      dot += u[k] * v[k];
      uu += u[k] * u[k];
      vv += v[k] * v[k];
    }
    if (std::fabs(dot) > std::sqrt(uu) * std::sqrt(vv) * (1 + 1e-12)) return fail("Cauchy-Schwarz violated");
    double c = cosine_similarity(u, v);
    if (!(c >= -1.0 && c <= 1.0)) return fail("cosine outside [-1, 1]");
    if (cosine_similarity(u, u) > 1.0) return fail("self-cosine above 1");

    std::vector<AspectAnchor> anchors;
    for (const auto& l : labels) {
      anchors.push_back({l, {l}, SentenceEmbedding::make(oracle::random_unit_ish(rng, d), Pooling::SentenceMean)});
    }
    auto base = classify_aspect(SentenceEmbedding::make(u, Pooling::SentenceMean), anchors);
    Vector scaled = u;
    const double factor = std::ldexp(1.0, static_cast<int>(rng() % 60) - 30) * 1.37;
    for (auto& x : scaled) x *= factor;
    auto s = classify_aspect(SentenceEmbedding::make(scaled, Pooling::SentenceMean), anchors);
    if (s.label != base.label) return fail("argmax not scale invariant");
    std::shuffle(anchors.begin(), anchors.end(), rng);
    auto p = classify_aspect(SentenceEmbedding::make(u, Pooling::SentenceMean), anchors);
    if (p.label != base.label || p.scores != base.scores) return fail("anchor order changed the result");
    if (base.scores.at(*base.label) != std::max({base.scores.at("employment"), base.scores.at("growth"),
                                                  base.scores.at("inflation")})) {
      return fail("label does not attain the max score");
    }
  }
  // Exhaustive ties: every non-empty subset of tied axes, every anchor order.
  std::vector<AspectAnchor> axes;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    Vector e(labels.size(), 0.0);
    e[k] = 1.0;
    axes.push_back({labels[k], {labels[k]}, SentenceEmbedding::make(e, Pooling::SentenceMean)});
  }
  std::size_t tie_cases = 0;
  for (unsigned mask = 1; mask < 8; ++mask) {
    Vector v(3);
    for (unsigned k = 0; k < 3; ++k) v[k] = (mask >> k) & 1u;
    const std::string expected = labels[static_cast<std::size_t>(__builtin_ctz(mask))];
    auto order = axes;
    auto by_label = [](const AspectAnchor& a, const AspectAnchor& b) { return a.label < b.label; };
    std::sort(order.begin(), order.end(), by_label);
    do {
      ++tie_cases;
      auto a = classify_aspect(SentenceEmbedding::make(v, Pooling::SentenceMean), order);
      if (a.label != expected) return fail("tie-break picked " + a.label.value_or("nothing") + ", want " + expected);
    } while (std::next_permutation(order.begin(), order.end(), by_label));
  }
  return {Outcome::Pass, "10000 pairs, " + std::to_string(tie_cases) + " tie cases"};
}

Outcome ols_suite() {
  std::mt19937_64 rng(31337);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t size = 3 + rng() % 48;
    std::vector<double> x(size), y(size);
    const double a = n(rng), b = 2 * n(rng), spread = std::exp(n(rng)), noise = std::exp(n(rng) - 1);
    for (std::size_t i = 0; i < size; ++i) {
      x[i] = spread * n(rng);
      y[i] = a + b * x[i] + noise * n(rng);
    }
    auto r = ols_fit(x, y);
    auto o = oracle::normal_equations(x, y);
    const std::pair<double, double> pairs[] = {
        {r.beta, o.beta}, {r.alpha, o.alpha}, {r.r_squared, o.r_squared}, {r.se_beta, o.se_beta}, {r.se_alpha, o.se_alpha}};
    for (auto [got, want] : pairs) {
      double rel = std::fabs(got - want) / std::max(std::fabs(want), 1e-300);
      worst = std::max(worst, rel);
      if (!oracle::rel_close(got, want, 1e-9)) {
        return fail("trial " + std::to_string(trial) + ": " + format_double(got) + " vs " + format_double(want));
      }
    }
  }
  struct Row {
    double df, t, p;
  };
  const Row table[] = {{5, 2.571, 0.05},  {10, 2.228, 0.05}, {30, 2.042, 0.05}, {5, 3.365, 0.02},  {10, 2.764, 0.02},
                       {30, 2.457, 0.02}, {5, 4.032, 0.01},  {10, 3.169, 0.01}, {30, 2.750, 0.01}};
  for (const auto& row : table) {
    double p = student_t_two_sided_p(row.t, row.df);
    if (std::fabs(p - row.p) > 5e-4) {
      return fail("t table df=" + format_double(row.df) + " t=" + format_double(row.t) + ": p=" + format_double(p));
    }
  }
  auto w = ols_fit(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 4});
  if (std::fabs(w.beta - 1.5) > 1e-12 || std::fabs(w.alpha + 2.0 / 3.0) > 1e-12 ||
      std::fabs(w.r_squared - 27.0 / 28.0) > 1e-12) {
    return fail("worked example mismatch");
  }
  char detail[96];
  std::snprintf(detail, sizeof detail, "1000 instances, worst rel err %.2e; t table ok", worst);
  return {Outcome::Pass, detail};
}

int run_cli(const std::string& args) {
  std::string cmd = std::string("'") + FOMC_ABSA_CLI + "' " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism_suite() {
  auto root = oracle::scratch_dir("acceptance_e2e");
  const std::string config = FOMC_ABSA_FIXTURES "/run_all.json";
  struct Run {
    const char* name;
    unsigned workers;
  };
  const Run runs[] = {{"w1a", 1}, {"w1b", 1}, {"w4", 4}};
  for (const auto& r : runs) {
    int code = run_cli("run-all --config '" + config + "' --workers " + std::to_string(r.workers) + " --batch-size 5 -o '" +
                       (root / r.name).string() + "'");
    if (code != 0) return fail(std::string("run-all exited ") + std::to_string(code) + " for " + r.name);
  }
  for (const char* artifact : {artifacts::kSeries, artifacts::kRegressionJson}) {
    auto ref = read_file(root / "w1a" / artifact);
    for (const char* other : {"w1b", "w4"}) {
      if (read_file(root / other / artifact) != ref) return fail(std::string(artifact) + " differs in run " + other);
    }
  }
  const auto series = read_file(root / "w1a" / artifacts::kSeries);
  const auto rows = std::count(series.begin(), series.end(), '\n');
  fs::remove_all(root);
  return {Outcome::Pass, "3 runs byte-identical (" + std::to_string(rows - 1) + " series rows)"};
}

Outcome synthetic_recovery() {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> sentiment(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<std::pair<Month, double>> x;
  MacroSeries y{"synthetic", {}};
  Month m{2009, 1};
  for (int i = 0; i < 120; ++i, m = m.plus(1)) {
    double s = sentiment(rng);
    x.emplace_back(m, s);
    // Two readings a month; the monthly mean carries the signal.
    double target = 0.8 * s + 0.1 + noise(rng);
    y.observations.push_back({m.first_day(), target - 0.01});
    y.observations.push_back({std::chrono::year_month_day{m.first_day().year(), m.first_day().month(), std::chrono::day{15}}, target + 0.01});
  }
  auto pairs = align(x, aggregate_monthly(y), 0);
  auto r = ols_fit(pairs);
  char detail[128];
  std::snprintf(detail, sizeof detail, "n=%zu beta=%.4f p=%.2e R^2=%.4f", r.n, r.beta, r.p_beta, r.r_squared);
  if (r.n != 120 || r.beta < 0.7 || r.beta > 0.9 || !(r.p_beta < 1e-6) || !(r.r_squared > 0.9)) return fail(detail);
  return {Outcome::Pass, detail};
}

Outcome pooling_balance_with_model() {
  const char* model_dir = std::getenv("FOMC_ABSA_MODEL_DIR");
  const char* corpus_dir = std::getenv("FOMC_ABSA_MINUTES_DIR");
  if (!model_dir || !corpus_dir) return skip("set FOMC_ABSA_MODEL_DIR and FOMC_ABSA_MINUTES_DIR to run");
  if (!model_backend_available()) return skip("built without ONNX Runtime");
  fs::path model(model_dir);
  for (const char* f : {"encoder.onnx", "vocab.txt"}) {
    if (!fs::exists(model / f)) return skip(std::string("missing ") + (model / f).string());
  }
  auto out = oracle::scratch_dir("acceptance_fig2");
  PipelineConfig c;
  c.corpus_dir = corpus_dir;
  c.output_dir = out;
  c.backend_mode = BackendMode::Model;
  c.encoder_path = model / "encoder.onnx";
  c.vocab_path = model / "vocab.txt";
  c.batch_size = 32;
  Pipeline p(c);
  p.ingest();
  p.embed();
  p.compare_pooling();
  auto j = nlohmann::json::parse(read_file(out / artifacts::kPoolingComparison));
  const double hs = j.at("entropy_sentence").get<double>(), hw = j.at("entropy_word").get<double>();
  char detail[96];
  std::snprintf(detail, sizeof detail, "entropy sentence=%.4f word=%.4f", hs, hw);
  fs::remove_all(out);
  if (!(hs > hw)) return fail(detail);
  return {Outcome::Pass, detail};
}

}  // namespace

int main() {
  criterion("preprocessing-rules", 1.0, preprocessing_suite);
  criterion("cosine-aspect-properties", 5.0, cosine_suite);
  criterion("ols-oracle-equivalence", 5.0, ols_suite);
  criterion("end-to-end-determinism", 10.0, determinism_suite);
  criterion("synthetic-regression-recovery", 1.0, synthetic_recovery);
  criterion("pooling-balance-real-model", 3600.0, pooling_balance_with_model);
  return failures == 0 ? 0 : 1;
}
