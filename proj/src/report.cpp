#include "fomc_absa/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

namespace fomc_absa {
namespace {

std::string fixed(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

std::string xml_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string regression_report_json(std::span<const RegressionResult> results) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    nlohmann::ordered_json j;
    j["indicator"] = r.indicator;
    j["aspect"] = r.aspect;
    j["lead"] = r.lead;
    j["n"] = r.n;
    j["alpha"] = r.alpha;
    j["beta"] = r.beta;
    j["se_beta"] = r.se_beta;
    j["t_beta"] = std::isfinite(r.t_beta) ? nlohmann::ordered_json(r.t_beta) : nlohmann::ordered_json(nullptr);
    j["p_beta"] = r.p_beta;
    j["r_squared"] = r.r_squared;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

std::string regression_report_text(std::span<const RegressionResult> results) {
  char line[256];
  std::string out;
  std::snprintf(line, sizeof(line), "%-14s %-12s %4s %4s %11s %11s %11s %11s %9s %10s %7s\n", "indicator", "aspect",
                "lead", "n", "alpha", "beta", "se_alpha", "se_beta", "t_beta", "p_beta", "R^2");
  out += line;
  out += std::string(115, '-') + "\n";
  for (const auto& r : results) {
    std::snprintf(line, sizeof(line), "%-14s %-12s %4d %4zu %11.5f %11.5f %11.5f %11.5f %9s %10.3g %7.4f%s\n",
                  r.indicator.c_str(), r.aspect.c_str(), r.lead, r.n, r.alpha, r.beta, r.se_alpha, r.se_beta,
                  std::isfinite(r.t_beta) ? fixed("%9.3f", r.t_beta).c_str() : "inf", r.p_beta, r.r_squared,
                  r.degenerate_response ? "  (constant response)" : "");
    out += line;
  }
  return out;
}

std::string regression_scatter_svg(std::span<const AlignedPair> pairs, const RegressionResult& result) {
  constexpr double kW = 480, kH = 360, kPad = 48;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!pairs.empty()) {
    auto [xa, xb] = std::minmax_element(pairs.begin(), pairs.end(), [](auto& a, auto& b) { return a.x < b.x; });
    auto [ya, yb] = std::minmax_element(pairs.begin(), pairs.end(), [](auto& a, auto& b) { return a.y < b.y; });
    x0 = xa->x, x1 = xb->x, y0 = ya->y, y1 = yb->y;
  }
  if (x1 - x0 <= 0) x1 = x0 + 1;
  if (y1 - y0 <= 0) y1 = y0 + 1;
  auto sx = [&](double x) { return kPad + (x - x0) / (x1 - x0) * (kW - 2 * kPad); };
  auto sy = [&](double y) { return kH - kPad - (y - y0) / (y1 - y0) * (kH - 2 * kPad); };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"360\" viewBox=\"0 0 480 360\">\n";
  svg += "<rect width=\"480\" height=\"360\" fill=\"white\"/>\n";
  svg += "<text x=\"240\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
         xml_escape(result.indicator) + " vs " + xml_escape(result.aspect) + " sentiment (lead " + std::to_string(result.lead) +
         ", R^2=" + fixed("%.3f", result.r_squared) + ")</text>\n";
  svg += "<line x1=\"48\" y1=\"312\" x2=\"432\" y2=\"312\" stroke=\"black\"/>\n";
  svg += "<line x1=\"48\" y1=\"48\" x2=\"48\" y2=\"312\" stroke=\"black\"/>\n";
  for (const auto& p : pairs) {
    svg += "<circle cx=\"" + fixed("%.2f", sx(p.x)) + "\" cy=\"" + fixed("%.2f", sy(p.y)) +
           "\" r=\"3\" fill=\"steelblue\"/>\n";
  }
  double ya = result.alpha + result.beta * x0;
  double yb = result.alpha + result.beta * x1;
  svg += "<line x1=\"" + fixed("%.2f", sx(x0)) + "\" y1=\"" + fixed("%.2f", sy(ya)) + "\" x2=\"" +
         fixed("%.2f", sx(x1)) + "\" y2=\"" + fixed("%.2f", sy(yb)) + "\" stroke=\"firebrick\" stroke-width=\"2\"/>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace fomc_absa
