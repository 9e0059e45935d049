#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "llm4ts/harness/experiment.hpp"
#include "llm4ts/util.hpp"

namespace llm4ts::harness {

// Minimal view of a results CSV used by the reporting command.
struct ReportRow {
  int scenario = 0;
  double p_w11 = 0.0, p_w00 = 0.0, eta_d = 0.0;
  std::string method;
  double excess_steps = 0.0;
};

inline std::vector<ReportRow> parse_results_csv(const std::string& text) {
  std::vector<std::string> lines;
  for (auto& line : split(text, '\n'))
    if (!trim(line).empty()) lines.push_back(line);
  if (lines.empty()) throw EmptyInput("results CSV is empty");

  const std::vector<std::string> header = split(lines[0], ',');
  auto col = [&](const char* name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw ParseError(std::string("results CSV is missing column \"") + name + "\"");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_scenario = col("scenario");
  const std::size_t c_p11 = col("p_w11");
  const std::size_t c_p00 = col("p_w00");
  const std::size_t c_eta = col("eta_d");
  const std::size_t c_method = col("method");
  const std::size_t c_excess = col("excess_steps");

  std::vector<ReportRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> f = split(lines[i], ',');
    if (f.size() < header.size())
      throw ParseError("results CSV row " + std::to_string(i) + " has too few fields");
    ReportRow r;
    try {
      r.scenario = std::stoi(f[c_scenario]);
      r.p_w11 = std::stod(f[c_p11]);
      r.p_w00 = std::stod(f[c_p00]);
      r.eta_d = std::stod(f[c_eta]);
      r.method = f[c_method];
      r.excess_steps = std::stod(f[c_excess]);
    } catch (const std::exception&) {
      throw ParseError("results CSV row " + std::to_string(i) + " has a malformed number");
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw EmptyInput("results CSV has a header but no data rows");
  return rows;
}

struct ReportCell {
  int scenario = 0;
  double p_w11 = 0.0, p_w00 = 0.0, eta_d = 0.0;
  std::string method;
  long n = 0;
  double median = 0.0, q25 = 0.0, q75 = 0.0;
};

inline std::vector<ReportCell> summarize_report(const std::vector<ReportRow>& rows) {
  std::map<std::tuple<int, double, std::string>, std::vector<double>> groups;
  std::map<std::tuple<int, double, std::string>, ReportRow> meta;
  for (const ReportRow& r : rows) {
    const auto key = std::make_tuple(r.scenario, r.eta_d, r.method);
    groups[key].push_back(r.excess_steps);
    meta.emplace(key, r);
  }
  std::vector<ReportCell> cells;
  for (auto& [key, values] : groups) {
    ReportCell c;
    const ReportRow& m = meta.at(key);
    c.scenario = m.scenario;
    c.p_w11 = m.p_w11;
    c.p_w00 = m.p_w00;
    c.eta_d = m.eta_d;
    c.method = m.method;
    c.n = static_cast<long>(values.size());
    std::tie(c.median, c.q25, c.q75) = aggregate_quantiles(values);
    cells.push_back(std::move(c));
  }
  return cells;
}

// Long-format table: one row per (cell, method, statistic).
inline std::string report_csv(const std::vector<ReportCell>& cells) {
  std::string out = "scenario,p_w11,p_w00,eta_d,method,n,metric,value\n";
  for (const ReportCell& c : cells) {
    auto row = [&](const char* metric, double value) {
      out += std::to_string(c.scenario) + ',' + fmt_g(c.p_w11) + ',' + fmt_g(c.p_w00) + ',' +
             fmt_g(c.eta_d) + ',' + c.method + ',' + std::to_string(c.n) + ',' + metric +
             ',' + fmt_g(value) + '\n';
    };
    row("median_excess_steps", c.median);
    row("q25_excess_steps", c.q25);
    row("q75_excess_steps", c.q75);
  }
  return out;
}

// Grouped bar chart of median excess steps per cell, with q25-q75 whiskers.
// Output is plain SVG with fixed formatting so identical inputs produce
// identical bytes.
inline std::string report_svg(const std::vector<ReportCell>& cells) {
  if (cells.empty()) throw EmptyInput("report: no cells to plot");

  std::vector<std::string> methods;
  std::vector<std::pair<int, double>> groups;  // (scenario, eta_d)
  for (const ReportCell& c : cells) {
    if (std::find(methods.begin(), methods.end(), c.method) == methods.end())
      methods.push_back(c.method);
    const auto g = std::make_pair(c.scenario, c.eta_d);
    if (std::find(groups.begin(), groups.end(), g) == groups.end()) groups.push_back(g);
  }
  std::sort(methods.begin(), methods.end());
  std::sort(groups.begin(), groups.end());

  double y_max = 1.0;
  for (const ReportCell& c : cells) y_max = std::max(y_max, c.q75);
  y_max *= 1.05;

  const double bar_w = 34.0, gap = 14.0, group_pad = 26.0;
  const double plot_h = 320.0, margin_l = 70.0, margin_t = 30.0, margin_b = 90.0;
  const double group_w = methods.size() * bar_w + (methods.size() - 1) * gap + group_pad;
  const double width = margin_l + groups.size() * group_w + 40.0;
  const double height = margin_t + plot_h + margin_b;

  static const char* kPalette[] = {"#4878cf", "#e8763a", "#6aa84f", "#9467bd",
                                   "#8c564b", "#17becf"};
  const std::size_t n_colors = sizeof(kPalette) / sizeof(kPalette[0]);

  auto y_of = [&](double v) { return margin_t + plot_h * (1.0 - v / y_max); };
  auto num = [](double v) { return fmt_fixed(v, 2); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
         num(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg += "<line x1=\"" + num(margin_l) + "\" y1=\"" + num(margin_t) + "\" x2=\"" +
         num(margin_l) + "\" y2=\"" + num(margin_t + plot_h) + "\" stroke=\"#333\"/>\n";
  svg += "<line x1=\"" + num(margin_l) + "\" y1=\"" + num(margin_t + plot_h) + "\" x2=\"" +
         num(width - 20.0) + "\" y2=\"" + num(margin_t + plot_h) + "\" stroke=\"#333\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = y_max * tick / 4.0;
    svg += "<text x=\"" + num(margin_l - 6.0) + "\" y=\"" + num(y_of(v) + 4.0) +
           "\" text-anchor=\"end\">" + fmt_trim(v, 1) + "</text>\n";
    svg += "<line x1=\"" + num(margin_l - 4.0) + "\" y1=\"" + num(y_of(v)) + "\" x2=\"" +
           num(margin_l) + "\" y2=\"" + num(y_of(v)) + "\" stroke=\"#333\"/>\n";
  }
  svg += "<text x=\"16\" y=\"" + num(margin_t + plot_h / 2.0) +
         "\" transform=\"rotate(-90 16 " + num(margin_t + plot_h / 2.0) +
         ")\" text-anchor=\"middle\">median excess steps</text>\n";

  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double gx = margin_l + g * group_w + group_pad / 2.0;
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      const auto it = std::find_if(cells.begin(), cells.end(), [&](const ReportCell& c) {
        return c.scenario == groups[g].first && c.eta_d == groups[g].second &&
               c.method == methods[mi];
      });
      if (it == cells.end()) continue;
      const double x = gx + mi * (bar_w + gap);
      const double y_med = y_of(std::max(0.0, it->median));
      const double bar_h = margin_t + plot_h - y_med;
      svg += "<rect x=\"" + num(x) + "\" y=\"" + num(y_med) + "\" width=\"" + num(bar_w) +
             "\" height=\"" + num(bar_h) + "\" fill=\"" + kPalette[mi % n_colors] + "\"/>\n";
      const double cx = x + bar_w / 2.0;
      svg += "<line x1=\"" + num(cx) + "\" y1=\"" + num(y_of(it->q25)) + "\" x2=\"" + num(cx) +
             "\" y2=\"" + num(y_of(it->q75)) + "\" stroke=\"#222\" stroke-width=\"1.5\"/>\n";
      svg += "<line x1=\"" + num(cx - 5.0) + "\" y1=\"" + num(y_of(it->q25)) + "\" x2=\"" +
             num(cx + 5.0) + "\" y2=\"" + num(y_of(it->q25)) + "\" stroke=\"#222\"/>\n";
      svg += "<line x1=\"" + num(cx - 5.0) + "\" y1=\"" + num(y_of(it->q75)) + "\" x2=\"" +
             num(cx + 5.0) + "\" y2=\"" + num(y_of(it->q75)) + "\" stroke=\"#222\"/>\n";
    }
    const double label_x = gx + (methods.size() * bar_w + (methods.size() - 1) * gap) / 2.0;
    svg += "<text x=\"" + num(label_x) + "\" y=\"" + num(margin_t + plot_h + 18.0) +
           "\" text-anchor=\"middle\">S" + std::to_string(groups[g].first) + "</text>\n";
    svg += "<text x=\"" + num(label_x) + "\" y=\"" + num(margin_t + plot_h + 32.0) +
           "\" text-anchor=\"middle\">eta_d=" + fmt_trim(groups[g].second, 3) + "</text>\n";
  }

  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    const double lx = margin_l + mi * 150.0;
    const double ly = margin_t + plot_h + 56.0;
    svg += "<rect x=\"" + num(lx) + "\" y=\"" + num(ly) + "\" width=\"12\" height=\"12\" fill=\"" +
           kPalette[mi % n_colors] + "\"/>\n";
    svg += "<text x=\"" + num(lx + 18.0) + "\" y=\"" + num(ly + 10.0) + "\">" + methods[mi] +
           "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace llm4ts::harness
