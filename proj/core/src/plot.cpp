#include "switchrate/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "switchrate/errors.hpp"

namespace switchrate {

namespace {

constexpr const char* kPalette[] = {"#1f5fa8", "#d4a017", "#b03a2e", "#2e8b57", "#6a3d9a", "#e07b39", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);
constexpr double kPanelW = 360, kPanelH = 300, kLeft = 60, kRight = 15, kTop = 30, kBottom = 45;

struct Series {
  std::string label;
  std::string color;
  bool line = true;
  bool dashed = false;
  std::vector<std::pair<double, double>> points;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

void add_series(std::vector<Series>& out, std::string label, std::string color, bool line, bool dashed,
                const std::vector<const SweepRow*>& rows, double SweepRow::*field) {
  Series s{std::move(label), std::move(color), line, dashed, {}};
  for (const auto* r : rows) {
    const double y = r->*field;
    if (std::isfinite(y) && y > 0.0 && std::isfinite(r->value)) s.points.emplace_back(r->value, y);
  }
  if (!s.points.empty()) out.push_back(std::move(s));
}

std::vector<Series> panel_series(const std::vector<const SweepRow*>& rows, PlotKind kind) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const SweepRow*>> by_series;
  for (const auto* r : rows) {
    if (!by_series.count(r->series)) order.push_back(r->series);
    by_series[r->series].push_back(r);
  }
  std::vector<Series> out;
  int color = 0;
  for (const auto& name : order) {
    const auto& rs = by_series[name];
    if (kind == PlotKind::fig2) {
      add_series(out, name + " bright to dim", kPalette[0], true, false, rs, &SweepRow::rate_first_to_second);
      add_series(out, name + " dim to bright", kPalette[1], true, false, rs, &SweepRow::rate_second_to_first);
      add_series(out, name + " numeric bright to dim", kPalette[0], false, false, rs,
                 &SweepRow::numeric_rate_first_to_second);
      add_series(out, name + " numeric dim to bright", kPalette[1], false, false, rs,
                 &SweepRow::numeric_rate_second_to_first);
      add_series(out, name + " numeric gap", "#000000", false, false, rs, &SweepRow::gap);
      continue;
    }
    const std::string c = kPalette[color++ % kPaletteSize];
    add_series(out, name + " analytic", c, true, false, rs, &SweepRow::gap_analytic);
    add_series(out, name + " numeric", c, false, false, rs, &SweepRow::gap);
    if (kind == PlotKind::fig4) {
      Series ref{name + " exp(-2|alpha_ss|^2)", c, true, true, {}};
      for (const auto* r : rs)
        if (std::isfinite(r->alpha_ss_sq)) ref.points.emplace_back(r->value, std::exp(-2.0 * r->alpha_ss_sq));
      if (!ref.points.empty()) out.push_back(std::move(ref));
    }
  }
  return out;
}

void draw_panel(std::string& svg, double x0, const std::string& title, const std::string& xlabel,
                const std::vector<Series>& series) {
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      xmin = std::min(xmin, x), xmax = std::max(xmax, x);
      ymin = std::min(ymin, std::log10(y)), ymax = std::max(ymax, std::log10(y));
    }
  const double w = kPanelW - kLeft - kRight, h = kPanelH - kTop - kBottom;
  svg += "<g transform=\"translate(" + num(x0) + ",0)\">\n";
  svg += "<text x=\"" + num(kLeft + w / 2) + "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">" + escape(title) +
         "</text>\n";
  svg += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" fill=\"none\" stroke=\"#000\"/>\n";
  svg += "<text x=\"" + num(kLeft + w / 2) + "\" y=\"" + num(kPanelH - 8) +
         "\" text-anchor=\"middle\" font-size=\"11\">" + escape(xlabel) + "</text>\n";
  if (series.empty()) {
    svg += "</g>\n";
    return;
  }
  if (xmax == xmin) xmin -= 0.5, xmax += 0.5;
  ymin = std::floor(ymin), ymax = std::ceil(ymax);
  if (ymax == ymin) ymax += 1.0;
  auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * w; };
  auto py = [&](double y) { return kTop + h - (std::log10(y) - ymin) / (ymax - ymin) * h; };
  const int step = std::max(1, static_cast<int>((ymax - ymin) / 8));
  for (int d = static_cast<int>(ymin); d <= static_cast<int>(ymax); d += step) {
    const double y = kTop + h - (d - ymin) / (ymax - ymin) * h;
    svg += "<line x1=\"" + num(kLeft - 4) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kLeft) + "\" y2=\"" + num(y) +
           "\" stroke=\"#000\"/>\n";
    svg += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(y + 4) +
           "\" text-anchor=\"end\" font-size=\"10\">1e" + std::to_string(d) + "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const double xv = xmin + (xmax - xmin) * k / 4;
    svg += "<text x=\"" + num(px(xv)) + "\" y=\"" + num(kTop + h + 14) +
           "\" text-anchor=\"middle\" font-size=\"10\">" + num(xv) + "</text>\n";
  }
  int legend = 0;
  for (const auto& s : series) {
    if (s.line) {
      std::string pts;
      for (const auto& [x, y] : s.points) pts += num(px(x)) + "," + num(py(y)) + " ";
      svg += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\"" +
             (s.dashed ? " stroke-dasharray=\"4 3\"" : "") + " points=\"" + pts + "\"/>\n";
    } else {
      for (const auto& [x, y] : s.points)
        svg += "<circle cx=\"" + num(px(x)) + "\" cy=\"" + num(py(y)) + "\" r=\"3\" fill=\"" + s.color + "\"/>\n";
    }
    const double ly = kTop + 12 + 12 * legend++;
    svg += "<text x=\"" + num(kLeft + 6) + "\" y=\"" + num(ly) + "\" font-size=\"9\" fill=\"" + s.color + "\">" +
           escape(s.label) + "</text>\n";
  }
  svg += "</g>\n";
}

}  // namespace

PlotKind parse_plot_kind(std::string_view name) {
  if (name == "fig2") return PlotKind::fig2;
  if (name == "fig3") return PlotKind::fig3;
  if (name == "fig4") return PlotKind::fig4;
  if (name == "custom") return PlotKind::custom;
  throw InvalidParams("unknown plot kind '" + std::string(name) + "'");
}

std::string render_svg(const SweepTable& t, PlotKind kind) {
  std::vector<std::string> panels;
  std::map<std::string, std::vector<const SweepRow*>> by_panel;
  for (const auto& r : t.rows) {
    const std::string key = r.panel.empty() ? r.series : r.panel;
    if (!by_panel.count(key)) panels.push_back(key);
    by_panel[key].push_back(&r);
  }
  const double width = kPanelW * static_cast<double>(std::max<std::size_t>(1, panels.size()));
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
                    num(kPanelH) + "\" font-family=\"sans-serif\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i) {
    const auto& rows = by_panel[panels[i]];
    draw_panel(svg, kPanelW * static_cast<double>(i), panels[i], rows.front()->sweep_var, panel_series(rows, kind));
  }
  svg += "</svg>\n";
  return svg;
}

void emit_plot(const SweepTable& t, PlotKind kind, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << render_svg(t, kind);
  if (!f) throw Error("write to '" + path + "' failed");
}

}  // namespace switchrate
