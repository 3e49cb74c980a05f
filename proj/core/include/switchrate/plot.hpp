#pragma once

#include <string>
#include <string_view>

#include "switchrate/sweep.hpp"

namespace switchrate {

enum class PlotKind { fig2, fig3, fig4, custom };
PlotKind parse_plot_kind(std::string_view name);

// SVG with one log-y panel per distinct `panel`: analytic rates as lines,
// numeric gaps as dots. fig2 draws both directions; fig4 adds the
// exp(-2 |alpha_ss|^2) reference. Columns that are empty everywhere are left out.
std::string render_svg(const SweepTable& t, PlotKind kind);
void emit_plot(const SweepTable& t, PlotKind kind, const std::string& path);

}  // namespace switchrate
