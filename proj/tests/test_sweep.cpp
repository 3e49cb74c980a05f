#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "switchrate/errors.hpp"
#include "switchrate/plot.hpp"
#include "switchrate/sweep.hpp"

using namespace switchrate;

namespace {

SweepSpec small_cat_sweep() {
  SweepSpec s;
  s.series = "ideal";
  s.panel = "ideal";
  s.variable = SweepVariable::alpha_ss_sq;
  s.grid = {1.0, 1.5};
  s.fixed = preset(Preset::dissipative_cat);
  s.outputs.numeric_gap = true;
  s.n_fock = 14;
  return s;
}

}  // namespace

TEST_CASE("prefactor fits") {
  std::vector<double> is = {-2.0, -4.0, -6.0, -8.0};
  std::vector<double> num;
  for (double v : is) num.push_back(0.3 * std::exp(v));
  CHECK(fit_prefactor(is, num, PrefactorAnchor::largest_alpha) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(fit_prefactor(is, num, PrefactorAnchor::least_squares) == doctest::Approx(0.3).epsilon(1e-12));
  num[0] = std::nan("");
  num[1] = -1.0;
  CHECK(fit_prefactor(is, num, PrefactorAnchor::least_squares) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK_THROWS_AS(fit_prefactor({-1.0}, {std::nan("")}, PrefactorAnchor::largest_alpha), InvalidParams);
  CHECK(parse_anchor("least_squares") == PrefactorAnchor::least_squares);
  CHECK_THROWS_AS(parse_anchor("median"), InvalidParams);
}

TEST_CASE("grids") {
  const auto g = parse_grid("1:3:5");
  REQUIRE(g.size() == 5);
  CHECK(g[1] == doctest::Approx(1.5));
  CHECK(g.back() == 3.0);
  CHECK(parse_grid("0.1, 0.4,2") == std::vector<double>{0.1, 0.4, 2.0});
  CHECK_THROWS_AS(parse_grid("1:2"), InvalidParams);
  SweepSpec s = small_cat_sweep();
  s.grid = {1.0, 1.0};
  CHECK_THROWS_AS(s.validate(), InvalidParams);
  s.grid = {};
  CHECK_THROWS_AS(s.validate(), InvalidParams);
  s.grid = {3.0, 2.0, 1.0};
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("steady-state amplitude tuning") {
  SystemParams p = preset(Preset::dissipative_cat, {.imperfection = Imperfection::kerr, .imperfection_strength = 0.2});
  for (double target : {1.0, 3.5}) {
    const SystemParams q = tune_alpha_ss_sq(p, target);
    CHECK(std::norm(fixed_points_general(q).stable_point(0).z) == doctest::Approx(target).epsilon(1e-9));
  }
}

TEST_CASE("sweep rows, CSV round trip and reruns") {
  const SweepSpec s = small_cat_sweep();
  const SweepTable a = run_sweep(s);
  REQUIRE(a.rows.size() == 2);
  CHECK(a.n_errors() == 0);
  for (const auto& r : a.rows) {
    CHECK(r.alpha_ss_sq == doctest::Approx(r.value).epsilon(1e-9));
    CHECK(r.gap > 0.0);
    CHECK(r.n_fock == 14);
    CHECK(std::isnan(r.instanton_first));
    CHECK(r.params_hash.size() > 0);
  }
  CHECK(a.rows[1].gap < a.rows[0].gap);
  const std::string csv = to_csv(a);
  CHECK(to_csv(run_sweep(s)) == csv);
  const SweepTable b = parse_csv(csv);
  REQUIRE(b.rows.size() == 2);
  CHECK(to_csv(b) == csv);
  CHECK(b.rows[0].gap == doctest::Approx(a.rows[0].gap).epsilon(1e-9));
  CHECK(std::isnan(b.rows[0].instanton_first));
  CHECK(b.rows[0].error.empty());
}

TEST_CASE("failed points become error rows") {
  SweepSpec s;
  s.series = "kerr";
  s.variable = SweepVariable::detuning;
  s.grid = {0.0, 12.66};
  s.scale = 0.5;
  s.fixed = preset(Preset::kerr_oscillator);
  const SweepTable t = run_sweep(s);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.n_errors() == 1);
  CHECK(!t.rows[0].error.empty());
  CHECK(t.rows[0].error.find(',') == std::string::npos);
  CHECK(t.rows[1].error.empty());
  CHECK(parse_csv(to_csv(t)).rows[0].error == t.rows[0].error);
}

TEST_CASE("plots are deterministic") {
  const SweepTable t = run_sweep(small_cat_sweep());
  const std::string a = render_svg(t, PlotKind::fig3);
  CHECK(a == render_svg(t, PlotKind::fig3));
  CHECK(a.rfind("<svg", 0) == 0);
  CHECK(a.find("</svg>") != std::string::npos);
  CHECK(render_svg(t, PlotKind::fig4).find("stroke-dasharray") != std::string::npos);
  CHECK_THROWS_AS(parse_plot_kind("fig9"), InvalidParams);
}

TEST_CASE("shipped protocols parse") {
  for (const char* name : {"fig2", "fig3", "fig4"}) {
    const auto specs = sweep_specs_from_config(parse_config(builtin_protocol(name)));
    CHECK(!specs.empty());
    for (const auto& s : specs) {
      CHECK(s.protocol == name);
      CHECK_NOTHROW(s.validate());
    }
  }
  CHECK(sweep_specs_from_config(parse_config(builtin_protocol("fig3"))).size() == 10);
  CHECK_THROWS_AS(builtin_protocol("fig7"), InvalidParams);
}
