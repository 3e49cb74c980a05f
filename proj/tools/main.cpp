#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "switchrate/config.hpp"
#include "switchrate/errors.hpp"
#include "switchrate/instanton.hpp"
#include "switchrate/keldysh.hpp"
#include "switchrate/lindblad.hpp"
#include "switchrate/meanfield.hpp"
#include "switchrate/plot.hpp"
#include "switchrate/sweep.hpp"

using namespace switchrate;

namespace {

// Flags shared by every subcommand that needs a parameter set.
struct ParamFlags {
  std::string config;
  std::string preset_name;
  PresetArgs preset_args;
  std::string imperfection = "none";
  std::vector<std::string> sets;
};

void add_param_flags(CLI::App* app, ParamFlags& f) {
  app->add_option("--config", f.config, "INI file with parameter keys; a section named after the preset overrides it");
  app->add_option("--preset", f.preset_name, "kerr_oscillator, dissipative_cat or dephased_cat");
  app->add_option("--unit-rate", f.preset_args.unit_rate, "preset unit rate");
  app->add_option("--alpha0-sq", f.preset_args.alpha0_sq, "cat presets: alpha0^2");
  app->add_option("--kappa-phi", f.preset_args.kappa_phi, "dephased_cat: kappa_phi in units of kappa2");
  app->add_option("--kappa1-ratio", f.preset_args.kappa1_ratio, "cat presets: kappa1/kappa2");
  app->add_option("--imperfection", f.imperfection, "none, detuning, kerr or lambda3");
  app->add_option("--imperfection-strength", f.preset_args.imperfection_strength);
  app->add_option("--imperfection-phase", f.preset_args.imperfection_phase);
  app->add_option("--set", f.sets, "key=value parameter override, repeatable");
}

SystemParams load_params(ParamFlags& f) {
  Config cfg;
  if (!f.config.empty()) cfg = read_config(f.config);
  std::string name = f.preset_name.empty() ? cfg.get("", "preset") : f.preset_name;
  SystemParams p;
  if (!name.empty()) {
    f.preset_args.imperfection = parse_imperfection(f.imperfection);
    p = preset(parse_preset(name), f.preset_args);
  }
  if (const auto* root = cfg.section("")) apply_overrides(p, *root);
  if (!name.empty())
    if (const auto* own = cfg.section(name)) apply_overrides(p, *own);
  KeyValues kv;
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw InvalidParams("--set expects key=value, got '" + s + "'");
    kv[s.substr(0, eq)] = s.substr(eq + 1);
  }
  apply_overrides(p, kv);
  p.validate();
  return p;
}

// Writes to `path`, or to stdout when it is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << text;
}

std::string g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string c(cplx z) { return g(z.real()) + (z.imag() < 0 ? "" : "+") + g(z.imag()) + "i"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Switching rates of bistable driven-dissipative oscillators"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "seed for all random sampling")->capture_default_str();

  ParamFlags pf;
  std::string out;

  auto* fp = app.add_subcommand("fixed-points", "mean-field fixed points and their stability");
  add_param_flags(fp, pf);
  fp->add_option("--out", out, "CSV path");

  auto* rate = app.add_subcommand("rate", "closed-form action and switching rates");
  add_param_flags(rate, pf);
  double prefactor = 1.0;
  std::string branch = "path_continuation";
  rate->add_option("--prefactor", prefactor, "rate prefactor, in units of the run frequency")->capture_default_str();
  rate->add_option("--branch", branch, "path_continuation or fixed_cut")->capture_default_str();

  auto* pot = app.add_subcommand("potential", "potential on a grid as CSV");
  add_param_flags(pot, pf);
  pot->add_option("--out", out, "CSV path");
  double half = 0.0;
  int n_grid = 101;
  pot->add_option("--half-width", half, "box half width; 0 uses 1.5 times the largest fixed point");
  pot->add_option("--n", n_grid, "points per axis")->capture_default_str();

  auto* db = app.add_subcommand("check-db", "curl-free detailed-balance conditions");
  add_param_flags(db, pf);
  int n_samples = 200;
  double box_half = 3.0;
  db->add_option("--samples", n_samples)->capture_default_str();
  db->add_option("--half-width", box_half)->capture_default_str();

  auto* gap = app.add_subcommand("gap", "Lindbladian gap, steady-state moments");
  add_param_flags(gap, pf);
  std::string n_fock_text = "auto";
  int n_max = 60;
  std::string method = "automatic";
  gap->add_option("--n-fock", n_fock_text, "truncation or 'auto'")->capture_default_str();
  gap->add_option("--n-max", n_max, "largest truncation for 'auto'")->capture_default_str();
  gap->add_option("--method", method, "automatic, dense or iterative")->capture_default_str();

  auto* inst = app.add_subcommand("instanton", "shoot the switching trajectory");
  add_param_flags(inst, pf);
  inst->add_option("--out", out, "trajectory CSV path");
  int from = 0;
  ShootOptions so;
  inst->add_option("--from", from, "stable point index, 0 bright, 1 dim")->capture_default_str();
  inst->add_option("--n-theta", so.n_theta)->capture_default_str();
  inst->add_option("--refine-iters", so.refine_iters)->capture_default_str();
  inst->add_option("--eps", so.eps)->capture_default_str();
  inst->add_option("--tol", so.integ.tol)->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "parameter sweep to CSV");
  std::string protocol = "custom", plot, sweep_config;
  sweep->add_option("--protocol", protocol, "fig2, fig3, fig4 or custom")->capture_default_str();
  sweep->add_option("--config", sweep_config, "protocol file; required for custom");
  sweep->add_option("--out", out, "CSV path");
  sweep->add_option("--plot", plot, "SVG path");

  auto* fit = app.add_subcommand("fit-prefactor", "prefactor from a sweep CSV");
  std::string csv_in, anchor = "largest_alpha", series_name, direction = "gap";
  fit->add_option("--csv", csv_in, "sweep CSV")->required();
  fit->add_option("--anchor", anchor, "largest_alpha or least_squares")->capture_default_str();
  fit->add_option("--series", series_name, "restrict to one series");
  fit->add_option("--direction", direction, "gap, first_to_second or second_to_first")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (fp->parsed()) {
      const SystemParams p = load_params(pf);
      const FixedPointSet s = fixed_points_general(p);
      std::string csv = "re,im,abs_sq,stability,eig1_re,eig1_im,eig2_re,eig2_im,residual\n";
      std::printf("%-32s %-9s %-52s %s\n", "z", "stability", "jacobian eigenvalues", "residual");
      for (const auto& f : s.points) {
        const char* st = f.stability == Stability::stable ? "stable" : "unstable";
        std::printf("%-32s %-9s %-52s %.2e\n", c(f.z).c_str(), st,
                    (c(f.jacobian_eigs[0]) + ", " + c(f.jacobian_eigs[1])).c_str(), f.residual);
        csv += g(f.z.real()) + "," + g(f.z.imag()) + "," + g(std::norm(f.z)) + "," + st + "," +
               g(f.jacobian_eigs[0].real()) + "," + g(f.jacobian_eigs[0].imag()) + "," +
               g(f.jacobian_eigs[1].real()) + "," + g(f.jacobian_eigs[1].imag()) + "," + g(f.residual) + "\n";
      }
      std::printf("bistable: %s%s\n", s.bistable ? "yes" : "no",
                  s.diagnostic.empty() ? "" : (" (" + s.diagnostic + ")").c_str());
      if (!out.empty()) emit(out, csv);
      return 0;
    }

    if (rate->parsed()) {
      const SystemParams p = load_params(pf);
      const BranchPolicy pol = branch == "fixed_cut" ? BranchPolicy::fixed_cut : BranchPolicy::path_continuation;
      if (branch != "fixed_cut" && branch != "path_continuation") throw InvalidParams("unknown --branch " + branch);
      const RateEstimate r = switching_rates(p, prefactor, pol);
      std::printf("unit: %s\n", p.unit_name().c_str());
      std::printf("bright %s  dim %s  saddle %s\n", c(r.from_first).c_str(), c(r.from_second).c_str(),
                  c(r.saddle).c_str());
      std::printf("iS bright->dim  %.10g\niS dim->bright  %.10g\n", r.is_first_to_second, r.is_second_to_first);
      std::printf("rate bright->dim  %.6e\nrate dim->bright  %.6e\ngap  %.6e\n", r.rate_first_to_second,
                  r.rate_second_to_first, r.gap);
      for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
      return 0;
    }

    if (pot->parsed()) {
      const SystemParams p = load_params(pf);
      const PotentialCoeffs co = potential_coeffs(p);
      double h = half;
      if (h <= 0.0) {
        for (const auto& f : fixed_points_general(p).points) h = std::max(h, std::abs(f.z));
        h = 1.5 * std::max(h, 1.0);
      }
      std::ostringstream csv;
      csv << "re,im,phi\n";
      for (int i = 0; i < n_grid; ++i)
        for (int j = 0; j < n_grid; ++j) {
          const double x = -h + 2.0 * h * i / (n_grid - 1), y = -h + 2.0 * h * j / (n_grid - 1);
          double v;
          try {
            v = potential_phi(co, cplx(x, y));
          } catch (const BranchPoint&) {
            v = NAN;
          }
          csv << g(x) << ',' << g(y) << ',' << (std::isfinite(v) ? g(v) : "") << '\n';
        }
      emit(out, csv.str());
      return 0;
    }

    if (db->parsed()) {
      const SystemParams p = load_params(pf);
      const SampleBox box{cplx{}, box_half};
      std::printf("%-40s %-10s %-12s %s\n", "condition", "verdict", "max curl", "samples (skipped)");
      for (auto [which, label] : {std::pair{CurlCondition::ansatz_Zprime, "Z' = -D^-1 A curl-free (ansatz)"},
                                  std::pair{CurlCondition::fokker_planck_Z, "Z = D^-1 (div D - A) curl-free (FP)"}}) {
        const CurlReport r = check_curl_condition(p, which, box, n_samples, seed);
        std::printf("%-40s %-10s %-12.3e %d (%d)\n", label, r.pass ? "holds" : "fails", r.max_curl, r.evaluated,
                    r.skipped);
      }
      return 0;
    }

    if (gap->parsed()) {
      const SystemParams p = load_params(pf);
      GapOptions go;
      if (method == "dense") go.method = GapMethod::dense;
      else if (method == "iterative") go.method = GapMethod::iterative;
      else if (method != "automatic") throw InvalidParams("unknown --method " + method);
      SpectralSummary s;
      std::string note;
      if (n_fock_text == "auto") {
        const AutoGapResult a = gap_auto_truncation(p, n_max, go);
        s = a.summary;
        for (std::size_t i = 0; i < a.scan.n_fock.size(); ++i)
          std::printf("N=%-4d gap %.10e\n", a.scan.n_fock[i], a.scan.gaps[i]);
        note = a.converged ? "converged at N=" + std::to_string(a.n_fock)
                           : "NOT converged up to N=" + std::to_string(a.n_fock);
      } else {
        const int n = static_cast<int>(parse_real(n_fock_text, "--n-fock"));
        s = dissipative_gap(build_lindbladian(p, n), go);
        note = "single truncation N=" + std::to_string(n) + ", convergence not checked";
      }
      const auto m = steady_state_moments(s);
      std::printf("gap %.10e (imag %.3e)\n", s.gap, s.gap_imag);
      std::printf("<a> %s\n<a^2> %s\n<a^dag a> %s\n", c(m[0]).c_str(), c(m[1]).c_str(), c(m[2]).c_str());
      std::printf("zero modes %d, steady-state residual %.2e\n%s\n", s.n_zero_modes, s.steady_residual, note.c_str());
      return 0;
    }

    if (inst->parsed()) {
      const SystemParams p = load_params(pf);
      const FixedPointSet s = fixed_points_general(p);
      const ShotResult r = shoot_instanton(p, s.stable_point(from).z, so);
      const Trajectory& t = r.best;
      const cplx l0 = lindbladian_density(p, t.states.front());
      std::ostringstream csv;
      csv << "t,b_cl_re,b_cl_im,b_cl_bar_re,b_cl_bar_im,b_q_re,b_q_im,b_q_bar_re,b_q_bar_im,action,density_drift\n";
      for (std::size_t i = 0; i < t.times.size(); ++i) {
        const auto& x = t.states[i];
        csv << g(t.times[i]) << ',' << g(x.b_cl.real()) << ',' << g(x.b_cl.imag()) << ',' << g(x.b_cl_bar.real())
            << ',' << g(x.b_cl_bar.imag()) << ',' << g(x.b_q.real()) << ',' << g(x.b_q.imag()) << ','
            << g(x.b_q_bar.real()) << ',' << g(x.b_q_bar.imag()) << ',' << g(t.running_action[i]) << ','
            << g(std::abs(lindbladian_density(p, x) - l0)) << '\n';
      }
      if (!out.empty()) emit(out, csv.str());
      std::printf("theta %.10g  closest approach %.3e  action %.10g  drift %.2e\n", r.theta, t.closest_approach,
                  t.accumulated_action, t.max_density_drift);
      return 0;
    }

    if (sweep->parsed()) {
      std::string text;
      if (!sweep_config.empty()) {
        std::ifstream f(sweep_config);
        if (!f) throw Error("cannot open '" + sweep_config + "'");
        std::stringstream ss;
        ss << f.rdbuf();
        text = ss.str();
      } else if (protocol == "custom") {
        throw InvalidParams("--protocol custom needs --config");
      } else {
        text = builtin_protocol(protocol);
      }
      auto specs = sweep_specs_from_config(parse_config(text));
      if (protocol != "custom")
        for (auto& s : specs) s.protocol = protocol;
      const SweepTable t = run_sweeps(specs);
      emit(out, to_csv(t));
      if (!plot.empty()) emit_plot(t, protocol == "custom" ? PlotKind::custom : parse_plot_kind(protocol), plot);
      if (const int e = t.n_errors()) {
        std::fprintf(stderr, "%d row(s) failed, see the error column\n", e);
        return 2;
      }
      return 0;
    }

    if (fit->parsed()) {
      const SweepTable t = read_csv(csv_in);
      std::vector<std::string> names;
      for (const auto& r : t.rows)
        if ((series_name.empty() || r.series == series_name) &&
            std::find(names.begin(), names.end(), r.series) == names.end())
          names.push_back(r.series);
      if (names.empty()) throw InvalidParams("no matching rows");
      const PrefactorAnchor a = parse_anchor(anchor);
      for (const auto& n : names) {
        std::vector<double> is, num;
        for (const auto& r : t.rows) {
          if (r.series != n) continue;
          if (direction == "gap") {
            is.push_back(std::log(r.gap_analytic));
            num.push_back(r.gap);
          } else if (direction == "first_to_second") {
            is.push_back(r.is_first_to_second);
            num.push_back(r.numeric_rate_first_to_second);
          } else if (direction == "second_to_first") {
            is.push_back(r.is_second_to_first);
            num.push_back(r.numeric_rate_second_to_first);
          } else {
            throw InvalidParams("unknown --direction " + direction);
          }
        }
        std::printf("%s %.6g\n", n.c_str(), fit_prefactor(is, num, a));
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
