#include "switchrate/sweep.hpp"

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "parallel.hpp"
#include "switchrate/errors.hpp"
#include "switchrate/keldysh.hpp"
#include "switchrate/lindblad.hpp"

namespace switchrate {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

const char* const kColumns[] = {"protocol",
                                "series",
                                "panel",
                                "sweep_var",
                                "value",
                                "alpha_ss_sq",
                                "is_first_to_second",
                                "is_second_to_first",
                                "rate_first_to_second",
                                "rate_second_to_first",
                                "gap_analytic",
                                "gap",
                                "n_fock",
                                "converged",
                                "pop_first",
                                "pop_second",
                                "numeric_rate_first_to_second",
                                "numeric_rate_second_to_first",
                                "instanton_first",
                                "instanton_second",
                                "params_hash",
                                "error"};
constexpr int kNumColumns = sizeof(kColumns) / sizeof(kColumns[0]);

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

// Smallest basin weight turned into a per-direction rate. On the Kerr preset
// the left-eigenmode weights stay smooth down to about 1e-8 and turn to noise
// (even negative) below.
constexpr double kMinResolvedWeight = 1e-7;

// CSV cells never need quoting once separators are stripped from messages.
std::string clean_message(std::string m) {
  for (char& c : m)
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  const auto first = m.find_first_not_of(" \t;");
  if (first == std::string::npos) return "";
  return m.substr(first, m.find_last_not_of(" \t;") - first + 1);
}

std::string fmt(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double cell_real(const std::string& s) { return s.empty() ? nan : parse_real(s, "csv cell"); }

// Magnitude of the bright stable point, or of the largest stable point when
// the set is not bistable.
double bright_norm(const SystemParams& p) {
  const FixedPointSet fps = fixed_points_general(p);
  double best = 0.0;
  for (const auto& f : fps.stable()) best = std::max(best, std::norm(f.z));
  return best;
}

}  // namespace

SweepRow::SweepRow()
    : alpha_ss_sq(nan),
      is_first_to_second(nan),
      is_second_to_first(nan),
      rate_first_to_second(nan),
      rate_second_to_first(nan),
      gap_analytic(nan),
      gap(nan),
      pop_first(nan),
      pop_second(nan),
      numeric_rate_first_to_second(nan),
      numeric_rate_second_to_first(nan),
      instanton_first(nan),
      instanton_second(nan) {}

int SweepTable::n_errors() const {
  int n = 0;
  for (const auto& r : rows) n += r.error.empty() ? 0 : 1;
  return n;
}

SweepVariable parse_sweep_variable(std::string_view name) {
  if (name == "detuning") return SweepVariable::detuning;
  if (name == "drive1_mod") return SweepVariable::drive1_mod;
  if (name == "alpha_ss_sq") return SweepVariable::alpha_ss_sq;
  if (name == "kerr") return SweepVariable::kerr;
  if (name == "lambda3_mod") return SweepVariable::lambda3_mod;
  if (name == "kappa_phi") return SweepVariable::kappa_phi;
  throw InvalidParams("unknown sweep variable '" + std::string(name) + "'");
}

std::string_view sweep_variable_name(SweepVariable v) {
  switch (v) {
    case SweepVariable::detuning: return "detuning";
    case SweepVariable::drive1_mod: return "drive1_mod";
    case SweepVariable::alpha_ss_sq: return "alpha_ss_sq";
    case SweepVariable::kerr: return "kerr";
    case SweepVariable::lambda3_mod: return "lambda3_mod";
    case SweepVariable::kappa_phi: return "kappa_phi";
  }
  return "";
}

void SweepSpec::validate() const {
  if (grid.empty()) throw InvalidParams("sweep grid is empty");
  const bool up = grid.size() < 2 || grid[1] > grid[0];
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (up ? !(grid[i] > grid[i - 1]) : !(grid[i] < grid[i - 1]))
      throw InvalidParams("sweep grid must be strictly monotone");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidParams("sweep scale must be positive");
  if (n_fock && *n_fock < 2) throw InvalidParams("n_fock must be at least 2");
  fixed.validate();
}

SystemParams tune_alpha_ss_sq(const SystemParams& p, double target) {
  if (!(target > 0.0)) throw InvalidParams("target |alpha_ss|^2 must be positive");
  const bool literal = p.alpha0_sq.has_value();
  const cplx unit_dir = [&] {
    const cplx d = literal ? *p.alpha0_sq : p.lambda2;
    if (std::abs(d) > 0.0) return d / std::abs(d);
    return literal ? cplx(1.0, 0.0) : I;
  }();
  if (!literal && p.kappa2 <= 0.0 && p.kerr == 0.0)
    throw InvalidParams("tuning |alpha_ss|^2 needs a two-photon process");
  auto with = [&](double s) {
    SystemParams q = p;
    if (literal)
      q.alpha0_sq = s * unit_dir;
    else
      q.lambda2 = s * unit_dir;
    return q;
  };
  auto f = [&](double s) {
    try {
      return bright_norm(with(s)) - target;
    } catch (const Error&) {
      return -target;
    }
  };
  const double s0 = literal ? target : 0.5 * std::max(p.kappa2, std::abs(p.kerr)) * target;
  double lo = 0.5 * s0, hi = 2.0 * s0;
  double flo = f(lo), fhi = f(hi);
  for (int i = 0; i < 40 && flo > 0.0; ++i) lo *= 0.5, flo = f(lo);
  for (int i = 0; i < 40 && fhi < 0.0; ++i) hi *= 2.0, fhi = f(hi);
  if (!(flo <= 0.0 && fhi >= 0.0)) throw NoConvergence("cannot bracket the two-photon drive for the target amplitude");
  std::uintmax_t iters = 200;
  const auto [a, b] =
      boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(48), iters);
  return with(0.5 * (a + b));
}

SystemParams sweep_point(const SweepSpec& spec, double value) {
  SystemParams p = spec.fixed;
  const double v = value * spec.scale;
  auto set_modulus = [](cplx& target, double mod) {
    const double ph = std::abs(target) > 0.0 ? std::arg(target) : 0.0;
    target = from_polar(mod, ph);
  };
  switch (spec.variable) {
    case SweepVariable::detuning: p.delta = v; break;
    case SweepVariable::drive1_mod: set_modulus(p.lambda1, v); break;
    case SweepVariable::kerr: p.kerr = v; break;
    case SweepVariable::lambda3_mod: set_modulus(p.lambda3, v); break;
    case SweepVariable::kappa_phi: p.kappa_phi = v; break;
    case SweepVariable::alpha_ss_sq: return tune_alpha_ss_sq(p, value);
  }
  p.validate();
  return p;
}

SweepRow evaluate_point(const SweepSpec& spec, double value) {
  SweepRow row;
  row.protocol = spec.protocol;
  row.series = spec.series;
  row.panel = spec.panel;
  row.sweep_var = std::string(sweep_variable_name(spec.variable));
  row.value = value;
  row.n_fock = spec.n_fock.value_or(0);
  SystemParams p;
  try {
    p = sweep_point(spec, value);
    row.params_hash = params_hash(p, row.n_fock);
    const FixedPointSet fps = fixed_points_general(p);
    if (!fps.bistable) throw NotBistable("not bistable with " + std::to_string(fps.points.size()) + " fixed point(s)" +
                                          (fps.diagnostic.empty() ? "" : ": " + fps.diagnostic));
    const cplx z1 = fps.stable_point(0).z, z2 = fps.stable_point(1).z;
    row.alpha_ss_sq = std::norm(z1);

    if (spec.outputs.analytic_rate && !p.has_dephasing()) {
      const RateEstimate r = switching_rates(p, fps, spec.prefactor_first, spec.prefactor_second);
      row.is_first_to_second = r.is_first_to_second;
      row.is_second_to_first = r.is_second_to_first;
      row.rate_first_to_second = r.rate_first_to_second;
      row.rate_second_to_first = r.rate_second_to_first;
      row.gap_analytic = r.gap;
    }

    if (spec.outputs.numeric_gap) {
      SpectralSummary s;
      int n = 0;
      if (spec.n_fock) {
        n = *spec.n_fock;
        if (n - 5 >= 5) {
          const TruncationReport rep = truncation_scan(p, {n - 5, n});
          row.converged = rep.converged;
        }
        s = dissipative_gap(build_lindbladian(p, n));
      } else {
        const AutoGapResult a = gap_auto_truncation(p, spec.n_fock_max);
        s = a.summary;
        n = a.n_fock;
        row.converged = a.converged;
      }
      row.n_fock = n;
      row.gap = s.gap;
      row.params_hash = params_hash(p, row.n_fock);
      const BasinWeights w = basin_weights(build_lindbladian(p, n), s, z1, z2);
      row.pop_first = w.first;
      row.pop_second = w.second;
      // Two-state balance: the rate into a well is gap times that well's
      // weight. Weights below kMinResolvedWeight are not trusted.
      if (w.second >= kMinResolvedWeight) row.numeric_rate_first_to_second = s.gap * w.second;
      if (w.first >= kMinResolvedWeight) row.numeric_rate_second_to_first = s.gap * w.first;
    }

    if (spec.outputs.instanton_action) {
      row.instanton_first = shoot_instanton(p, z1, spec.shoot).best.accumulated_action;
      row.instanton_second = shoot_instanton(p, z2, spec.shoot).best.accumulated_action;
    }
  } catch (const std::exception& e) {
    row.error = clean_message(e.what());
    if (row.error.empty()) row.error = "error";
    if (row.params_hash.empty()) row.params_hash = params_hash(spec.fixed, row.n_fock);
  }
  return row;
}

SweepTable run_sweep(const SweepSpec& spec) { return run_sweeps({spec}); }

SweepTable run_sweeps(const std::vector<SweepSpec>& specs) {
  std::vector<std::pair<int, double>> jobs;
  for (std::size_t s = 0; s < specs.size(); ++s) {
    specs[s].validate();
    for (double v : specs[s].grid) jobs.emplace_back(static_cast<int>(s), v);
  }
  SweepTable t;
  t.rows.resize(jobs.size());
  detail::parallel_for(static_cast<int>(jobs.size()), [&](int i) {
    const auto& [s, v] = jobs[static_cast<std::size_t>(i)];
    t.rows[static_cast<std::size_t>(i)] = evaluate_point(specs[static_cast<std::size_t>(s)], v);
  });
  return t;
}

std::string to_csv(const SweepTable& t) {
  std::string out;
  for (int c = 0; c < kNumColumns; ++c) {
    if (c) out += ',';
    out += kColumns[c];
  }
  out += '\n';
  for (const auto& r : t.rows) {
    const std::string cells[] = {r.protocol,
                                 r.series,
                                 r.panel,
                                 r.sweep_var,
                                 fmt(r.value),
                                 fmt(r.alpha_ss_sq),
                                 fmt(r.is_first_to_second),
                                 fmt(r.is_second_to_first),
                                 fmt(r.rate_first_to_second),
                                 fmt(r.rate_second_to_first),
                                 fmt(r.gap_analytic),
                                 fmt(r.gap),
                                 std::to_string(r.n_fock),
                                 r.converged ? "1" : "0",
                                 fmt(r.pop_first),
                                 fmt(r.pop_second),
                                 fmt(r.numeric_rate_first_to_second),
                                 fmt(r.numeric_rate_second_to_first),
                                 fmt(r.instanton_first),
                                 fmt(r.instanton_second),
                                 r.params_hash,
                                 clean_message(r.error)};
    for (int c = 0; c < kNumColumns; ++c) {
      if (c) out += ',';
      out += cells[c];
    }
    out += '\n';
  }
  return out;
}

void write_csv(const SweepTable& t, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << to_csv(t);
  if (!f) throw Error("write to '" + path + "' failed");
}

SweepTable parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InvalidParams("csv: empty input");
  const auto header = split(line, ',');
  if (static_cast<int>(header.size()) != kNumColumns) throw InvalidParams("csv: unexpected header");
  for (int c = 0; c < kNumColumns; ++c)
    if (header[static_cast<std::size_t>(c)] != kColumns[c]) throw InvalidParams("csv: unexpected column " + header[static_cast<std::size_t>(c)]);
  SweepTable t;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (static_cast<int>(f.size()) != kNumColumns) throw InvalidParams("csv: row with wrong field count");
    SweepRow r;
    r.protocol = f[0];
    r.series = f[1];
    r.panel = f[2];
    r.sweep_var = f[3];
    r.value = cell_real(f[4]);
    r.alpha_ss_sq = cell_real(f[5]);
    r.is_first_to_second = cell_real(f[6]);
    r.is_second_to_first = cell_real(f[7]);
    r.rate_first_to_second = cell_real(f[8]);
    r.rate_second_to_first = cell_real(f[9]);
    r.gap_analytic = cell_real(f[10]);
    r.gap = cell_real(f[11]);
    r.n_fock = f[12].empty() ? 0 : std::stoi(f[12]);
    r.converged = f[13] == "1";
    r.pop_first = cell_real(f[14]);
    r.pop_second = cell_real(f[15]);
    r.numeric_rate_first_to_second = cell_real(f[16]);
    r.numeric_rate_second_to_first = cell_real(f[17]);
    r.instanton_first = cell_real(f[18]);
    r.instanton_second = cell_real(f[19]);
    r.params_hash = f[20];
    r.error = f[21];
    t.rows.push_back(std::move(r));
  }
  return t;
}

SweepTable read_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str());
}

PrefactorAnchor parse_anchor(std::string_view name) {
  if (name == "largest_alpha") return PrefactorAnchor::largest_alpha;
  if (name == "least_squares") return PrefactorAnchor::least_squares;
  throw InvalidParams("unknown anchor '" + std::string(name) + "'");
}

double fit_prefactor(const std::vector<double>& analytic_is, const std::vector<double>& numeric,
                     PrefactorAnchor anchor) {
  if (analytic_is.size() != numeric.size()) throw InvalidParams("prefactor fit: series lengths differ");
  std::vector<double> logs;
  for (std::size_t i = 0; i < numeric.size(); ++i)
    if (std::isfinite(analytic_is[i]) && std::isfinite(numeric[i]) && numeric[i] > 0.0)
      logs.push_back(std::log(numeric[i]) - analytic_is[i]);
  if (logs.empty()) throw InvalidParams("prefactor fit: no overlapping points");
  if (anchor == PrefactorAnchor::largest_alpha) return std::exp(logs.back());
  double m = 0.0;
  for (double l : logs) m += l;
  return std::exp(m / static_cast<double>(logs.size()));
}

std::vector<double> parse_grid(const std::string& text) {
  const std::string t = trim(text);
  if (t.find(':') != std::string::npos) {
    const auto parts = split(t, ':');
    if (parts.size() != 3) throw InvalidParams("grid range must read start:stop:count");
    const double a = parse_real(parts[0], "grid"), b = parse_real(parts[1], "grid");
    const int n = static_cast<int>(parse_real(parts[2], "grid"));
    if (n < 1) throw InvalidParams("grid count must be positive");
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * i / (n - 1);
    return g;
  }
  std::vector<double> g;
  for (const auto& s : split(t, ','))
    if (!s.empty()) g.push_back(parse_real(s, "grid"));
  return g;
}

std::vector<SweepSpec> sweep_specs_from_config(const Config& cfg) {
  const KeyValues defaults = cfg.section("sweep") ? *cfg.section("sweep") : KeyValues{};
  std::vector<std::string> names;
  if (auto it = defaults.find("series"); it != defaults.end()) {
    for (const auto& n : split(it->second, ','))
      if (!n.empty()) names.push_back(n);
  } else {
    for (const auto& [name, kv] : cfg.sections)
      if (name.rfind("series.", 0) == 0) names.push_back(name.substr(7));
  }
  if (names.empty()) throw InvalidParams("protocol defines no series");

  std::vector<SweepSpec> specs;
  for (const auto& name : names) {
    const KeyValues* own = cfg.section("series." + name);
    if (!own) throw InvalidParams("missing section [series." + name + "]");
    KeyValues kv = defaults;
    for (const auto& [k, v] : *own) kv[k] = v;
    auto get = [&](const std::string& k, const std::string& fallback = "") {
      auto it = kv.find(k);
      return it == kv.end() ? fallback : it->second;
    };
    auto real = [&](const std::string& k, double fallback) {
      const std::string s = get(k);
      return s.empty() ? fallback : parse_real(s, k);
    };

    SweepSpec s;
    s.protocol = get("protocol", "custom");
    s.series = name;
    s.panel = get("panel", name);
    if (const std::string pr = get("preset"); !pr.empty()) {
      PresetArgs a;
      a.unit_rate = real("unit_rate", a.unit_rate);
      a.alpha0_sq = real("preset_alpha0_sq", a.alpha0_sq);
      a.kappa_phi = real("preset_kappa_phi", a.kappa_phi);
      a.kappa1_ratio = real("kappa1_ratio", a.kappa1_ratio);
      a.imperfection = parse_imperfection(get("imperfection", "none"));
      a.imperfection_strength = real("imperfection_strength", 0.0);
      a.imperfection_phase = real("imperfection_phase", 0.0);
      s.fixed = preset(parse_preset(pr), a);
    }
    apply_overrides(s.fixed, kv);
    s.variable = parse_sweep_variable(get("variable"));
    s.grid = parse_grid(get("grid"));
    s.scale = real("scale", 1.0);
    s.outputs = {};
    if (const std::string o = get("outputs"); !o.empty()) {
      s.outputs.analytic_rate = false;
      std::string items = o;
      for (char& c : items)
        if (c == ',') c = ' ';
      for (const auto& item : split(items, ' ')) {
        if (item == "analytic_rate") s.outputs.analytic_rate = true;
        else if (item == "numeric_gap") s.outputs.numeric_gap = true;
        else if (item == "instanton_action") s.outputs.instanton_action = true;
        else if (!item.empty()) throw InvalidParams("unknown output '" + item + "'");
      }
    }
    if (const std::string n = get("n_fock", "auto"); n != "auto") s.n_fock = static_cast<int>(parse_real(n, "n_fock"));
    s.n_fock_max = static_cast<int>(real("n_fock_max", s.n_fock_max));
    s.prefactor_first = real("prefactor_first", 1.0);
    s.prefactor_second = real("prefactor_second", 1.0);
    s.shoot.n_theta = static_cast<int>(real("n_theta", s.shoot.n_theta));
    s.validate();
    specs.push_back(std::move(s));
  }
  return specs;
}

std::string builtin_protocol(std::string_view name) {
#include "protocols.inc"
  throw InvalidParams("unknown protocol '" + std::string(name) + "'");
}

}  // namespace switchrate
