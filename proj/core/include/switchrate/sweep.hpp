#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "switchrate/config.hpp"
#include "switchrate/instanton.hpp"
#include "switchrate/model.hpp"

namespace switchrate {

enum class SweepVariable { detuning, drive1_mod, alpha_ss_sq, kerr, lambda3_mod, kappa_phi };

SweepVariable parse_sweep_variable(std::string_view name);
std::string_view sweep_variable_name(SweepVariable v);

struct SweepOutputs {
  bool analytic_rate = true;
  bool numeric_gap = false;
  bool instanton_action = false;
};

// One series of a sweep. The swept parameter is value * scale, except for
// alpha_ss_sq, where the two-photon drive is tuned until the bright stable
// point has |alpha|^2 = value.
struct SweepSpec {
  std::string protocol = "custom";
  std::string series;
  std::string panel;
  SweepVariable variable = SweepVariable::detuning;
  std::vector<double> grid;
  double scale = 1.0;
  SystemParams fixed;
  SweepOutputs outputs;
  std::optional<int> n_fock;  // empty: grow the truncation until the gap settles
  int n_fock_max = 40;
  double prefactor_first = 1.0;
  double prefactor_second = 1.0;
  ShootOptions shoot;

  // Throws InvalidParams for an empty or non-monotone grid.
  void validate() const;
};

// Numeric fields are NaN when not computed; CSV leaves them empty.
struct SweepRow {
  std::string protocol;
  std::string series;
  std::string panel;
  std::string sweep_var;
  double value = 0.0;
  double alpha_ss_sq = 0.0;
  double is_first_to_second = 0.0;
  double is_second_to_first = 0.0;
  double rate_first_to_second = 0.0;
  double rate_second_to_first = 0.0;
  double gap_analytic = 0.0;
  double gap = 0.0;
  int n_fock = 0;
  bool converged = false;
  double pop_first = 0.0;   // steady-state weight of the first basin, from the slow left eigenmode
  double pop_second = 0.0;
  double numeric_rate_first_to_second = 0.0;  // gap times the population of the destination
  double numeric_rate_second_to_first = 0.0;
  double instanton_first = 0.0;
  double instanton_second = 0.0;
  std::string params_hash;
  std::string error;

  SweepRow();
};

struct SweepTable {
  std::vector<SweepRow> rows;
  int n_errors() const;
};

// Parameters at one grid value.
SystemParams sweep_point(const SweepSpec& spec, double value);
// Rescales the two-photon drive (alpha0_sq when present, lambda2 otherwise)
// so that the bright stable point has |alpha|^2 = target.
SystemParams tune_alpha_ss_sq(const SystemParams& p, double target);

SweepRow evaluate_point(const SweepSpec& spec, double value);
SweepTable run_sweep(const SweepSpec& spec);
// All series, points evaluated in a work pool, rows in series then grid order.
SweepTable run_sweeps(const std::vector<SweepSpec>& specs);

std::string to_csv(const SweepTable& t);
void write_csv(const SweepTable& t, const std::string& path);
SweepTable parse_csv(const std::string& text);
SweepTable read_csv(const std::string& path);

enum class PrefactorAnchor { largest_alpha, least_squares };
PrefactorAnchor parse_anchor(std::string_view name);

// c such that numeric ~ c exp(analytic_is). Pairs with a non-finite or
// non-positive numeric value are skipped; throws InvalidParams when none remain.
double fit_prefactor(const std::vector<double>& analytic_is, const std::vector<double>& numeric,
                     PrefactorAnchor anchor);

// Series definitions from a protocol file: a [sweep] section with defaults
// and a `series` list, plus one [series.NAME] section per series.
std::vector<SweepSpec> sweep_specs_from_config(const Config& cfg);
// Text of the default protocol files shipped in configs/ (fig2, fig3, fig4).
std::string builtin_protocol(std::string_view name);

std::vector<double> parse_grid(const std::string& text);

}  // namespace switchrate
