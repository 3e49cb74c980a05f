#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace switchrate {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};

// Microscopic parameters of the single-mode master equation
//   drho/dt = -i[H, rho] + kappa1 D[a] + kappa2 D[a^2 - alpha0_sq] + kappa_phi D[a^dag a]
//   H = delta a^dag a - (kerr/2) a^dag^2 a^2
//       + (lambda1 a^dag + lambda2 a^dag^2 + lambda3 a^dag^2 a + h.c.)
// alpha0_sq is optional; when absent the two-photon jump is plain a^2.
struct SystemParams {
  double delta = 0.0;
  double kerr = 0.0;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  cplx lambda1{};
  cplx lambda2{};
  cplx lambda3{};
  double kappa_phi = 0.0;
  std::optional<cplx> alpha0_sq;
  std::string unit;  // empty selects the default, see unit_name()

  // Throws InvalidParams on negative rates or non-finite entries.
  void validate() const;
  // "kappa2" when kappa2 > 0, otherwise "kappa1", unless set explicitly.
  std::string unit_name() const;
  bool has_dephasing() const { return kappa_phi > 0.0; }
};

struct DerivedCoeffs {
  cplx k1;  // delta - i kappa1/2
  cplx k2;  // kerr + i kappa2
};

// With need_potential set, K = kappa2 = 0 is rejected since every potential
// formula divides by k2.
DerivedCoeffs derive_coeffs(const SystemParams& p, bool need_potential = false);

// Folds alpha0_sq into the two-photon drive: kappa2 D[a^2 - c] equals
// kappa2 D[a^2] plus a drive lambda2 += i kappa2 c / 2.
SystemParams to_drive_form(const SystemParams& p);
// Inverse map, assuming the whole lambda2 came from the dissipator.
cplx alpha0_sq_from_drive(double kappa2, cplx lambda2);
cplx drive_from_alpha0_sq(double kappa2, cplx alpha0_sq);

cplx from_polar(double modulus, double phase);

enum class Preset { kerr_oscillator, dissipative_cat, dephased_cat };
enum class Imperfection { none, detuning, kerr, lambda3 };

Preset parse_preset(std::string_view name);
std::string_view preset_name(Preset p);
Imperfection parse_imperfection(std::string_view name);
std::string_view imperfection_name(Imperfection i);

// Free knobs of the presets. Rates are in units of `unit_rate` (kappa1 for
// the Kerr oscillator, kappa2 for the cat presets).
struct PresetArgs {
  double unit_rate = 1.0;
  double alpha0_sq = 4.0;
  double kappa_phi = 0.0;  // dephased_cat only, in units of kappa2
  double kappa1_ratio = 0.01;  // kappa1/kappa2 for the cat presets
  Imperfection imperfection = Imperfection::none;
  double imperfection_strength = 0.0;
  double imperfection_phase = 0.0;  // lambda3 imperfection only
};

SystemParams preset(Preset which, const PresetArgs& args = {});

// Short hex digest of the parameters plus truncation, used as a provenance
// token in every CSV row. Stable across runs and platforms.
std::string params_hash(const SystemParams& p, int n_fock = 0);
std::string describe(const SystemParams& p);

}  // namespace switchrate
