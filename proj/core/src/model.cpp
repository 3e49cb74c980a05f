#include "switchrate/model.hpp"

#include <cmath>
#include <cstdio>

#include "switchrate/errors.hpp"

namespace switchrate {

namespace {

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void require_rate(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0)
    throw InvalidParams(std::string(name) + " must be finite and nonnegative");
}

}  // namespace

void SystemParams::validate() const {
  require_rate(kappa1, "kappa1");
  require_rate(kappa2, "kappa2");
  require_rate(kappa_phi, "kappa_phi");
  if (!std::isfinite(delta) || !std::isfinite(kerr))
    throw InvalidParams("delta and kerr must be finite");
  if (!finite(lambda1) || !finite(lambda2) || !finite(lambda3))
    throw InvalidParams("drive amplitudes must be finite");
  if (alpha0_sq && !finite(*alpha0_sq)) throw InvalidParams("alpha0_sq must be finite");
}

std::string SystemParams::unit_name() const {
  if (!unit.empty()) return unit;
  return kappa2 > 0.0 ? "kappa2" : "kappa1";
}

DerivedCoeffs derive_coeffs(const SystemParams& p, bool need_potential) {
  p.validate();
  DerivedCoeffs c{cplx(p.delta, -0.5 * p.kappa1), cplx(p.kerr, p.kappa2)};
  if (need_potential && c.k2 == cplx(0.0, 0.0))
    throw InvalidParams("potential needs kerr or kappa2 nonzero");
  return c;
}

cplx drive_from_alpha0_sq(double kappa2, cplx alpha0_sq) { return 0.5 * I * kappa2 * alpha0_sq; }

cplx alpha0_sq_from_drive(double kappa2, cplx lambda2) {
  if (kappa2 <= 0.0) throw InvalidParams("alpha0_sq needs kappa2 > 0");
  return -2.0 * I * lambda2 / kappa2;
}

SystemParams to_drive_form(const SystemParams& p) {
  SystemParams q = p;
  if (p.alpha0_sq) {
    q.lambda2 += drive_from_alpha0_sq(p.kappa2, *p.alpha0_sq);
    q.alpha0_sq.reset();
  }
  return q;
}

cplx from_polar(double modulus, double phase) { return std::polar(modulus, phase); }

Preset parse_preset(std::string_view name) {
  if (name == "kerr_oscillator") return Preset::kerr_oscillator;
  if (name == "dissipative_cat") return Preset::dissipative_cat;
  if (name == "dephased_cat") return Preset::dephased_cat;
  throw InvalidParams("unknown preset '" + std::string(name) + "'");
}

std::string_view preset_name(Preset p) {
  switch (p) {
    case Preset::kerr_oscillator: return "kerr_oscillator";
    case Preset::dissipative_cat: return "dissipative_cat";
    case Preset::dephased_cat: return "dephased_cat";
  }
  return "?";
}

Imperfection parse_imperfection(std::string_view name) {
  if (name == "none" || name.empty()) return Imperfection::none;
  if (name == "detuning" || name == "delta") return Imperfection::detuning;
  if (name == "kerr") return Imperfection::kerr;
  if (name == "lambda3") return Imperfection::lambda3;
  throw InvalidParams("unknown imperfection '" + std::string(name) + "'");
}

std::string_view imperfection_name(Imperfection i) {
  switch (i) {
    case Imperfection::none: return "none";
    case Imperfection::detuning: return "detuning";
    case Imperfection::kerr: return "kerr";
    case Imperfection::lambda3: return "lambda3";
  }
  return "?";
}

SystemParams preset(Preset which, const PresetArgs& a) {
  SystemParams p;
  const double u = a.unit_rate;
  switch (which) {
    case Preset::kerr_oscillator:
      // 2 delta/kappa1 = 6.33, K/kappa1 = 0.1, 2|lambda1|/kappa1 = 10.
      p.kappa1 = u;
      p.delta = 3.165 * u;
      p.kerr = 0.1 * u;
      p.lambda1 = 5.0 * u;
      p.unit = "kappa1";
      break;
    case Preset::dissipative_cat:
    case Preset::dephased_cat:
      p.kappa2 = u;
      p.kappa1 = a.kappa1_ratio * u;
      p.lambda2 = drive_from_alpha0_sq(u, a.alpha0_sq);
      p.unit = "kappa2";
      if (which == Preset::dephased_cat) p.kappa_phi = a.kappa_phi * u;
      switch (a.imperfection) {
        case Imperfection::none: break;
        case Imperfection::detuning: p.delta = a.imperfection_strength * u; break;
        case Imperfection::kerr: p.kerr = a.imperfection_strength * u; break;
        case Imperfection::lambda3:
          p.lambda3 = from_polar(a.imperfection_strength * u, a.imperfection_phase);
          break;
      }
      break;
  }
  p.validate();
  return p;
}

std::string describe(const SystemParams& p) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "delta=%.17g kerr=%.17g kappa1=%.17g kappa2=%.17g kappa_phi=%.17g "
                "lambda1=(%.17g,%.17g) lambda2=(%.17g,%.17g) lambda3=(%.17g,%.17g)",
                p.delta, p.kerr, p.kappa1, p.kappa2, p.kappa_phi, p.lambda1.real(),
                p.lambda1.imag(), p.lambda2.real(), p.lambda2.imag(), p.lambda3.real(),
                p.lambda3.imag());
  std::string s = buf;
  if (p.alpha0_sq) {
    std::snprintf(buf, sizeof buf, " alpha0_sq=(%.17g,%.17g)", p.alpha0_sq->real(),
                  p.alpha0_sq->imag());
    s += buf;
  }
  return s + " unit=" + p.unit_name();
}

std::string params_hash(const SystemParams& p, int n_fock) {
  // FNV-1a over the canonical text form.
  const std::string text = describe(p) + " n_fock=" + std::to_string(n_fock);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace switchrate
