#include "switchrate/keldysh.hpp"

#include <Eigen/LU>
#include <cmath>
#include <numbers>

#include "switchrate/errors.hpp"

namespace switchrate {

namespace {

void require_no_dephasing(const SystemParams& p, const char* what) {
  if (p.kappa_phi > 0.0)
    throw InvalidParams(std::string(what) + " requires kappa_phi = 0 (no time-reversed solution)");
}

// Log with its cut along the negative imaginary axis.
cplx log_cut(cplx w) { return std::log(-I * w) + I * (std::numbers::pi / 2.0); }

// Deterministic uniform doubles from a counter, independent of the standard
// library's distribution implementations.
std::uint64_t splitmix64(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform(std::uint64_t& s) { return static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53; }

}  // namespace

Vec2c coordinates(const PhaseSpaceState& s) { return Vec2c(s.b_cl, s.b_cl_bar); }
Vec2c momenta(const PhaseSpaceState& s) { return Vec2c(s.b_q_bar, -s.b_q); }

PhaseSpaceState make_state(const Vec2c& x, const Vec2c& p) {
  return {x[0], x[1], -p[1], p[0]};
}

double rate_scale(const SystemParams& p) {
  const SystemParams q = to_drive_form(p);
  const DerivedCoeffs c = derive_coeffs(q);
  return std::max({std::abs(c.k1), std::abs(c.k2), std::abs(q.lambda1), std::abs(q.lambda2),
                   std::abs(q.lambda3), q.kappa_phi, 1e-300});
}

TensorDerivatives tensor_derivatives(const SystemParams& p, const Vec2c& x, DephasingTensors form) {
  const SystemParams q = to_drive_form(p);
  const DerivedCoeffs c = derive_coeffs(q);
  const cplx b = x[0], bb = x[1];
  const cplx l1 = q.lambda1, l2 = q.lambda2, l3 = q.lambda3;
  const cplx k1 = c.k1, k2 = c.k2;

  const cplx d11 = 0.5 * I * k2 * b * b - I * l2 - I * l3 * b;
  const cplx d11p = I * k2 * b - I * l3;
  const cplx d11pp = I * k2;
  const cplx d22 = -0.5 * I * std::conj(k2) * bb * bb + I * std::conj(l2) + I * std::conj(l3) * bb;
  const cplx d22p = -I * std::conj(k2) * bb + I * std::conj(l3);
  const cplx d22pp = -I * std::conj(k2);

  TensorDerivatives t;
  t.a[0] = 2.0 * bb * d11 - I * k1 * b - I * std::conj(l3) * b * b - I * l1;
  t.a[1] = 2.0 * b * d22 + I * std::conj(k1) * bb + I * l3 * bb * bb + I * std::conj(l1);
  t.d << d11, 0.0, 0.0, d22;

  t.da(0, 0) = 2.0 * bb * d11p - I * k1 - 2.0 * I * std::conj(l3) * b;
  t.da(1, 0) = 2.0 * d11;
  t.da(0, 1) = 2.0 * d22;
  t.da(1, 1) = 2.0 * b * d22p + I * std::conj(k1) + 2.0 * I * l3 * bb;

  t.dd[0] = Mat2c::Zero();
  t.dd[1] = Mat2c::Zero();
  t.dd[0](0, 0) = d11p;
  t.dd[1](1, 1) = d22p;

  t.d2a[0] = Mat2c::Zero();
  t.d2a[1] = Mat2c::Zero();
  t.d2a[0](0, 0) = 2.0 * bb * d11pp - 2.0 * I * std::conj(l3);
  t.d2a[0](0, 1) = t.d2a[0](1, 0) = 2.0 * d11p;
  t.d2a[1](1, 1) = 2.0 * b * d22pp + 2.0 * I * l3;
  t.d2a[1](0, 1) = t.d2a[1](1, 0) = 2.0 * d22p;

  for (auto& row : t.d2d)
    for (auto& m : row) m = Mat2c::Zero();
  t.d2d[0][0](0, 0) = d11pp;
  t.d2d[1][1](1, 1) = d22pp;

  const double kp = q.kappa_phi;
  if (kp > 0.0) {
    if (form == DephasingTensors::derived) {
      t.a += -0.5 * kp * x;
      t.d(0, 0) += -0.5 * kp * b * b;
      t.d(1, 1) += -0.5 * kp * bb * bb;
      t.d(0, 1) += 0.5 * kp * b * bb;
      t.d(1, 0) += 0.5 * kp * b * bb;
      t.da(0, 0) += -0.5 * kp;
      t.da(1, 1) += -0.5 * kp;
      Mat2c d1, d2;
      d1 << -kp * b, 0.5 * kp * bb, 0.5 * kp * bb, 0.0;
      d2 << 0.0, 0.5 * kp * b, 0.5 * kp * b, -kp * bb;
      t.dd[0] += d1;
      t.dd[1] += d2;
      t.d2d[0][0](0, 0) += -kp;
      t.d2d[1][1](1, 1) += -kp;
      t.d2d[0][1](0, 1) += 0.5 * kp;
      t.d2d[0][1](1, 0) += 0.5 * kp;
      t.d2d[1][0](0, 1) += 0.5 * kp;
      t.d2d[1][0](1, 0) += 0.5 * kp;
    } else {
      const cplx s = 0.5 - b * bb;
      t.a[0] += kp * b * s;
      t.a[1] += kp * bb * s;
      t.d(0, 1) += 0.5 * kp;
      t.d(1, 0) += 0.5 * kp;
      t.da(0, 0) += kp * (0.5 - 2.0 * b * bb);
      t.da(1, 0) += -kp * b * b;
      t.da(0, 1) += -kp * bb * bb;
      t.da(1, 1) += kp * (0.5 - 2.0 * b * bb);
      t.d2a[0](0, 0) += -2.0 * kp * bb;
      t.d2a[0](0, 1) += -2.0 * kp * b;
      t.d2a[0](1, 0) += -2.0 * kp * b;
      t.d2a[1](1, 1) += -2.0 * kp * b;
      t.d2a[1](0, 1) += -2.0 * kp * bb;
      t.d2a[1](1, 0) += -2.0 * kp * bb;
    }
  }
  return t;
}

DriftDiffusion drift_diffusion(const SystemParams& p, const Vec2c& x, DephasingTensors form) {
  const TensorDerivatives t = tensor_derivatives(p, x, form);
  return {t.a, t.d};
}

cplx lindbladian_density(const SystemParams& p, const PhaseSpaceState& s) {
  const DriftDiffusion dd = drift_diffusion(p, coordinates(s));
  const Vec2c mom = momenta(s);
  // Plain bilinear forms (Eigen's dot would conjugate).
  return (mom.transpose() * dd.a_vec)(0, 0) + (mom.transpose() * dd.d * mom)(0, 0);
}

QuantumPair tr_parametrization(const SystemParams& p, const Vec2c& x) {
  require_no_dephasing(p, "time-reversed parametrization");
  const SystemParams q = to_drive_form(p);
  const DerivedCoeffs c = derive_coeffs(q);
  const cplx b = x[0], bb = x[1];
  const cplx den = c.k2 * b * b - 2.0 * q.lambda2 - 2.0 * q.lambda3 * b;
  const cplx den_bar = std::conj(c.k2) * bb * bb - 2.0 * std::conj(q.lambda2) -
                       2.0 * std::conj(q.lambda3) * bb;
  const double tol = 1e-12 * std::max(1.0, std::abs(c.k2));
  if (std::abs(den) < tol || std::abs(den_bar) < tol)
    throw SingularDiffusion("diffusion vanishes at the requested point");
  QuantumPair out;
  out.b_q = 2.0 * b -
            (2.0 * std::conj(c.k1) * bb + 2.0 * q.lambda3 * bb * bb + 2.0 * std::conj(q.lambda1)) /
                den_bar;
  out.b_q_bar = -2.0 * bb + (2.0 * c.k1 * b + 2.0 * std::conj(q.lambda3) * b * b + 2.0 * q.lambda1) / den;
  return out;
}

Vec2c tr_momenta(const SystemParams& p, const Vec2c& x, DephasingTensors form) {
  const DriftDiffusion dd = drift_diffusion(p, x, form);
  const cplx det = dd.d.determinant();
  if (std::abs(det) < 1e-24 * std::max(1.0, dd.d.squaredNorm()))
    throw SingularDiffusion("diffusion matrix is singular at the requested point");
  return -dd.d.inverse() * dd.a_vec;
}

Vec2c curl_field(const SystemParams& p, CurlCondition which, const Vec2c& x, DephasingTensors form) {
  const TensorDerivatives t = tensor_derivatives(p, x, form);
  Vec2c rhs = -t.a;
  if (which == CurlCondition::fokker_planck_Z) {
    // (div D)_i = sum_j d_j D_ij
    for (int i = 0; i < 2; ++i) rhs[i] += t.dd[0](i, 0) + t.dd[1](i, 1);
  }
  return t.d.partialPivLu().solve(rhs);
}

CurlReport check_curl_condition(const SystemParams& p, CurlCondition which, const SampleBox& box,
                                int n_samples, std::uint64_t seed, DephasingTensors form) {
  const SystemParams q = to_drive_form(p);
  const DerivedCoeffs c = derive_coeffs(q);
  std::vector<cplx> zeros, zeros_bar;
  if (q.kappa_phi == 0.0 && c.k2 != cplx{}) {
    const cplx disc = std::sqrt(q.lambda3 * q.lambda3 + 2.0 * q.lambda2 * c.k2);
    for (cplx z : {(q.lambda3 + disc) / c.k2, (q.lambda3 - disc) / c.k2}) {
      zeros.push_back(z);
      zeros_bar.push_back(std::conj(z));
    }
  }

  CurlReport rep;
  for (int n = 0; n < n_samples; ++n) {
    std::uint64_t s = seed ^ (0x5851f42d4c957f2dULL * static_cast<std::uint64_t>(n + 1));
    Vec2c x;
    for (int k = 0; k < 2; ++k)
      x[k] = box.center + box.half_width * cplx(2.0 * uniform(s) - 1.0, 2.0 * uniform(s) - 1.0);

    bool skip = false;
    for (cplx z : zeros) skip |= std::abs(x[0] - z) < 1e-6;
    for (cplx z : zeros_bar) skip |= std::abs(x[1] - z) < 1e-6;
    const double h = 1e-5 * (1.0 + x.norm());
    if (!skip) {
      // Every stencil point needs an invertible diffusion.
      for (int k = 0; k < 5 && !skip; ++k) {
        Vec2c y = x;
        if (k > 0) y[(k - 1) / 2] += ((k - 1) % 2 == 0 ? h : -h);
        const Mat2c d = tensor_derivatives(q, y, form).d;
        skip = std::abs(d.determinant()) < 1e-12 * std::max(1.0, d.squaredNorm());
      }
    }
    if (skip) {
      ++rep.skipped;
      continue;
    }
    auto z_at = [&](int comp, double dh) {
      Vec2c y = x;
      y[comp] += dh;
      return curl_field(q, which, y, form);
    };
    const cplx d1z2 = (z_at(0, h)[1] - z_at(0, -h)[1]) / (2.0 * h);
    const cplx d2z1 = (z_at(1, h)[0] - z_at(1, -h)[0]) / (2.0 * h);
    rep.max_curl = std::max(rep.max_curl, std::abs(d1z2 - d2z1));
    rep.mean_d1z2 += d1z2;
    rep.mean_d2z1 += d2z1;
    ++rep.evaluated;
  }
  if (rep.evaluated == 0) throw AllSamplesSkipped("diffusion singular at every sample");
  rep.mean_d1z2 /= static_cast<double>(rep.evaluated);
  rep.mean_d2z1 /= static_cast<double>(rep.evaluated);
  rep.pass = rep.max_curl < 1e-6;
  return rep;
}

PotentialCoeffs potential_coeffs(const SystemParams& p) {
  const SystemParams q = to_drive_form(p);
  const DerivedCoeffs c = derive_coeffs(q, true);
  PotentialCoeffs pc;
  pc.k2 = c.k2;
  pc.lambda3 = q.lambda3;
  const cplx disc = std::sqrt(q.lambda3 * q.lambda3 + 2.0 * q.lambda2 * c.k2);
  pc.z_plus = (q.lambda3 + disc) / c.k2;
  pc.z_minus = (q.lambda3 - disc) / c.k2;
  pc.a_coef = -2.0 * c.k1 - 4.0 * std::norm(q.lambda3) / c.k2;
  pc.b_coef = -2.0 * q.lambda1 - 4.0 * std::conj(q.lambda3) * q.lambda2 / c.k2;
  pc.confluent = std::abs(pc.z_plus - pc.z_minus) < 1e-9 * (1.0 + std::abs(pc.z_plus));
  if (pc.confluent) {
    pc.z_plus = pc.z_minus = q.lambda3 / c.k2;
  } else {
    pc.c_plus = (pc.a_coef * pc.z_plus + pc.b_coef) / (pc.z_plus - pc.z_minus);
    pc.c_minus = (pc.a_coef * pc.z_minus + pc.b_coef) / (pc.z_minus - pc.z_plus);
  }
  try {
    pc.offset = potential_phi(pc, cplx(0.0, 0.0));
  } catch (const BranchPoint&) {
    // Origin on a live root: no natural zero, keep the raw expression.
  }
  return pc;
}

double potential_phi(const PotentialCoeffs& c, cplx z) {
  // A root only matters when a term is attached to it; the pure cat has none.
  const bool plus_live = c.confluent ? (c.a_coef != cplx{} || c.a_coef * c.z_plus + c.b_coef != cplx{})
                                     : c.c_plus != cplx{};
  const bool minus_live = c.confluent ? plus_live : c.c_minus != cplx{};
  if ((plus_live && std::abs(z - c.z_plus) < 1e-12) || (minus_live && std::abs(z - c.z_minus) < 1e-12))
    throw BranchPoint("potential evaluated at a branch point");
  cplx psi = -2.0 * std::conj(c.lambda3) * z / c.k2;
  if (c.confluent) {
    if (!plus_live) return 2.0 * std::norm(z) + 2.0 * psi.real() - c.offset;
    const cplx w = z - c.z_plus;
    psi += c.a_coef / c.k2 * log_cut(w) - (c.a_coef * c.z_plus + c.b_coef) / (c.k2 * w);
  } else {
    if (plus_live) psi += c.c_plus / c.k2 * log_cut(z - c.z_plus);
    if (minus_live) psi += c.c_minus / c.k2 * log_cut(z - c.z_minus);
  }
  return 2.0 * std::norm(z) + 2.0 * psi.real() - c.offset;
}

double potential_phi(const SystemParams& p, cplx z) {
  require_no_dephasing(p, "potential");
  return potential_phi(potential_coeffs(p), z);
}

cplx potential_g(const SystemParams& p, cplx z) {
  const SystemParams q = to_drive_form(p);
  const DerivedCoeffs c = derive_coeffs(q, true);
  return -(2.0 * c.k1 * z + 2.0 * std::conj(q.lambda3) * z * z + 2.0 * q.lambda1) /
         (c.k2 * z * z - 2.0 * q.lambda2 - 2.0 * q.lambda3 * z);
}

double action(const SystemParams& p, cplx from_fp, cplx to_unstable, const ActionOptions& opt) {
  require_no_dephasing(p, "action");
  for (cplx z : {from_fp, to_unstable}) {
    const double r = std::abs(fixed_point_residual(p, z));
    if (!(r < 1e-8)) throw NotAFixedPoint("action endpoint is not a fixed point");
  }
  if (from_fp == to_unstable) return 0.0;

  const PotentialCoeffs pc = potential_coeffs(p);
  double is = potential_phi(pc, to_unstable) - potential_phi(pc, from_fp);

  auto warn = [&](const std::string& m) {
    if (opt.warnings) opt.warnings->push_back(m);
  };

  if (opt.policy == BranchPolicy::path_continuation) {
    const FixedPointSet fps = fixed_points_general(p);
    if (!fps.bistable) {
      warn("not bistable; action uses the fixed branch cut");
    } else {
      int target = -1;
      for (int i = 0; i < 2; ++i)
        if (std::abs(fps.stable_point(i).z - from_fp) < 1e-6 * (1.0 + std::abs(from_fp))) target = i;
      if (target < 0 || std::abs(fps.saddle().z - to_unstable) > 1e-6 * (1.0 + std::abs(to_unstable)))
        throw NotAFixedPoint("action endpoints do not match the stable/saddle points");

      std::vector<std::pair<cplx, cplx>> logs;  // (branch point, coefficient)
      if (pc.confluent) {
        logs.emplace_back(pc.z_plus, pc.a_coef / pc.k2);
      } else {
        logs.emplace_back(pc.z_plus, pc.c_plus / pc.k2);
        logs.emplace_back(pc.z_minus, pc.c_minus / pc.k2);
      }
      std::vector<cplx> watch;
      for (auto& l : logs) watch.push_back(l.first);
      const std::vector<cplx> path = heteroclinic_path(p, fps, target, watch);

      for (const auto& [w, coef] : logs) {
        double winding = 0.0;
        for (std::size_t k = 0; k + 1 < path.size(); ++k)
          winding += std::arg((path[k + 1] - w) / (path[k] - w));
        const double cut = log_cut(from_fp - w).imag() - log_cut(to_unstable - w).imag();
        // Continuous minus cut value of [Ln(alpha_u - w) - Ln(alpha_i - w)].
        is += 2.0 * (coef * (-I) * (winding - cut)).real();
      }
    }
  }
  if (is > 0.0) warn("positive action exponent: parameters outside the bistable assumptions");
  return is;
}

RateEstimate switching_rates(const SystemParams& p, const FixedPointSet& fps, double pf1, double pf2,
                             BranchPolicy policy) {
  if (!fps.bistable) throw NotBistable("switching rates need a bistable set: " + fps.diagnostic);
  RateEstimate r;
  r.from_first = fps.stable_point(0).z;
  r.from_second = fps.stable_point(1).z;
  r.saddle = fps.saddle().z;
  ActionOptions opt{policy, &r.warnings};
  r.is_first_to_second = action(p, r.from_first, r.saddle, opt);
  r.is_second_to_first = action(p, r.from_second, r.saddle, opt);
  r.prefactor_first = pf1;
  r.prefactor_second = pf2;
  r.rate_first_to_second = pf1 * std::exp(r.is_first_to_second);
  r.rate_second_to_first = pf2 * std::exp(r.is_second_to_first);
  r.gap = 0.5 * (r.rate_first_to_second + r.rate_second_to_first);
  return r;
}

RateEstimate switching_rates(const SystemParams& p, double pf1, double pf2, BranchPolicy policy) {
  return switching_rates(p, fixed_points_general(p), pf1, pf2, policy);
}

RateEstimate switching_rates(const SystemParams& p, std::optional<double> prefactor, BranchPolicy policy) {
  const double c = prefactor.value_or(1.0);
  return switching_rates(p, c, c, policy);
}

double complexp_potential(const SystemParams& p, cplx z) {
  require_no_dephasing(p, "complex-P potential");
  const DriftDiffusion dd = drift_diffusion(p, Vec2c(z, std::conj(z)));
  const cplx prod = dd.d(0, 0) * dd.d(1, 1);
  if (std::abs(dd.d(0, 0)) < 1e-12 || std::abs(dd.d(1, 1)) < 1e-12)
    throw SingularDiffusion("diffusion vanishes at the requested point");
  return potential_phi(p, z) - std::log(std::abs(prod));
}

}  // namespace switchrate
