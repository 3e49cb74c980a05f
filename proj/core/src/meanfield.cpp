#include "switchrate/meanfield.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <numbers>

#include "switchrate/errors.hpp"

namespace switchrate {

namespace {

struct Partials {
  cplx g;       // fixed-point polynomial, i d alpha/dt
  cplx dz;      // d(d alpha/dt)/d alpha
  cplx dzbar;   // d(d alpha/dt)/d alpha*
};

Partials partials(const SystemParams& q, cplx z) {
  const DerivedCoeffs c = derive_coeffs(q);
  const cplx zb = std::conj(z);
  const cplx l3b = std::conj(q.lambda3);
  const cplx k1 = c.k1 - 0.5 * I * q.kappa_phi;
  const cplx g = z * k1 - z * z * zb * c.k2 + q.lambda1 + 2.0 * zb * q.lambda2 +
                 z * z * l3b + 2.0 * z * zb * q.lambda3;
  const cplx gz = k1 - 2.0 * z * zb * c.k2 + 2.0 * z * l3b + 2.0 * zb * q.lambda3;
  const cplx gzb = -z * z * c.k2 + 2.0 * q.lambda2 + 2.0 * z * q.lambda3;
  return {g, -I * gz, -I * gzb};
}

Eigen::Matrix2d real_jacobian(cplx a, cplx b) {
  Eigen::Matrix2d j;
  j << (a + b).real(), -(a - b).imag(), (a + b).imag(), (a - b).real();
  return j;
}

std::array<cplx, 2> eig2(const Eigen::Matrix2d& j) {
  const double tr = j.trace();
  const double det = j.determinant();
  const cplx disc = std::sqrt(cplx(tr * tr / 4.0 - det, 0.0));
  return {tr / 2.0 + disc, tr / 2.0 - disc};
}

bool is_stable(const std::array<cplx, 2>& e) { return e[0].real() < 0.0 && e[1].real() < 0.0; }

void order_points(std::vector<FixedPoint>& pts) {
  auto key = [](const FixedPoint& f) {
    const bool st = f.stability == Stability::stable;
    // stable: |z| descending; unstable: |z| ascending; ties by Re then Im, descending.
    return std::tuple<int, double, double, double>(st ? 0 : 1, st ? -std::abs(f.z) : std::abs(f.z),
                                                   -f.z.real(), -f.z.imag());
  };
  std::sort(pts.begin(), pts.end(), [&](const FixedPoint& a, const FixedPoint& b) {
    auto ka = key(a), kb = key(b);
    // Treat moduli equal to 1e-9 as ties so symmetric pairs sort by Re.
    if (std::get<0>(ka) != std::get<0>(kb)) return std::get<0>(ka) < std::get<0>(kb);
    if (std::abs(std::get<1>(ka) - std::get<1>(kb)) > 1e-9 * (1.0 + std::abs(std::get<1>(ka))))
      return std::get<1>(ka) < std::get<1>(kb);
    if (std::get<2>(ka) != std::get<2>(kb)) return std::get<2>(ka) < std::get<2>(kb);
    return std::get<3>(ka) < std::get<3>(kb);
  });
}

void finalize(FixedPointSet& set, double separation) {
  order_points(set.points);
  int ns = 0, nu = 0;
  for (const auto& f : set.points) (f.stability == Stability::stable ? ns : nu)++;
  set.bistable = ns == 2 && nu == 1;
  if (ns > 2 || ns + nu > 3)
    set.diagnostic = "found " + std::to_string(ns) + " stable and " + std::to_string(nu) +
                     " unstable points, outside the two-well picture";
  if (set.bistable) {
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = i + 1; j < 3; ++j)
        if (std::abs(set.points[i].z - set.points[j].z) <= separation) {
          set.bistable = false;
          set.diagnostic = "fixed points closer than the separation threshold";
        }
  }
}

FixedPoint make_point(const SystemParams& q, cplx z) {
  FixedPoint f;
  f.z = z;
  f.residual = std::abs(fixed_point_residual(q, z));
  auto [st, eigs] = classify_stability(q, z);
  f.stability = st;
  f.jacobian_eigs = eigs;
  return f;
}

}  // namespace

std::vector<FixedPoint> FixedPointSet::stable() const {
  std::vector<FixedPoint> out;
  for (const auto& f : points)
    if (f.stability == Stability::stable) out.push_back(f);
  return out;
}

std::vector<FixedPoint> FixedPointSet::unstable() const {
  std::vector<FixedPoint> out;
  for (const auto& f : points)
    if (f.stability == Stability::unstable) out.push_back(f);
  return out;
}

const FixedPoint& FixedPointSet::stable_point(int i) const {
  if (!bistable) throw NotBistable("parameter set is not bistable: " + diagnostic);
  if (i < 0 || i > 1) throw std::out_of_range("stable point index");
  return points[static_cast<std::size_t>(i)];
}

const FixedPoint& FixedPointSet::saddle() const {
  if (!bistable) throw NotBistable("parameter set is not bistable: " + diagnostic);
  return points[2];
}

cplx meanfield_rhs(const SystemParams& p, cplx z) {
  const SystemParams q = to_drive_form(p);
  return -I * partials(q, z).g;
}

cplx fixed_point_residual(const SystemParams& p, cplx z) {
  return partials(to_drive_form(p), z).g;
}

Eigen::Matrix2d meanfield_jacobian(const SystemParams& p, cplx z) {
  const Partials d = partials(to_drive_form(p), z);
  return real_jacobian(d.dz, d.dzbar);
}

std::pair<Stability, std::array<cplx, 2>> classify_stability(const SystemParams& p, cplx z) {
  const SystemParams q = to_drive_form(p);
  const DerivedCoeffs c = derive_coeffs(q);
  const double r = std::abs(z);
  // Size of the largest term of the polynomial, so the test is scale free.
  const double size = 1.0 + std::abs(q.lambda1) + std::abs(c.k1) * r + 2.0 * std::abs(q.lambda2) * r +
                      3.0 * std::abs(q.lambda3) * r * r + std::abs(c.k2) * r * r * r;
  const double res = std::abs(fixed_point_residual(p, z));
  if (!(res < 1e-8 * size)) throw NotAFixedPoint("residual " + std::to_string(res) + " too large");
  auto e = eig2(meanfield_jacobian(p, z));
  return {is_stable(e) ? Stability::stable : Stability::unstable, e};
}

FixedPointSet fixed_points_general(const SystemParams& p, const MultistartOptions& opt) {
  const SystemParams q = to_drive_form(p);
  const DerivedCoeffs c = derive_coeffs(q);
  // A linear oscillator has no cubic term; its rates still set the search radius.
  const double k2 = std::abs(c.k2) > 0.0 ? std::abs(c.k2) : std::max(std::abs(c.k1), 1e-300);
  const double r_max =
      3.0 * std::max({std::sqrt(std::abs(2.0 * q.lambda2) / k2), std::cbrt(std::abs(q.lambda1) / k2),
                      std::sqrt(std::abs(c.k1) / k2), 1.0});

  std::vector<cplx> starts{cplx(0.0, 0.0)};
  for (int k = 0; k < opt.n_radii; ++k)
    for (int j = 0; j < opt.n_angles; ++j)
      starts.push_back(std::polar(r_max * (k + 0.5) / opt.n_radii,
                                  2.0 * std::numbers::pi * (j + 0.5) / opt.n_angles));

  auto newton = [&](cplx z) -> std::optional<cplx> {
    Partials d = partials(q, z);
    for (int it = 0; it < opt.max_newton; ++it) {
      const Eigen::Matrix2d j = real_jacobian(d.dz, d.dzbar);
      if (std::abs(j.determinant()) < 1e-300) return std::nullopt;
      const cplx f = -I * d.g;
      const Eigen::Vector2d s = -j.partialPivLu().solve(Eigen::Vector2d(f.real(), f.imag()));
      cplx step(s[0], s[1]);
      const double f0 = std::abs(f);
      Partials dn = partials(q, z + step);
      for (int h = 0; h < opt.max_halvings && std::abs(dn.g) >= f0 && f0 > 0.0; ++h) {
        step *= 0.5;
        dn = partials(q, z + step);
      }
      z += step;
      d = dn;
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return std::nullopt;
      if (std::abs(step) < opt.step_tol * (1.0 + std::abs(z)) || d.g == cplx(0.0, 0.0)) break;
    }
    if (std::abs(d.g) < opt.residual_tol) return z;
    return std::nullopt;
  };

  std::vector<cplx> roots;
  for (cplx s : starts)
    if (auto r = newton(s)) roots.push_back(*r);
  std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });

  std::vector<cplx> kept;
  for (cplx r : roots) {
    bool dup = false;
    for (cplx& k : kept) {
      if (std::abs(r - k) < opt.dedup_tol) {
        if (std::abs(partials(q, r).g) < std::abs(partials(q, k).g)) k = r;
        dup = true;
        break;
      }
    }
    if (!dup) kept.push_back(r);
  }
  // Near-coincident distinct roots that a few more Newton steps cannot pull
  // apart signal a (near-)degenerate root.
  for (std::size_t i = 0; i < kept.size(); ++i)
    for (std::size_t j = i + 1; j < kept.size(); ++j)
      if (std::abs(kept[i] - kept[j]) < 10.0 * opt.dedup_tol)
        throw DegenerateRoots("fixed points within 10x the deduplication tolerance");

  FixedPointSet set;
  for (cplx z : kept) set.points.push_back(make_point(q, z));
  finalize(set, opt.separation);

  // Closed-form counts where available.
  const bool kerr_case = q.lambda2 == cplx{} && q.lambda3 == cplx{} && q.lambda1 != cplx{};
  if (kerr_case) {
    const std::size_t expect = kerr_photon_numbers(q).size();
    if (set.points.size() < expect)
      throw NoConvergence("multistart found " + std::to_string(set.points.size()) + " of " +
                          std::to_string(expect) + " Kerr fixed points");
  }
  return set;
}

std::vector<cplx> fixed_points_cat_asymptotic(const SystemParams& p) {
  const SystemParams q = to_drive_form(p);
  if (q.lambda2 == cplx{}) throw InvalidParams("cat asymptotics need lambda2 != 0");
  const DerivedCoeffs c = derive_coeffs(q, true);
  const cplx ratio = 2.0 * q.lambda2 / c.k2;
  const double psi = std::arg(ratio);
  const cplx w = std::sqrt(std::abs(ratio)) * std::polar(1.0, psi / 2.0);
  const cplx shift = (2.0 * q.lambda3 + std::conj(q.lambda3) * std::polar(1.0, psi)) / (2.0 * c.k2);
  return {cplx(0.0, 0.0), w + shift, -w + shift};
}

KerrCubic kerr_cubic(const SystemParams& p) {
  const SystemParams q = to_drive_form(p);
  if (q.lambda2 != cplx{} || q.lambda3 != cplx{})
    throw InvalidParams("Kerr cubic needs lambda2 = lambda3 = 0");
  const DerivedCoeffs c = derive_coeffs(q, true);
  const cplx k1 = c.k1 - 0.5 * I * q.kappa_phi;
  const double a2 = std::norm(c.k2);
  const double re = (std::conj(k1) * c.k2).real();
  const double b = std::norm(k1) / a2;
  const double s = 2.0 * re / (3.0 * a2);
  KerrCubic out;
  out.shift = s;
  out.p = b - 3.0 * s * s;
  out.q = -2.0 * s * s * s + s * b - std::norm(q.lambda1) / a2;
  out.discriminant = 4.0 * out.p * out.p * out.p + 27.0 * out.q * out.q;
  return out;
}

std::vector<double> kerr_photon_numbers(const SystemParams& p) {
  const KerrCubic k = kerr_cubic(p);
  std::vector<double> r;
  if (k.discriminant < 0.0) {
    const double m = 2.0 * std::sqrt(-k.p / 3.0);
    const double arg = std::clamp(1.5 * k.q / k.p * std::sqrt(-3.0 / k.p), -1.0, 1.0);
    for (int j = 0; j < 3; ++j)
      r.push_back(k.shift + m * std::cos(std::acos(arg) / 3.0 + 2.0 * std::numbers::pi * j / 3.0));
  } else {
    // Cardano with the larger cube root first; the other follows from u v = -p/3.
    const double h = std::sqrt(k.q * k.q / 4.0 + k.p * k.p * k.p / 27.0);
    const double u = std::cbrt(-k.q / 2.0 + std::copysign(h, -k.q));
    r.push_back(k.shift + u + (u != 0.0 ? -k.p / (3.0 * u) : 0.0));
  }
  // Newton polish on the depressed cubic t^3 + p t + q.
  for (double& x : r) {
    for (int it = 0; it < 3; ++it) {
      const double t = x - k.shift;
      const double d = 3.0 * t * t + k.p;
      if (d == 0.0) break;
      x -= (t * t * t + k.p * t + k.q) / d;
    }
  }
  std::erase_if(r, [](double x) { return x < 0.0; });
  std::sort(r.begin(), r.end());
  return r;
}

FixedPointSet fixed_points_kerr(const SystemParams& p) {
  const SystemParams q = to_drive_form(p);
  if (q.lambda1 == cplx{}) throw InvalidParams("Kerr closed form needs lambda1 != 0");
  const DerivedCoeffs c = derive_coeffs(q, true);
  const cplx k1 = c.k1 - 0.5 * I * q.kappa_phi;
  FixedPointSet set;
  for (double r : kerr_photon_numbers(q)) set.points.push_back(make_point(q, q.lambda1 / (r * c.k2 - k1)));
  finalize(set, MultistartOptions{}.separation);
  return set;
}

BistabilityMargin bistability_region(const SystemParams& p) {
  const KerrCubic k = kerr_cubic(p);
  return {k.discriminant < 0.0, k.discriminant};
}

std::vector<cplx> heteroclinic_path(const SystemParams& p, const FixedPointSet& fps, int target,
                                    const std::vector<cplx>& watch) {
  namespace ode = boost::numeric::odeint;
  using State = std::array<double, 2>;
  const SystemParams q = to_drive_form(p);
  const FixedPoint& sad = fps.saddle();
  const cplx goal = fps.stable_point(target).z;

  Eigen::EigenSolver<Eigen::Matrix2d> es(meanfield_jacobian(q, sad.z));
  int iu = es.eigenvalues()[0].real() > es.eigenvalues()[1].real() ? 0 : 1;
  Eigen::Vector2d v = es.eigenvectors().col(iu).real().normalized();

  double slow = std::min(std::abs(fps.stable_point(0).jacobian_eigs[0].real()),
                         std::abs(fps.stable_point(0).jacobian_eigs[1].real()));
  for (int i = 1; i < 2; ++i)
    for (cplx e : fps.stable_point(i).jacobian_eigs) slow = std::min(slow, std::abs(e.real()));
  const double t_max = 200.0 / slow;
  const double reach = 1e-10 * (1.0 + std::abs(goal));

  auto rhs = [&](const State& x, State& dx, double) {
    const cplx f = meanfield_rhs(q, cplx(x[0], x[1]));
    dx = {f.real(), f.imag()};
  };

  // Angles subtended around each watch point between consecutive samples stay small.
  std::vector<cplx>* path_sink = nullptr;
  auto fine_enough = [&](cplx a, cplx b) {
    for (cplx w : watch) {
      const double d = std::min(std::abs(a - w), std::abs(b - w));
      if (std::abs(b - a) > 0.1 * d) return false;
    }
    return true;
  };

  // Subdivides [ta, tb] in time until consecutive samples resolve the watch angles.
  auto emit = [&](auto& stepper, double ta, cplx za, double tb, cplx zb, int depth,
                  auto&& self) -> void {
    if (depth > 40 || fine_enough(za, zb)) {
      path_sink->push_back(zb);
      return;
    }
    const double tm = 0.5 * (ta + tb);
    State ym;
    stepper.calc_state(tm, ym);
    const cplx zm(ym[0], ym[1]);
    self(stepper, ta, za, tm, zm, depth + 1, self);
    self(stepper, tm, zm, tb, zb, depth + 1, self);
  };

  for (double sign : {1.0, -1.0}) {
    const double delta = 1e-8 * (1.0 + std::abs(sad.z));
    State x{sad.z.real() + sign * delta * v[0], sad.z.imag() + sign * delta * v[1]};
    auto stepper = ode::make_dense_output(1e-12, 1e-12, ode::runge_kutta_dopri5<State>());
    stepper.initialize(x, 0.0, 1e-3 / (1.0 + slow));
    std::vector<cplx> path{sad.z, cplx(x[0], x[1])};
    path_sink = &path;
    bool reached = false;
    while (stepper.current_time() < t_max) {
      auto [t0, t1] = stepper.do_step(rhs);
      const int m = 8;
      double ta = t0;
      for (int k = 1; k <= m; ++k) {
        const double tb = t0 + (t1 - t0) * k / m;
        State y;
        stepper.calc_state(tb, y);
        emit(stepper, ta, path.back(), tb, cplx(y[0], y[1]), 0, emit);
        ta = tb;
      }
      const cplx now(stepper.current_state()[0], stepper.current_state()[1]);
      if (std::abs(now - goal) < reach) {
        reached = true;
        break;
      }
      const cplx other = fps.stable_point(1 - target).z;
      if (std::abs(now - other) < 1e-6 * (1.0 + std::abs(other))) break;
    }
    if (reached) {
      path.push_back(goal);
      return path;
    }
  }
  throw NoConvergence("relaxation from the saddle did not reach the requested stable point");
}

}  // namespace switchrate
