#include <doctest.h>

#include <algorithm>
#include <random>

#include "switchrate/errors.hpp"
#include "switchrate/instanton.hpp"

using namespace switchrate;

namespace {

SystemParams dephased(double kappa_phi, double alpha0_sq = 4.0) {
  SystemParams p;
  p.kappa2 = 1.0;
  p.alpha0_sq = cplx(alpha0_sq, 0.0);
  p.kappa_phi = kappa_phi;
  return p;
}

// Cat with a trace of single-photon loss so the wells are not dark states.
SystemParams htrs_cat() {
  SystemParams p;
  p.kappa2 = 1.0;
  p.kappa1 = 1e-4;
  p.alpha0_sq = cplx(4.0 + 0.5e-4, 0.0);
  return p;
}

double norm4(const PhaseSpaceState& s) {
  return std::sqrt(std::norm(s.b_cl) + std::norm(s.b_cl_bar) + std::norm(s.b_q) + std::norm(s.b_q_bar));
}

PhaseSpaceState diff(const PhaseSpaceState& a, const PhaseSpaceState& b) {
  return {a.b_cl - b.b_cl, a.b_cl_bar - b.b_cl_bar, a.b_q - b.b_q, a.b_q_bar - b.b_q_bar};
}

PhaseSpaceState physical(cplx z) { return make_state(Vec2c(z, std::conj(z)), Vec2c::Zero()); }

}  // namespace

TEST_CASE("explicit dephased equations agree with generic partials") {
  std::mt19937_64 g(3);
  std::normal_distribution<double> nd;
  auto c = [&] { return cplx(nd(g), nd(g)); };
  double worst = 0.0;
  for (double kp : {0.1, 0.4, 1.3}) {
    const SystemParams p = dephased(kp, 3.0 + kp);
    for (int k = 0; k < 350; ++k) {
      const PhaseSpaceState s{c(), c(), c(), c()};
      const PhaseSpaceState a = eom_rhs(p, s), b = eom_rhs_dephased_cat(p, s);
      worst = std::max(worst, norm4(diff(a, b)) / (1.0 + norm4(a)));
    }
  }
  CHECK(worst < 1e-12);
  SystemParams k = dephased(0.1);
  k.kerr = 0.1;
  CHECK_THROWS_AS(eom_rhs_dephased_cat(k, {}), InvalidParams);
}

TEST_CASE("noise-free fixed points of the dephased flow") {
  const SystemParams p = dephased(0.4);
  const double z = std::sqrt(4.0 - 0.2);
  for (double s : {z, -z}) CHECK(norm4(eom_rhs(p, physical(s))) < 1e-14);
}

TEST_CASE("time-reversed manifold reverses the drift") {
  const SystemParams p = preset(Preset::kerr_oscillator);
  std::mt19937_64 g(8);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 50; ++k) {
    const cplx z(3 * nd(g), 3 * nd(g));
    const Vec2c x(z, std::conj(z));
    const PhaseSpaceState s = make_state(x, tr_momenta(p, x));
    const PhaseSpaceState d = eom_rhs(p, s);
    const Vec2c a = drift_diffusion(p, x).a_vec;
    CHECK(std::abs(d.b_cl + a[0]) < 1e-10 * (1 + std::abs(a[0])));
    CHECK(std::abs(d.b_cl_bar + a[1]) < 1e-10 * (1 + std::abs(a[1])));
  }
}

TEST_CASE("Jacobian matches finite differences") {
  std::mt19937_64 g(2);
  std::normal_distribution<double> nd;
  auto c = [&] { return cplx(nd(g), nd(g)); };
  SystemParams p = preset(Preset::dissipative_cat);
  p.lambda3 = 0.2;
  p.kappa_phi = 0.3;
  p.delta = 0.1;
  const PhaseSpaceState s{c(), c(), c(), c()};
  const Eigen::Matrix4cd j = eom_jacobian(p, s);
  auto pack = [](const PhaseSpaceState& d) { return Eigen::Vector4cd(d.b_cl, d.b_cl_bar, d.b_q_bar, -d.b_q); };
  const double h = 1e-6;
  for (int col = 0; col < 4; ++col) {
    Eigen::Vector4cd x = pack(s);
    auto at = [&](double sgn) {
      Eigen::Vector4cd y = x;
      y[col] += sgn * h;
      return pack(eom_rhs(p, make_state(Vec2c(y[0], y[1]), Vec2c(y[2], y[3]))));
    };
    const Eigen::Vector4cd fd = (at(1) - at(-1)) / (2 * h);
    CHECK((fd - j.col(col)).cwiseAbs().maxCoeff() < 1e-6 * (1 + j.col(col).cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("saddle Jacobians") {
  const SystemParams p = dephased(0.5);
  const SaddleJacobian sj = saddle_jacobian(p, physical(std::sqrt(3.75)));
  CHECK(sj.n_repulsive == 2);
  CHECK(sj.pairing_residual < 1e-10);
  CHECK(std::abs(sj.repulsive_basis[0].dot(sj.repulsive_basis[1])) < 1e-14);
  CHECK_THROWS_AS(saddle_jacobian(p, physical(1.0)), NotAFixedPoint);

  const SystemParams c = htrs_cat();
  const FixedPointSet fps = fixed_points_general(c);
  const FixedPoint& f = fps.stable_point(0);
  const SaddleJacobian cj = saddle_jacobian(c, physical(f.z));
  std::vector<double> rep, mf;
  for (int i = 0; i < 4; ++i)
    if (cj.eigenvalues[i].real() > 0) rep.push_back(cj.eigenvalues[i].real());
  for (const auto& e : f.jacobian_eigs) mf.push_back(-e.real());
  std::sort(rep.begin(), rep.end());
  std::sort(mf.begin(), mf.end());
  REQUIRE(rep.size() == 2);
  for (int i = 0; i < 2; ++i) CHECK(rep[i] == doctest::Approx(mf[i]).epsilon(1e-9));
}

TEST_CASE("noise-free relaxation accumulates no action") {
  const SystemParams p = htrs_cat();
  const FixedPointSet fps = fixed_points_general(p);
  const cplx z = fps.stable_point(0).z;
  IntegrateOptions o;
  o.target = physical(z);
  const Trajectory t = integrate(p, physical(z + cplx(0.05, 0.02)), 40.0, o);
  CHECK(t.closest_approach < 1e-6);
  CHECK(std::abs(t.accumulated_action) < 1e-12);
  CHECK(t.max_density_drift < 1e-6);
  for (std::size_t i = 1; i < t.times.size(); ++i) CHECK(t.times[i] > t.times[i - 1]);
}

TEST_CASE("time-reversed path accumulates the potential difference") {
  const SystemParams p = htrs_cat();
  const cplx z0(1.9, 0.0);
  const Vec2c x(z0, std::conj(z0));
  IntegrateOptions o;
  o.target = physical(0.0);
  const Trajectory t = integrate(p, make_state(x, tr_momenta(p, x)), 6.0, o);
  const cplx z1 = t.states.back().b_cl;
  CHECK(std::abs(z1) < 0.05);
  const double expect = potential_phi(p, z1) - potential_phi(p, z0);
  CHECK(t.accumulated_action == doctest::Approx(expect).epsilon(1e-6));
  CHECK(t.max_density_drift < 1e-6);
  CHECK(std::abs(t.action_imag) < 1e-8);
}

TEST_CASE("integration options are checked") {
  CHECK_THROWS_AS(integrate(htrs_cat(), physical(1.0), 1.0, {.tol = 1e-3}), InvalidParams);
  CHECK_THROWS_AS(integrate(htrs_cat(), physical(1.0), 1.0, {.tol = 1e-14}), InvalidParams);
}

TEST_CASE("shooting recovers the closed-form action") {
  const SystemParams p = htrs_cat();
  const FixedPointSet fps = fixed_points_general(p);
  const ShotResult r = shoot_instanton(p, fps.stable_point(0).z);
  const double expect = action(p, fps.stable_point(0).z, fps.saddle().z);
  CHECK(r.best.closest_approach < 1e-2);
  CHECK(r.best.accumulated_action == doctest::Approx(expect).epsilon(1e-3));
  CHECK(r.best.max_density_drift < 1e-6);
  // The path hugs the time-reversed manifold.
  double worst = 0.0;
  for (const auto& s : r.best.states) {
    if (std::abs(s.b_cl) < 0.05) continue;
    const Vec2c x(s.b_cl, s.b_cl_bar);
    worst = std::max(worst, (momenta(s) - tr_momenta(p, x)).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("noiseless wells and unreachable saddles are reported") {
  SystemParams p;
  p.kappa2 = 1.0;
  p.lambda2 = cplx(0, 2);
  CHECK_THROWS_AS(shoot_instanton(p, 2.0), SingularDiffusion);
  ShootOptions o;
  o.n_theta = 36;
  o.refine_iters = 5;
  o.accept_radius = 1e-14;
  CHECK_THROWS_AS(shoot_instanton(htrs_cat(), fixed_points_general(htrs_cat()).stable_point(0).z, o), NoCandidate);
}

TEST_CASE("dephased switching paths") {
  double dev_low = 0.0, dev_high = 0.0;
  for (double kp : {0.1, 0.4}) {
    const SystemParams p = dephased(kp);
    const FixedPointSet fps = fixed_points_general(p);
    double worst_dev = 0.0;
    for (int i = 0; i < 2; ++i) {
      const ShotResult r = shoot_instanton(p, fps.stable_point(i).z);
      CHECK(r.best.closest_approach < 1e-2);
      CHECK(r.best.max_density_drift < 1e-6);
      const double ass = std::norm(fps.stable_point(i).z);
      worst_dev = std::max(worst_dev, std::abs(r.best.accumulated_action + 2.0 * ass));
      if (kp == 0.4) CHECK(relaxation_deviation(p, r.best, fps, i) > 10 * r.best.closest_approach + 1e-9);
    }
    (kp == 0.1 ? dev_low : dev_high) = worst_dev;
  }
  CHECK(dev_high > dev_low);
}
