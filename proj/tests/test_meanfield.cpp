#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <random>

#include "switchrate/errors.hpp"
#include "switchrate/meanfield.hpp"

using namespace switchrate;

namespace {

SystemParams cat(cplx lambda2) {
  SystemParams p;
  p.kappa2 = 1.0;
  p.lambda2 = lambda2;
  return p;
}

// Real roots of |K2|^2 R^3 - 2 Re(K1* K2) R^2 + |K1|^2 R - |lambda1|^2 from
// the eigenvalues of its companion matrix.
std::vector<double> companion_roots(const SystemParams& p) {
  const auto c = derive_coeffs(p);
  const double a3 = std::norm(c.k2);
  const double a2 = -2.0 * (std::conj(c.k1) * c.k2).real() / a3;
  const double a1 = std::norm(c.k1) / a3;
  const double a0 = -std::norm(p.lambda1) / a3;
  Eigen::Matrix3d m;
  m << -a2, -a1, -a0, 1, 0, 0, 0, 1, 0;
  Eigen::EigenSolver<Eigen::Matrix3d> es(m);
  std::vector<double> r;
  for (int i = 0; i < 3; ++i)
    if (std::abs(es.eigenvalues()[i].imag()) < 1e-9 * (1 + std::abs(es.eigenvalues()[i]))) r.push_back(es.eigenvalues()[i].real());
  std::sort(r.begin(), r.end());
  return r;
}

double nearest(const FixedPointSet& s, cplx z) {
  double d = 1e300;
  for (const auto& f : s.points) d = std::min(d, std::abs(f.z - z));
  return d;
}

}  // namespace

TEST_CASE("cat fixed points") {
  const FixedPointSet s = fixed_points_general(cat(cplx(0, 2)));
  REQUIRE(s.points.size() == 3);
  CHECK(s.bistable);
  CHECK(nearest(s, 2.0) < 1e-12);
  CHECK(nearest(s, -2.0) < 1e-12);
  CHECK(std::abs(s.saddle().z) < 1e-12);
  CHECK(s.saddle().stability == Stability::unstable);
  for (const auto& f : s.points) CHECK(f.residual < 1e-10);
  // Bright before dim; the symmetric pair falls back to Re descending.
  CHECK(s.stable_point(0).z.real() > 0.0);
}

TEST_CASE("undriven oscillator") {
  SystemParams p;
  p.kappa1 = 1.0;
  p.delta = 0.3;
  const FixedPointSet s = fixed_points_general(p);
  REQUIRE(s.points.size() == 1);
  CHECK(std::abs(s.points[0].z) < 1e-14);
  CHECK(!s.bistable);
  const auto [st, eig] = classify_stability(p, 0.0);
  CHECK(st == Stability::stable);
  auto e = eig;
  std::sort(e.begin(), e.end(), [](cplx a, cplx b) { return a.imag() < b.imag(); });
  CHECK(std::abs(e[0] - cplx(-0.5, -0.3)) < 1e-12);
  CHECK(std::abs(e[1] - cplx(-0.5, 0.3)) < 1e-12);
}

TEST_CASE("stability agrees with relaxation") {
  const SystemParams p = cat(cplx(0, 2));
  CHECK(classify_stability(p, 2.0).first == Stability::stable);
  CHECK(classify_stability(p, 0.0).first == Stability::unstable);
  CHECK_THROWS_AS(classify_stability(p, 1.0), NotAFixedPoint);
  // RK4 from a nearby point decays back to the fixed point.
  cplx z(2.01, 0.01);
  const double h = 1e-3;
  for (int i = 0; i < 20000; ++i) {
    const cplx k1 = meanfield_rhs(p, z), k2 = meanfield_rhs(p, z + 0.5 * h * k1),
               k3 = meanfield_rhs(p, z + 0.5 * h * k2), k4 = meanfield_rhs(p, z + h * k3);
    z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  CHECK(std::abs(z - 2.0) < 1e-10);
}

TEST_CASE("cat asymptotics") {
  auto a = fixed_points_cat_asymptotic(cat(cplx(0, 2)));
  REQUIRE(a.size() == 3);
  CHECK(std::abs(a[0]) < 1e-15);
  CHECK(std::abs(a[1] - 2.0) < 1e-14);
  CHECK(std::abs(a[2] + 2.0) < 1e-14);

  SystemParams p = cat(cplx(0, 2));
  p.lambda3 = 0.1;
  a = fixed_points_cat_asymptotic(p);
  CHECK(std::abs(a[1] - cplx(2.0, -0.15)) < 1e-14);
  CHECK(std::abs(a[2] - cplx(-2.0, -0.15)) < 1e-14);
  const FixedPointSet s = fixed_points_general(p);
  const double eps2 = 1.0 / 4.0;
  CHECK(nearest(s, a[1]) < 5 * eps2 * 2.0);
  CHECK(nearest(s, a[2]) < 5 * eps2 * 2.0);

  CHECK_THROWS_AS(fixed_points_cat_asymptotic(cat(0.0)), InvalidParams);
}

TEST_CASE("Kerr cubic against companion matrix") {
  const SystemParams k = preset(Preset::kerr_oscillator);
  const auto r = kerr_photon_numbers(k);
  const auto o = companion_roots(k);
  REQUIRE(r.size() == 3);
  REQUIRE(o.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(r[i] - o[i]) < 1e-12 * o[2]);
  CHECK(r[0] == doctest::Approx(2.9447).epsilon(1e-4));
  CHECK(r[1] == doctest::Approx(22.323).epsilon(1e-4));
  CHECK(r[2] == doctest::Approx(38.032).epsilon(1e-4));

  const BistabilityMargin m = bistability_region(k);
  CHECK(m.bistable);
  CHECK(m.discriminant < 0.0);

  const FixedPointSet closed = fixed_points_kerr(k), general = fixed_points_general(k);
  REQUIRE(closed.points.size() == 3);
  REQUIRE(general.points.size() == 3);
  CHECK(closed.bistable);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(closed.points[i].z - general.points[i].z) < 1e-10);
    CHECK(closed.points[i].stability == general.points[i].stability);
  }

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 400 && checked < 30; ++trial) {
    SystemParams p;
    p.delta = 1.0 + 4.0 * u(rng);
    p.kerr = 0.05 + 0.3 * u(rng);
    p.kappa1 = 0.5 + u(rng);
    p.lambda1 = std::polar(1.0 + 9.0 * u(rng), 6.283 * u(rng));
    if (!bistability_region(p).bistable) continue;
    const auto a = kerr_photon_numbers(p), b = companion_roots(p);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12 * b.back());
    ++checked;
  }
  CHECK(checked == 30);
}

TEST_CASE("Kerr monostable limits") {
  SystemParams k = preset(Preset::kerr_oscillator);
  k.lambda1 = 1e4;
  CHECK(!bistability_region(k).bistable);
  CHECK(fixed_points_kerr(k).points.size() == 1);

  SystemParams weak;
  weak.kappa1 = 1.0;
  weak.kerr = 0.1;
  weak.lambda1 = 1e-6;
  const FixedPointSet s = fixed_points_kerr(weak);
  REQUIRE(s.points.size() == 1);
  CHECK(std::abs(s.points[0].z) < 1e-5);

  // Positive detuning relative to the Kerr shift has no turning points.
  SystemParams blue = preset(Preset::kerr_oscillator);
  blue.delta = -3.165;
  CHECK(!bistability_region(blue).bistable);
}

TEST_CASE("relaxation path") {
  const SystemParams k = preset(Preset::kerr_oscillator);
  const FixedPointSet s = fixed_points_general(k);
  for (int target : {0, 1}) {
    const auto path = heteroclinic_path(k, s, target);
    REQUIRE(path.size() > 2);
    CHECK(std::abs(path.front() - s.saddle().z) < 1e-12);
    CHECK(std::abs(path.back() - s.stable_point(target).z) < 1e-12);
  }
}
