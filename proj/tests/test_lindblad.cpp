#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <random>

#include "switchrate/errors.hpp"
#include "switchrate/lindblad.hpp"

using namespace switchrate;

namespace {

Eigen::VectorXcd trace_row(int n) {
  Eigen::VectorXcd w = Eigen::VectorXcd::Zero(n * n);
  for (int i = 0; i < n; ++i) w[i + n * i] = 1.0;
  return w;
}

SystemParams random_bistable_cat(std::mt19937_64& g) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PresetArgs a;
  a.alpha0_sq = 2.0 + u(g);
  a.kappa1_ratio = 0.05 + 0.1 * u(g);
  SystemParams p = preset(Preset::dissipative_cat, a);
  p.delta = 0.2 * u(g);
  p.kerr = 0.1 * u(g);
  p.lambda3 = std::polar(0.05 * u(g), 6.28 * u(g));
  return p;
}

}  // namespace

TEST_CASE("damped oscillator spectrum") {
  SystemParams p;
  p.kappa1 = 1.0;
  p.delta = 0.7;
  const int n = 8;
  const Eigen::VectorXcd ev = dense_spectrum(build_lindbladian(p, n));
  std::vector<cplx> got(ev.data(), ev.data() + ev.size()), want;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) want.emplace_back(-0.5 * (a + b), 0.7 * (b - a));
  auto key = [](cplx a, cplx b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); };
  auto round = [](cplx z) { return cplx(std::round(z.real() * 1e8) / 1e8, std::round(z.imag() * 1e8) / 1e8); };
  std::transform(got.begin(), got.end(), got.begin(), round);
  std::sort(got.begin(), got.end(), key);
  std::sort(want.begin(), want.end(), key);
  REQUIRE(got.size() == want.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
  CHECK(worst < 1e-8);

  const SpectralSummary s = dissipative_gap(build_lindbladian(p, 12));
  CHECK(std::abs(s.gap - 0.5) < 1e-10);
  const auto m = steady_state_moments(s);
  for (const auto& v : m) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("structure of the cat superoperator") {
  const SystemParams p = preset(Preset::dissipative_cat);
  const Superoperator op = build_lindbladian(p, 30);
  const Eigen::VectorXcd left = op.matrix.adjoint() * trace_row(30);
  CHECK(left.cwiseAbs().maxCoeff() < 1e-10 * op.norm);

  std::mt19937_64 g(4);
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd x(30, 30);
  for (int i = 0; i < 30; ++i)
    for (int j = 0; j < 30; ++j) x(i, j) = cplx(nd(g), nd(g));
  const Eigen::MatrixXcd rho = x + x.adjoint();
  const Eigen::MatrixXcd out = unvec(op.matrix * vec(rho), 30);
  CHECK((out - out.adjoint()).cwiseAbs().maxCoeff() < 1e-10 * out.cwiseAbs().maxCoeff());
}

TEST_CASE("drive and dissipator forms of alpha0 agree") {
  SystemParams lit;
  lit.kappa2 = 1.0;
  lit.kappa1 = 0.01;
  lit.alpha0_sq = cplx(4.0, 0.5);
  const SystemParams drv = to_drive_form(lit);
  const SparseMatC a = build_lindbladian(lit, 20).matrix, b = build_lindbladian(drv, 20).matrix;
  CHECK(Eigen::MatrixXcd(a - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("spectrum and steady state at small truncation") {
  std::mt19937_64 g(9);
  for (int k = 0; k < 3; ++k) {
    const SystemParams p = random_bistable_cat(g);
    const Superoperator op = build_lindbladian(p, 12);
    const Eigen::VectorXcd ev = dense_spectrum(op);
    CHECK(ev.real().maxCoeff() <= 1e-8 * op.norm);
    const SpectralSummary s = dissipative_gap(op, {.method = GapMethod::dense});
    CHECK(s.n_zero_modes == 1);
    CHECK(std::abs(s.steady_state.trace() - 1.0) < 1e-12);
    CHECK((s.steady_state - s.steady_state.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s.steady_state);
    CHECK(es.eigenvalues().minCoeff() > -1e-8);
    CHECK(s.steady_residual < 1e-8);
    const auto m = steady_state_moments(s);
    CHECK(m[2].real() >= std::norm(m[0]) - 1e-12);
  }
}

TEST_CASE("dense and iterative agree") {
  std::mt19937_64 g(17);
  const SystemParams p = random_bistable_cat(g);
  const Superoperator op = build_lindbladian(p, 24);
  const SpectralSummary d = dissipative_gap(op, {.method = GapMethod::dense});
  const SpectralSummary it = dissipative_gap(op, {.method = GapMethod::iterative});
  CHECK(std::abs(d.gap - it.gap) < 1e-8 * d.gap);
  CHECK((d.steady_state - it.steady_state).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("cat gap against an independent dense reference") {
  // Reference from a separate numpy build of the same Lindbladian (N = 22).
  PresetArgs a;
  a.alpha0_sq = 2.0;
  const SpectralSummary s = dissipative_gap(build_lindbladian(preset(Preset::dissipative_cat, a), 22));
  CHECK(s.gap == doctest::Approx(1.60369876e-05).epsilon(1e-7));
}

TEST_CASE("cat moments") {
  PresetArgs a;
  a.kappa1_ratio = 0.0;
  a.alpha0_sq = 4.0;
  SystemParams p = preset(Preset::dissipative_cat, a);
  p.kappa1 = 1e-3;
  const SpectralSummary s = dissipative_gap(build_lindbladian(p, 30));
  const auto m = steady_state_moments(s);
  CHECK(std::abs(m[0]) < 1e-8);
  CHECK(std::abs(m[1] - 4.0) < 0.08);
  const auto m3 = steady_state_moments(s, {{0, 4}});
  CHECK(std::abs(m3[0] - 16.0) < 0.5);
}

TEST_CASE("truncation scans") {
  const SystemParams p = preset(Preset::dissipative_cat);
  const TruncationReport short_scan = truncation_scan(p, {20, 25, 30});
  CHECK(!short_scan.converged);
  const TruncationReport long_scan = truncation_scan(p, {20, 25, 30, 35});
  CHECK(long_scan.converged);
  CHECK(long_scan.n_converged == 35);
  CHECK(!long_scan.oscillating);

  PresetArgs over;
  over.alpha0_sq = 12.0;
  CHECK(!truncation_scan(preset(Preset::dissipative_cat, over), {10, 12, 14}).converged);

  const AutoGapResult auto_gap = gap_auto_truncation(p, 40);
  CHECK(auto_gap.converged);
  CHECK(auto_gap.summary.gap == doctest::Approx(long_scan.gaps.back()).epsilon(1e-4));
}

TEST_CASE("guards and helpers") {
  const SystemParams p = preset(Preset::dissipative_cat);
  CHECK_THROWS_AS(build_lindbladian(p, 50, {.max_dim = 100}), DimensionOverflow);
  CHECK_THROWS_AS(dissipative_gap(build_lindbladian(p, 50), {.method = GapMethod::dense}), DimensionOverflow);
  CHECK(suggested_truncation(p) % 5 == 0);
  CHECK(suggested_truncation(p) >= 15);

  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(6, 6);
  rho(1, 1) = 0.25;
  rho(4, 4) = 0.75;
  const NumberSplit sp = photon_number_split(rho, 2.5);
  CHECK(sp.below == doctest::Approx(0.25));
  CHECK(sp.above == doctest::Approx(0.75));

  const Eigen::SparseMatrix<cplx> a = annihilation(4);
  CHECK(std::abs(a.coeff(0, 1) - 1.0) < 1e-15);
  CHECK(std::abs(a.coeff(2, 3) - std::sqrt(3.0)) < 1e-15);
}

TEST_CASE("basin weights") {
  SystemParams cat;
  cat.kappa2 = 1.0;
  cat.kappa1 = 0.01;
  cat.alpha0_sq = 2.0;
  const Superoperator c = build_lindbladian(cat, 20);
  const BasinWeights w = basin_weights(c, dissipative_gap(c), std::sqrt(2.0), -std::sqrt(2.0));
  CHECK(w.first == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(w.second == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(w.residual < 1e-12);

  // Near the bistable crossover the weights are large and the photon-number
  // split, whose overlap error is exponentially small here, agrees.
  SystemParams k = preset(Preset::kerr_oscillator);
  k.delta = 3.125;
  const FixedPointSet f = fixed_points_general(k);
  const Superoperator op = build_lindbladian(k, 80);
  const SpectralSummary s = dissipative_gap(op);
  const BasinWeights kw = basin_weights(op, s, f.stable_point(0).z, f.stable_point(1).z);
  const NumberSplit split = photon_number_split(s.steady_state, std::norm(f.saddle().z));
  CHECK(kw.first == doctest::Approx(split.above).epsilon(1e-3));
  CHECK(kw.first + kw.second == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(kw.imag_ratio < 1e-6);
}
