#include "switchrate/lindblad.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <unsupported/Eigen/KroneckerProduct>

#include "switchrate/arnoldi.hpp"
#include "switchrate/errors.hpp"
#include "switchrate/keldysh.hpp"

namespace switchrate {

namespace {

SparseMatC identity(int n) {
  SparseMatC id(n, n);
  id.setIdentity();
  return id;
}

SparseMatC kron(const SparseMatC& a, const SparseMatC& b) {
  SparseMatC out = Eigen::kroneckerProduct(a, b);
  return out;
}

double max_row_sum(const SparseMatC& m) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(m.rows());
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatC::InnerIterator it(m, k); it; ++it) rows[it.row()] += std::abs(it.value());
  return rows.size() ? rows.maxCoeff() : 0.0;
}

Eigen::VectorXcd trace_zero_start(Eigen::Index dim, int n) {
  std::uint64_t s = 0x2545f4914f6cdd1dULL;
  auto next = [&]() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return static_cast<double>(s >> 11) * 0x1.0p-53 - 0.5;
  };
  Eigen::VectorXcd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = cplx(next(), next());
  cplx tr{};
  for (int i = 0; i < n; ++i) tr += v[i + n * i];
  for (int i = 0; i < n; ++i) v[i + n * i] -= tr / static_cast<double>(n);
  return v;
}

}  // namespace

SparseMatC annihilation(int n) {
  SparseMatC a(n, n);
  std::vector<Eigen::Triplet<cplx>> t;
  for (int k = 1; k < n; ++k) t.emplace_back(k - 1, k, std::sqrt(static_cast<double>(k)));
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

SparseMatC hamiltonian(const SystemParams& p, int n) {
  const SparseMatC a = annihilation(n);
  const SparseMatC ad = a.adjoint();
  const SparseMatC ad2 = ad * ad;
  SparseMatC h = p.delta * (ad * a) - 0.5 * p.kerr * (ad2 * (a * a));
  SparseMatC drive = p.lambda1 * ad + p.lambda2 * ad2 + p.lambda3 * (ad2 * a);
  SparseMatC drive_h = drive.adjoint();
  h += drive + drive_h;
  return h;
}

Superoperator build_lindbladian(const SystemParams& p, int n, const BuildOptions& opt) {
  p.validate();
  if (n < 2) throw InvalidParams("truncation must be at least 2");
  if (static_cast<long long>(n) * n > opt.max_dim)
    throw DimensionOverflow("n_fock^2 = " + std::to_string(static_cast<long long>(n) * n) +
                            " exceeds the cap " + std::to_string(opt.max_dim));
  const SystemParams q = opt.literal_alpha0 ? p : to_drive_form(p);
  const SparseMatC id = identity(n);
  const SparseMatC a = annihilation(n);
  const SparseMatC h = hamiltonian(q, n);

  SparseMatC l = -I * (kron(id, h) - kron(SparseMatC(h.transpose()), id));
  auto dissipator = [&](double rate, const SparseMatC& j) {
    if (rate == 0.0) return;
    const SparseMatC jdj = j.adjoint() * j;
    SparseMatC term = kron(SparseMatC(j.conjugate()), j) - 0.5 * kron(id, jdj) -
                      0.5 * kron(SparseMatC(jdj.transpose()), id);
    l += rate * term;
  };
  dissipator(q.kappa1, a);
  SparseMatC two = a * a;
  if (q.alpha0_sq) two -= *q.alpha0_sq * id;
  dissipator(q.kappa2, two);
  dissipator(q.kappa_phi, SparseMatC(a.adjoint() * a));
  l.prune(cplx(0.0, 0.0));
  l.makeCompressed();

  Superoperator s;
  s.n_fock = n;
  s.matrix = std::move(l);
  s.params_hash = params_hash(p, n);
  s.norm = max_row_sum(s.matrix);
  s.rate = rate_scale(p);
  return s;
}

Eigen::VectorXcd vec(const Eigen::MatrixXcd& rho) {
  return Eigen::Map<const Eigen::VectorXcd>(rho.data(), rho.size());
}

Eigen::MatrixXcd unvec(const Eigen::VectorXcd& v, int n) {
  return Eigen::Map<const Eigen::MatrixXcd>(v.data(), n, n);
}

Eigen::MatrixXcd steady_state(const Superoperator& op) {
  const int n = op.n_fock;
  const Eigen::Index dim = op.matrix.rows();
  // Replace the row of rho(0,0) by the trace functional.
  std::vector<Eigen::Triplet<cplx>> t;
  t.reserve(static_cast<std::size_t>(op.matrix.nonZeros()) + static_cast<std::size_t>(n));
  for (int k = 0; k < op.matrix.outerSize(); ++k)
    for (SparseMatC::InnerIterator it(op.matrix, k); it; ++it)
      if (it.row() != 0) t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int i = 0; i < n; ++i) t.emplace_back(0, i + n * i, cplx(1.0, 0.0));
  SparseMatC b(dim, dim);
  b.setFromTriplets(t.begin(), t.end());
  b.makeCompressed();
  Eigen::SparseLU<SparseMatC> lu;
  lu.compute(b);
  if (lu.info() != Eigen::Success) throw DegenerateZeroModes("steady-state system is singular");
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(dim);
  rhs[0] = 1.0;
  Eigen::MatrixXcd rho = unvec(lu.solve(rhs), n);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho /= rho.trace();
  return rho;
}

Eigen::VectorXcd dense_spectrum(const Superoperator& op) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd(op.matrix), false);
  if (es.info() != Eigen::Success) throw NoConvergence("dense eigensolver failed");
  return es.eigenvalues();
}

SpectralSummary dissipative_gap(const Superoperator& op, const GapOptions& opt) {
  GapMethod method = opt.method;
  if (method == GapMethod::automatic)
    method = op.n_fock <= opt.auto_dense_max ? GapMethod::dense : GapMethod::iterative;
  if (method == GapMethod::dense && op.n_fock > opt.dense_max)
    throw DimensionOverflow("dense diagonalization limited to n_fock <= " + std::to_string(opt.dense_max));

  SpectralSummary out;
  out.method = method;
  out.n_fock = op.n_fock;
  const double zero_cut = opt.zero_tol * op.norm;
  std::vector<cplx> nonzero;

  if (method == GapMethod::dense) {
    const Eigen::VectorXcd ev = dense_spectrum(op);
    Eigen::Index i0 = 0;
    ev.cwiseAbs().minCoeff(&i0);
    int zeros = 1;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      if (i == i0) continue;
      if (std::abs(ev[i]) < zero_cut)
        ++zeros;
      else
        nonzero.push_back(ev[i]);
    }
    out.n_zero_modes = zeros;
  } else {
    const double sigma = opt.shift != 0.0 ? opt.shift : 1e-3 * op.rate;
    const Eigen::Index dim = op.matrix.rows();
    const int n = op.n_fock;
    SparseMatC shifted = op.matrix;
    for (Eigen::Index i = 0; i < dim; ++i) shifted.coeffRef(i, i) -= sigma;
    shifted.makeCompressed();
    Eigen::SparseLU<SparseMatC> lu;
    lu.compute(shifted);
    if (lu.info() != Eigen::Success) throw IterativeNoConvergence("shifted factorization failed", NAN);

    LinearOperator apply = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
      y = lu.solve(x);
      cplx tr{};
      for (int i = 0; i < n; ++i) tr += y[i + n * i];
      for (int i = 0; i < n; ++i) y[i + n * i] -= tr / static_cast<double>(n);
    };
    ArnoldiOptions ao;
    ao.nev = opt.n_eigs;
    ao.tol = opt.tol;
    ao.max_krylov = opt.max_krylov;
    const ArnoldiResult r = arnoldi_largest(apply, trace_zero_start(dim, n), ao);
    if (!r.converged) {
      double worst = 0.0;
      for (double x : r.residuals) worst = std::max(worst, x);
      throw IterativeNoConvergence("shift-invert Arnoldi did not converge", worst);
    }
    int zeros = 1;
    for (cplx theta : r.values) {
      const cplx lambda = sigma + 1.0 / theta;
      if (std::abs(lambda) < zero_cut)
        ++zeros;
      else
        nonzero.push_back(lambda);
    }
    out.n_zero_modes = zeros;
  }
  if (out.n_zero_modes > 1)
    throw DegenerateZeroModes(std::to_string(out.n_zero_modes) + " eigenvalues indistinguishable from zero");
  if (nonzero.empty()) throw NoConvergence("no nonzero eigenvalue computed");

  std::sort(nonzero.begin(), nonzero.end(), [](cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() < b.imag();
  });
  out.eigenvalues = nonzero;
  out.gap = -nonzero.front().real();
  out.gap_imag = nonzero.front().imag();

  out.steady_state = steady_state(op);
  out.steady_residual = (op.matrix * vec(out.steady_state)).norm() / std::max(op.norm, 1e-300);
  return out;
}

std::vector<cplx> steady_state_moments(const SpectralSummary& s, const std::vector<MomentOrder>& orders) {
  const int n = static_cast<int>(s.steady_state.rows());
  const Eigen::MatrixXcd a = Eigen::MatrixXcd(annihilation(n));
  const Eigen::MatrixXcd ad = a.adjoint();
  std::vector<cplx> out;
  for (const auto& o : orders) {
    Eigen::MatrixXcd op = Eigen::MatrixXcd::Identity(n, n);
    for (int k = 0; k < o.creation; ++k) op = op * ad;
    for (int k = 0; k < o.annihilation; ++k) op = op * a;
    out.push_back((s.steady_state * op).trace());
  }
  return out;
}

std::vector<cplx> steady_state_moments(const SpectralSummary& s) {
  return steady_state_moments(s, {{0, 1}, {0, 2}, {1, 1}});
}

TruncationReport truncation_scan(const SystemParams& p, const std::vector<int>& n_list, const GapOptions& opt,
                                 double tol) {
  TruncationReport rep;
  rep.tol = tol;
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] <= n_list[i - 1]) throw InvalidParams("truncation list must increase");
  for (int n : n_list) {
    const SpectralSummary s = dissipative_gap(build_lindbladian(p, n), opt);
    const double change = rep.gaps.empty() ? std::numeric_limits<double>::quiet_NaN()
                                           : std::abs(s.gap - rep.gaps.back()) / std::abs(s.gap);
    rep.n_fock.push_back(n);
    rep.gaps.push_back(s.gap);
    rep.rel_change.push_back(change);
    if (rep.n_converged == 0 && change < tol) rep.n_converged = n;
  }
  rep.converged = rep.rel_change.size() > 1 && rep.rel_change.back() < tol;
  // Sign flips of successive differences larger than tol mark oscillation.
  for (std::size_t i = 2; i < rep.gaps.size(); ++i) {
    const double d1 = rep.gaps[i - 1] - rep.gaps[i - 2];
    const double d2 = rep.gaps[i] - rep.gaps[i - 1];
    if (d1 * d2 < 0.0 && std::abs(d2) > tol * std::abs(rep.gaps[i])) rep.oscillating = true;
  }
  return rep;
}

int suggested_truncation(const SystemParams& p) {
  double m = 0.0;
  try {
    for (const auto& f : fixed_points_general(p).points) m = std::max(m, std::norm(f.z));
  } catch (const Error&) {
    return 20;
  }
  const double n = m + 4.0 * std::sqrt(m) + 6.0;
  return std::max(10, 5 * static_cast<int>(std::ceil(n / 5.0)));
}

AutoGapResult gap_auto_truncation(const SystemParams& p, int n_max, const GapOptions& opt, int n_step,
                                  double tol) {
  AutoGapResult out;
  out.scan.tol = tol;
  int n = std::min(suggested_truncation(p), n_max);
  // Start one step lower so the first comparison is available at the estimate.
  n = std::max(8, n - n_step);
  for (; n <= n_max; n += n_step) {
    SpectralSummary s = dissipative_gap(build_lindbladian(p, n), opt);
    const double change = out.scan.gaps.empty() ? std::numeric_limits<double>::quiet_NaN()
                                                : std::abs(s.gap - out.scan.gaps.back()) / std::abs(s.gap);
    out.scan.n_fock.push_back(n);
    out.scan.gaps.push_back(s.gap);
    out.scan.rel_change.push_back(change);
    out.summary = std::move(s);
    out.n_fock = n;
    if (change < tol) {
      out.scan.n_converged = n;
      out.converged = out.scan.converged = true;
      break;
    }
  }
  return out;
}

NumberSplit photon_number_split(const Eigen::MatrixXcd& rho, double threshold) {
  NumberSplit s;
  for (Eigen::Index k = 0; k < rho.rows(); ++k)
    (static_cast<double>(k) < threshold ? s.below : s.above) += rho(k, k).real();
  return s;
}

Eigen::VectorXcd coherent_state(cplx beta, int n_fock) {
  Eigen::VectorXcd v(n_fock);
  v[0] = 1.0;
  for (int k = 1; k < n_fock; ++k) v[k] = v[k - 1] * beta / std::sqrt(static_cast<double>(k));
  return v / v.norm();
}

BasinWeights basin_weights(const Superoperator& op, const SpectralSummary& s, cplx first, cplx second) {
  if (s.eigenvalues.empty()) throw InvalidParams("basin weights need the slow eigenvalue");
  // The zero mode and the slow mode are only |lambda| apart, so in double
  // precision weights below about eps ||L|| / |lambda| drown in rounding.
  // Everything here runs in extended precision.
  using R = long double;
  using C = std::complex<R>;
  using SpC = Eigen::SparseMatrix<C>;
  using VecC = Eigen::Matrix<C, Eigen::Dynamic, 1>;
  const int n = op.n_fock;
  const Eigen::Index dim = op.matrix.rows();
  const SpC l = op.matrix.cast<C>();
  auto solve_with = [&](SpC m, const VecC& rhs) {
    m.makeCompressed();
    Eigen::SparseLU<SpC> lu;
    lu.compute(m);
    if (lu.info() != Eigen::Success) throw IterativeNoConvergence("extended-precision factorization failed", NAN);
    return std::make_pair(VecC(lu.solve(rhs)), 0);
  };

  // Steady state from the bordered system, trace functional in row 0.
  VecC rho;
  {
    std::vector<Eigen::Triplet<C>> t;
    for (int k = 0; k < l.outerSize(); ++k)
      for (SpC::InnerIterator it(l, k); it; ++it)
        if (it.row() != 0) t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int i = 0; i < n; ++i) t.emplace_back(0, i + n * i, C(1));
    SpC b(dim, dim);
    b.setFromTriplets(t.begin(), t.end());
    VecC rhs = VecC::Zero(dim);
    rhs[0] = 1;
    rho = solve_with(b, rhs).first;
  }
  VecC identity = VecC::Zero(dim);
  for (int i = 0; i < n; ++i) identity[i + n * i] = 1;

  // Inverse iteration on L^dag just off the slow eigenvalue, projecting out
  // the identity (left zero mode) after each step.
  const C lambda(s.eigenvalues.front().real(), s.eigenvalues.front().imag());
  const C mu = std::conj(lambda) * R(1 + 1e-7);
  SpC shifted = SpC(l.adjoint());
  for (Eigen::Index i = 0; i < dim; ++i) shifted.coeffRef(i, i) -= mu;
  shifted.makeCompressed();
  Eigen::SparseLU<SpC> lu;
  lu.compute(shifted);
  if (lu.info() != Eigen::Success) throw IterativeNoConvergence("adjoint factorization failed", NAN);
  auto deflate = [&](VecC& y) {
    y -= identity * rho.dot(y);
    y /= y.norm();
  };
  // Start from number plus both quadratures, so neither parity sector of a
  // symmetric model is missed.
  VecC y = VecC::Zero(dim);
  for (int i = 0; i < n; ++i) {
    y[i + n * i] = R(i);
    if (i + 1 < n) {
      const R s = std::sqrt(R(i + 1));
      y[i + n * (i + 1)] = C(s, s);
      y[i + 1 + n * i] = C(s, -s);
    }
  }
  deflate(y);
  for (int it = 0; it < 4; ++it) {
    y = lu.solve(y).eval();
    deflate(y);
  }

  BasinWeights w;
  w.residual = static_cast<double>((SpC(l.adjoint()) * y - std::conj(lambda) * y).norm()) / std::max(op.norm, 1e-300);
  if (!(w.residual < 1e-10))
    throw IterativeNoConvergence("slow left eigenmode not resolved", w.residual);
  auto value = [&](cplx beta) {
    const Eigen::VectorXcd c = coherent_state(beta, n);
    const VecC proj = vec(c * c.adjoint()).cast<C>();
    return y.dot(proj);
  };
  const C f1 = value(first), f2 = value(second);
  // p1 f1 + p2 f2 = 0 with p1 + p2 = 1.
  const C r = f1 / f2;
  w.imag_ratio = static_cast<double>(std::abs(r.imag()) / std::max(std::abs(r.real()), R(1e-300)));
  w.first = static_cast<double>((R(1) / (R(1) - r)).real());
  w.second = static_cast<double>((-r / (R(1) - r)).real());
  return w;
}

}  // namespace switchrate
