#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <string>
#include <vector>

#include "switchrate/meanfield.hpp"
#include "switchrate/model.hpp"

namespace switchrate {

using SparseMatC = Eigen::SparseMatrix<cplx>;

// Column-stacking convention throughout: vec(rho) concatenates the columns of
// rho, so vec(A rho B) = (B^T kron A) vec(rho) and rho(i, j) sits at i + N j.
struct Superoperator {
  int n_fock = 0;
  SparseMatC matrix;
  std::string params_hash;
  double norm = 0.0;  // max absolute row sum
  double rate = 1.0;  // typical rate of the parameters, sets the default shift
};

struct BuildOptions {
  long long max_dim = 40000;  // cap on n_fock^2
  // Keep kappa2 D[a^2 - alpha0^2] literally when alpha0_sq is set instead of
  // folding it into the two-photon drive.
  bool literal_alpha0 = true;
};

// Truncated ladder operator, a|n> = sqrt(n)|n-1>.
SparseMatC annihilation(int n_fock);
SparseMatC hamiltonian(const SystemParams& p, int n_fock);
Superoperator build_lindbladian(const SystemParams& p, int n_fock, const BuildOptions& opt = {});

enum class GapMethod { automatic, dense, iterative };

struct GapOptions {
  GapMethod method = GapMethod::automatic;
  int auto_dense_max = 20;  // automatic picks dense up to this truncation
  int dense_max = 45;
  int n_eigs = 6;
  double shift = 0.0;  // shift-invert point; 0 selects 1e-3 * rate scale
  double tol = 1e-12;
  int max_krylov = 80;
  double zero_tol = 1e-14;  // relative to the superoperator norm
};

struct SpectralSummary {
  double gap = 0.0;
  double gap_imag = 0.0;
  Eigen::MatrixXcd steady_state;
  int n_zero_modes = 1;
  std::vector<cplx> eigenvalues;  // the computed part of the spectrum, zero mode excluded, by -Re
  GapMethod method = GapMethod::dense;
  double steady_residual = 0.0;   // ||L vec(rho_ss)|| / ||L||
  int n_fock = 0;
};

SpectralSummary dissipative_gap(const Superoperator& op, const GapOptions& opt = {});
// Full dense spectrum, for structural checks at small truncation.
Eigen::VectorXcd dense_spectrum(const Superoperator& op);
Eigen::MatrixXcd steady_state(const Superoperator& op);

Eigen::VectorXcd vec(const Eigen::MatrixXcd& rho);
Eigen::MatrixXcd unvec(const Eigen::VectorXcd& v, int n);

// <a^dag^p a^q> for each requested (p, q).
struct MomentOrder {
  int creation;
  int annihilation;
};
std::vector<cplx> steady_state_moments(const SpectralSummary& s, const std::vector<MomentOrder>& orders);
// Convenience: <a>, <a^2>, <a^dag a>.
std::vector<cplx> steady_state_moments(const SpectralSummary& s);

struct TruncationReport {
  std::vector<int> n_fock;
  std::vector<double> gaps;
  std::vector<double> rel_change;  // first entry NaN
  bool converged = false;
  int n_converged = 0;  // smallest N whose change from its predecessor is below tol
  bool oscillating = false;
  double tol = 1e-4;
};

TruncationReport truncation_scan(const SystemParams& p, const std::vector<int>& n_list,
                                 const GapOptions& opt = {}, double tol = 1e-4);

// Grows the truncation in steps until two consecutive gaps agree to `tol`
// relative, starting from a size estimated from the fixed points.
struct AutoGapResult {
  SpectralSummary summary;
  TruncationReport scan;
  int n_fock = 0;
  bool converged = false;
};
AutoGapResult gap_auto_truncation(const SystemParams& p, int n_max, const GapOptions& opt = {},
                                  int n_step = 5, double tol = 1e-4);
int suggested_truncation(const SystemParams& p);

// Photon-number populations below and above `threshold` (weights of Fock
// states n < threshold and n >= threshold).
struct NumberSplit {
  double below = 0.0;
  double above = 0.0;
};
NumberSplit photon_number_split(const Eigen::MatrixXcd& rho, double threshold);

// Steady-state weights of the basins of two stable points. The slowest left
// eigenmode is flat on each basin and orthogonal to the steady state, so its
// values on coherent states at the two points fix the split even when one
// weight is exponentially small. `s` must come from dissipative_gap(op).
struct BasinWeights {
  double first = 0.0;
  double second = 0.0;
  double residual = 0.0;  // ||L^dag y - conj(lambda) y|| / (||L|| ||y||)
  double imag_ratio = 0.0;  // |Im| / |Re| of the value ratio; small when the two-basin picture holds
};
BasinWeights basin_weights(const Superoperator& op, const SpectralSummary& s, cplx first, cplx second);
Eigen::VectorXcd coherent_state(cplx beta, int n_fock);

}  // namespace switchrate
