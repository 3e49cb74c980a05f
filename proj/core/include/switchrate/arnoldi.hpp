#pragma once

#include <Eigen/Core>
#include <complex>
#include <functional>
#include <vector>

namespace switchrate {

// Largest-modulus eigenpairs of a linear operator given only by its action,
// by Arnoldi with full reorthogonalization and explicit restarts.
struct ArnoldiOptions {
  int nev = 4;
  int max_krylov = 80;
  int max_restarts = 30;
  double tol = 1e-12;  // residual relative to |theta|
};

struct ArnoldiResult {
  std::vector<std::complex<double>> values;  // by decreasing modulus
  std::vector<Eigen::VectorXcd> vectors;
  std::vector<double> residuals;              // relative
  bool converged = false;
  int iterations = 0;
};

using LinearOperator = std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>;

ArnoldiResult arnoldi_largest(const LinearOperator& op, Eigen::VectorXcd start, const ArnoldiOptions& opt);

}  // namespace switchrate
