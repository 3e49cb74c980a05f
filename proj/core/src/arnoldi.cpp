#include "switchrate/arnoldi.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <numeric>

namespace switchrate {

ArnoldiResult arnoldi_largest(const LinearOperator& op, Eigen::VectorXcd start, const ArnoldiOptions& opt) {
  using Eigen::MatrixXcd;
  using Eigen::VectorXcd;
  const Eigen::Index n = start.size();
  const int m_max = static_cast<int>(std::min<Eigen::Index>(opt.max_krylov, n));
  const int nev = std::min(opt.nev, m_max - 1);

  ArnoldiResult best;
  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    MatrixXcd v(n, m_max + 1);
    MatrixXcd h = MatrixXcd::Zero(m_max + 1, m_max);
    v.col(0) = start.normalized();
    VectorXcd w(n);

    for (int j = 0; j < m_max; ++j) {
      op(v.col(j), w);
      ++best.iterations;
      // Two passes of classical Gram-Schmidt.
      for (int pass = 0; pass < 2; ++pass) {
        VectorXcd c = v.leftCols(j + 1).adjoint() * w;
        w.noalias() -= v.leftCols(j + 1) * c;
        h.col(j).head(j + 1) += c;
      }
      const double beta = w.norm();
      h(j + 1, j) = beta;
      const int m = j + 1;
      const bool last = m == m_max;
      const bool breakdown = beta < 1e-14 * h.col(j).head(j + 1).norm();
      if (m < nev + 2 && !last && !breakdown) {
        v.col(j + 1) = w / beta;
        continue;
      }
      if (!(last || breakdown || m % 5 == 0)) {
        v.col(j + 1) = w / beta;
        continue;
      }

      Eigen::ComplexEigenSolver<MatrixXcd> es(h.topLeftCorner(m, m));
      std::vector<int> order(static_cast<std::size_t>(m));
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(es.eigenvalues()[a]) > std::abs(es.eigenvalues()[b]);
      });
      ArnoldiResult r;
      r.iterations = best.iterations;
      bool ok = true;
      const int take = std::min(nev, m);
      for (int k = 0; k < take; ++k) {
        const int i = order[static_cast<std::size_t>(k)];
        VectorXcd y = es.eigenvectors().col(i).normalized();
        const std::complex<double> theta = es.eigenvalues()[i];
        const double res = breakdown ? 0.0 : beta * std::abs(y[m - 1]) / std::max(std::abs(theta), 1e-300);
        r.values.push_back(theta);
        r.vectors.push_back(v.leftCols(m) * y);
        r.residuals.push_back(res);
        ok = ok && res < opt.tol;
      }
      r.converged = ok;
      if (ok || last || breakdown) {
        best = std::move(r);
        if (ok || breakdown) {
          best.converged = true;
          return best;
        }
        // Explicit restart on the sum of the wanted Ritz vectors.
        start = VectorXcd::Zero(n);
        for (const auto& x : best.vectors) start += x;
        break;
      }
      v.col(j + 1) = w / beta;
    }
  }
  return best;
}

}  // namespace switchrate
