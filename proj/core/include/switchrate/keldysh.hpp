#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "switchrate/meanfield.hpp"
#include "switchrate/model.hpp"

namespace switchrate {

using Vec2c = Eigen::Vector2cd;
using Mat2c = Eigen::Matrix2cd;

// Classical/quantum fields after the canonical transformation. The barred
// fields are independent complex variables; on physical points
// b_cl_bar = conj(b_cl) and b_q = b_q_bar = 0.
struct PhaseSpaceState {
  cplx b_cl{};
  cplx b_cl_bar{};
  cplx b_q{};
  cplx b_q_bar{};
};

// Coordinates X = (b_cl, b_cl_bar) and momenta P = (b_q_bar, -b_q).
Vec2c coordinates(const PhaseSpaceState& s);
Vec2c momenta(const PhaseSpaceState& s);
PhaseSpaceState make_state(const Vec2c& x, const Vec2c& p);

// Which dephasing contribution enters the tensors. `derived` follows from
// normal ordering the a^dag a jump; `printed_offdiag` is the constant
// off-diagonal diffusion with cubic drift, kept only as a test field.
enum class DephasingTensors { derived, printed_offdiag };

// Drift A and (symmetric) diffusion D of the density L = P.A + P^T D P.
// D is diagonal (D, Dbar) without dephasing.
struct DriftDiffusion {
  Vec2c a_vec;
  Mat2c d;
};

DriftDiffusion drift_diffusion(const SystemParams& p, const Vec2c& x,
                               DephasingTensors form = DephasingTensors::derived);

// Drift and diffusion with first and second coordinate derivatives;
// da(i, j) = d_i A_j, dd[i](j, k) = d_i D_jk, and so on.
struct TensorDerivatives {
  Vec2c a;
  Mat2c d;
  Mat2c da;
  std::array<Mat2c, 2> dd;
  std::array<Mat2c, 2> d2a;                  // d2a[j](i, l) = d_i d_l A_j
  std::array<std::array<Mat2c, 2>, 2> d2d;   // d2d[i][l](j, k) = d_i d_l D_jk
};
TensorDerivatives tensor_derivatives(const SystemParams& p, const Vec2c& x,
                                     DephasingTensors form = DephasingTensors::derived);

cplx lindbladian_density(const SystemParams& p, const PhaseSpaceState& s);

// Typical rate of the model, used to scale tolerances.
double rate_scale(const SystemParams& p);

struct QuantumPair {
  cplx b_q;
  cplx b_q_bar;
};

// Noise fields on the time-reversed manifold, from the closed-form ratio of
// polynomials. Requires kappa_phi = 0; throws SingularDiffusion on the zero
// locus of the diffusion.
QuantumPair tr_parametrization(const SystemParams& p, const Vec2c& x);
// Same manifold as momenta, P = -D^{-1} A, via linear algebra.
Vec2c tr_momenta(const SystemParams& p, const Vec2c& x,
                 DephasingTensors form = DephasingTensors::derived);

enum class CurlCondition { ansatz_Zprime, fokker_planck_Z };

struct SampleBox {
  cplx center{};
  double half_width = 3.0;  // real and imaginary parts within +-half_width
};

struct CurlReport {
  double max_curl = 0.0;
  bool pass = false;
  int evaluated = 0;
  int skipped = 0;
  // Mean cross partials over the evaluated samples, d_1 Z_2 and d_2 Z_1.
  cplx mean_d1z2{};
  cplx mean_d2z1{};
};

// Samples both coordinates independently in the box (analytic continuation),
// differentiates Z by central differences and reports the largest
// |d_1 Z_2 - d_2 Z_1|. Throws AllSamplesSkipped when D is singular everywhere.
CurlReport check_curl_condition(const SystemParams& p, CurlCondition which, const SampleBox& box,
                                int n_samples, std::uint64_t seed = 0,
                                DephasingTensors form = DephasingTensors::derived);

// Z or Z' at a point, exposed for tests.
Vec2c curl_field(const SystemParams& p, CurlCondition which, const Vec2c& x,
                 DephasingTensors form = DephasingTensors::derived);

struct PotentialCoeffs {
  cplx z_plus;
  cplx z_minus;
  cplx c_plus;   // zero when confluent
  cplx c_minus;  // zero when confluent
  cplx a_coef;
  cplx b_coef;
  bool confluent = false;
  cplx k2;
  cplx lambda3;
  double offset = 0.0;  // subtracted so that Phi(0) = 0 where defined
};

PotentialCoeffs potential_coeffs(const SystemParams& p);

// d Psi / dz, the holomorphic part of the potential gradient.
cplx potential_g(const SystemParams& p, cplx z);

// Potential with every logarithm cut along the negative imaginary axis
// (relative to its branch point).
double potential_phi(const SystemParams& p, cplx z);
double potential_phi(const PotentialCoeffs& c, cplx z);

enum class BranchPolicy { fixed_cut, path_continuation };

struct ActionOptions {
  BranchPolicy policy = BranchPolicy::path_continuation;
  std::vector<std::string>* warnings = nullptr;
};

// Exponent iS = Phi(to_unstable) - Phi(from_fp). With path continuation the
// logarithms follow the noise-free relaxation from the saddle to from_fp, so
// the result is independent of where the cuts sit.
double action(const SystemParams& p, cplx from_fp, cplx to_unstable, const ActionOptions& opt = {});

struct RateEstimate {
  cplx from_first;   // bright (larger |z|) stable point
  cplx from_second;
  cplx saddle;
  double is_first_to_second = 0.0;
  double is_second_to_first = 0.0;
  double prefactor_first = 1.0;
  double prefactor_second = 1.0;
  double rate_first_to_second = 0.0;
  double rate_second_to_first = 0.0;
  double gap = 0.0;  // mean of the two rates
  std::vector<std::string> warnings;
};

RateEstimate switching_rates(const SystemParams& p, std::optional<double> prefactor = std::nullopt,
                             BranchPolicy policy = BranchPolicy::path_continuation);
// Distinct prefactors per direction (first->second, second->first).
RateEstimate switching_rates(const SystemParams& p, double prefactor_first, double prefactor_second,
                             BranchPolicy policy = BranchPolicy::path_continuation);
RateEstimate switching_rates(const SystemParams& p, const FixedPointSet& fps, double prefactor_first,
                             double prefactor_second,
                             BranchPolicy policy = BranchPolicy::path_continuation);

// Log-density of the steady complex-P function on the physical slice,
// Phi(z) - ln|D(z) Dbar(z*)|, unnormalized.
double complexp_potential(const SystemParams& p, cplx z);

}  // namespace switchrate
