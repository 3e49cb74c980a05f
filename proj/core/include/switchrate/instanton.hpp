#pragma once

#include <Eigen/Core>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "switchrate/keldysh.hpp"

namespace switchrate {

struct Trajectory {
  std::vector<double> times;
  std::vector<PhaseSpaceState> states;
  std::vector<double> running_action;  // real part of the accumulated iS
  double accumulated_action = 0.0;     // iS up to the closest approach
  double action_imag = 0.0;            // vanishes on the physical slice
  double max_density_drift = 0.0;      // max |L(t) - L(0)| up to the closest approach
  double closest_approach = 0.0;
  double t_closest = 0.0;
  double max_slice_residual = 0.0;     // |b_cl_bar - conj b_cl| + |b_q_bar + conj b_q|
  std::string stop_reason;
};

// Hamiltonian flow linearized at a P = 0 fixed point, in the coordinates
// (X1, X2, P1, P2). The repulsive basis lives on the physical slice
// X2 = conj X1, P2 = conj P1 and is expressed in (Re X1, Im X1, Re P1, Im P1).
struct SaddleJacobian {
  Eigen::Matrix4cd matrix;
  Eigen::Vector4cd eigenvalues;
  Eigen::Matrix4d slice_matrix;
  std::array<Eigen::Vector4d, 2> repulsive_basis;
  int n_repulsive = 0;
  double pairing_residual = 0.0;  // max over eigenvalues of min_j |lambda + lambda_j|, relative
};

// Time derivative of the four fields from Hamilton's equations of the
// density, dX/dt = dL/dP, dP/dt = -dL/dX.
PhaseSpaceState eom_rhs(const SystemParams& p, const PhaseSpaceState& s);
// The same flow written out by hand for kappa2 D[a^2 - alpha0^2] + kappa_phi D[a^dag a]
// and nothing else. Throws InvalidParams for other terms.
PhaseSpaceState eom_rhs_dephased_cat(const SystemParams& p, const PhaseSpaceState& s);
// Complex 4x4 Jacobian of eom_rhs in (X1, X2, P1, P2).
Eigen::Matrix4cd eom_jacobian(const SystemParams& p, const PhaseSpaceState& s);

struct IntegrateOptions {
  double tol = 1e-10;
  double sample_dt = 0.0;  // 0 stores every accepted step
  double escape_radius = 0.0;  // 0 selects 10 (1 + largest fixed-point amplitude)
  PhaseSpaceState target{};    // closest approach is measured to this state; shooting fills in the saddle
  double drift_budget = 0.0;   // 0 selects 1e-6 * rate scale
  bool store = true;
};

Trajectory integrate(const SystemParams& p, const PhaseSpaceState& initial, double t_end,
                     const IntegrateOptions& opt = {});

SaddleJacobian saddle_jacobian(const SystemParams& p, const PhaseSpaceState& fixed_point);

struct ShootOptions {
  double eps = 1e-5;  // launch distance relative to |from_fp|
  int n_theta = 720;
  int refine_iters = 40;
  double accept_radius = 1e-2;
  double t_max = 0.0;  // 0 selects 50 / (kappa2, or kappa1 without two-photon loss)
  IntegrateOptions integ{};
  int max_candidates = 8;
};

struct ShotCandidate {
  double theta = 0.0;
  double closest_approach = 0.0;
  double action = 0.0;
};

struct ShotResult {
  Trajectory best;
  double theta = 0.0;
  std::vector<double> thetas;
  std::vector<double> scores;  // closest approach per grid angle
  std::vector<ShotCandidate> candidates;  // refined local minima, accepted or not
};

// Launches from the repulsive plane of (from_fp, P = 0), refines local minima
// of the closest approach to the target saddle and returns, among candidates
// within the acceptance radius, the one with the largest action (the
// dominant switching path). Ties go to the smaller angle. Throws
// SingularDiffusion when the start is noiseless, NoCandidate when no path
// comes within the acceptance radius.
ShotResult shoot_instanton(const SystemParams& p, cplx from_fp, const ShootOptions& opt = {});

// Largest distance from the path's b_cl to the noise-free relaxation curve
// from the saddle to stable point `target`.
double relaxation_deviation(const SystemParams& p, const Trajectory& t, const FixedPointSet& fps, int target);

}  // namespace switchrate
