#pragma once

#include <Eigen/Core>
#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "switchrate/model.hpp"

namespace switchrate {

enum class Stability { stable, unstable };

struct FixedPoint {
  cplx z;
  Stability stability = Stability::unstable;
  std::array<cplx, 2> jacobian_eigs{};
  double residual = 0.0;
};

struct FixedPointSet {
  // Stable points first, ordered by |z| descending ("bright" before "dim"),
  // then the unstable ones by |z| ascending.
  std::vector<FixedPoint> points;
  bool bistable = false;
  std::string diagnostic;  // set when the set falls outside the 2+1 picture

  std::vector<FixedPoint> stable() const;
  std::vector<FixedPoint> unstable() const;
  // Requires bistable; throws NotBistable otherwise.
  const FixedPoint& stable_point(int i) const;
  const FixedPoint& saddle() const;
};

struct MultistartOptions {
  int n_angles = 24;
  int n_radii = 12;
  double dedup_tol = 1e-8;
  double separation = 1e-3;  // minimum pairwise distance for bistability
  int max_newton = 200;
  int max_halvings = 50;
  double step_tol = 1e-13;
  double residual_tol = 1e-10;
};

// d alpha / dt of the noise-free dynamics, dephasing included as -kappa_phi/2.
cplx meanfield_rhs(const SystemParams& p, cplx z);
// i d alpha/dt, the fixed-point polynomial in frequency units.
cplx fixed_point_residual(const SystemParams& p, cplx z);
// Real 2x2 Jacobian of (Re alpha, Im alpha) -> (Re, Im) of meanfield_rhs.
Eigen::Matrix2d meanfield_jacobian(const SystemParams& p, cplx z);

std::pair<Stability, std::array<cplx, 2>> classify_stability(const SystemParams& p, cplx z);

FixedPointSet fixed_points_general(const SystemParams& p, const MultistartOptions& opt = {});

// Leading large-drive fixed points {0, +w, -w} of the cat regime.
std::vector<cplx> fixed_points_cat_asymptotic(const SystemParams& p);

struct KerrCubic {
  double shift;  // 2 Re(K1* K2) / (3|K2|^2)
  double p;
  double q;
  double discriminant;  // 4p^3 + 27q^2, negative for three real roots
};

// Depressed form of the photon-number cubic of the driven Kerr oscillator.
KerrCubic kerr_cubic(const SystemParams& p);
// Photon numbers R solving the cubic (all three in the bistable case).
std::vector<double> kerr_photon_numbers(const SystemParams& p);
FixedPointSet fixed_points_kerr(const SystemParams& p);

struct BistabilityMargin {
  bool bistable;
  double discriminant;
};
BistabilityMargin bistability_region(const SystemParams& p);

// Noise-free relaxation from the saddle to stable point `target` of `fps`,
// sampled densely enough to follow the phase of z around any point.
// The first sample is the saddle itself.
std::vector<cplx> heteroclinic_path(const SystemParams& p, const FixedPointSet& fps, int target,
                                    const std::vector<cplx>& watch = {});

}  // namespace switchrate
