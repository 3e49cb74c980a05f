#include "switchrate/instanton.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "parallel.hpp"
#include "switchrate/errors.hpp"

namespace switchrate {

namespace {

using State = std::array<double, 10>;  // 4 complex fields + complex action

PhaseSpaceState unpack(const State& y) {
  return {cplx(y[0], y[1]), cplx(y[2], y[3]), cplx(y[4], y[5]), cplx(y[6], y[7])};
}

State pack(const PhaseSpaceState& s, cplx act) {
  return {s.b_cl.real(), s.b_cl.imag(), s.b_cl_bar.real(), s.b_cl_bar.imag(), s.b_q.real(), s.b_q.imag(),
          s.b_q_bar.real(), s.b_q_bar.imag(), act.real(), act.imag()};
}

// Euclidean distance over the eight real components (the i b_q relabeling
// leaves moduli unchanged).
double embed_distance(const PhaseSpaceState& a, const PhaseSpaceState& b) {
  return std::sqrt(std::norm(a.b_cl - b.b_cl) + std::norm(a.b_cl_bar - b.b_cl_bar) +
                   std::norm(a.b_q - b.b_q) + std::norm(a.b_q_bar - b.b_q_bar));
}

double slice_residual(const PhaseSpaceState& s) {
  return std::abs(s.b_cl_bar - std::conj(s.b_cl)) + std::abs(s.b_q_bar + std::conj(s.b_q));
}

Eigen::Matrix2d real_block(cplx a, cplx b) {
  Eigen::Matrix2d j;
  j << (a + b).real(), -(a - b).imag(), (a + b).imag(), (a - b).real();
  return j;
}

PhaseSpaceState from_slice(const Eigen::Vector4d& y) {
  const cplx x(y[0], y[1]), m(y[2], y[3]);
  return make_state(Vec2c(x, std::conj(x)), Vec2c(m, std::conj(m)));
}

double default_time_scale(const SystemParams& q) { return q.kappa2 > 0.0 ? q.kappa2 : std::max(q.kappa1, 1e-300); }

double default_escape(const SystemParams& q) {
  double m = 0.0;
  if (q.alpha0_sq) m = std::sqrt(std::abs(*q.alpha0_sq));
  try {
    for (const auto& f : fixed_points_general(q).points) m = std::max(m, std::abs(f.z));
  } catch (const Error&) {
  }
  return 10.0 * (1.0 + m);
}

}  // namespace

PhaseSpaceState eom_rhs(const SystemParams& p, const PhaseSpaceState& s) {
  const Vec2c x = coordinates(s), m = momenta(s);
  const TensorDerivatives t = tensor_derivatives(p, x);
  const Vec2c xdot = t.a + 2.0 * t.d * m;
  Vec2c pdot;
  for (int i = 0; i < 2; ++i) {
    cplx v{};
    for (int j = 0; j < 2; ++j) {
      v -= m[j] * t.da(i, j);
      for (int k = 0; k < 2; ++k) v -= m[j] * m[k] * t.dd[i](j, k);
    }
    pdot[i] = v;
  }
  return {xdot[0], xdot[1], -pdot[1], pdot[0]};
}

PhaseSpaceState eom_rhs_dephased_cat(const SystemParams& p, const PhaseSpaceState& s) {
  const SystemParams q = to_drive_form(p);
  if (q.delta != 0.0 || q.kerr != 0.0 || q.kappa1 != 0.0 || q.lambda1 != cplx{} || q.lambda3 != cplx{} ||
      q.kappa2 <= 0.0)
    throw InvalidParams("explicit dephased-cat equations cover kappa2, alpha0^2 and kappa_phi only");
  const double k2 = q.kappa2, kp = q.kappa_phi;
  const cplx c = alpha0_sq_from_drive(k2, q.lambda2);
  const cplx cb = std::conj(c);
  const cplx b = s.b_cl, bb = s.b_cl_bar, bq = s.b_q, bqb = s.b_q_bar;
  PhaseSpaceState d;
  d.b_cl = k2 * (bqb + bb) * (c - b * b) + kp * b * (-bqb * b - bq * bb - 0.5);
  d.b_cl_bar = k2 * (b - bq) * (cb - bb * bb) + kp * bb * (b * bqb + bb * bq - 0.5);
  d.b_q_bar = bqb * (2.0 * k2 * b * bb + 0.5 * kp) + k2 * bq * (cb - bb * bb) + bqb * bqb * b * (k2 + kp) +
              kp * bqb * bq * bb;
  d.b_q = k2 * bqb * (c - b * b) + bq * (2.0 * k2 * b * bb + 0.5 * kp) - kp * bqb * bq * b -
          bq * bq * bb * (k2 + kp);
  return d;
}

Eigen::Matrix4cd eom_jacobian(const SystemParams& p, const PhaseSpaceState& s) {
  const Vec2c x = coordinates(s), m = momenta(s);
  const TensorDerivatives t = tensor_derivatives(p, x);
  Eigen::Matrix4cd j = Eigen::Matrix4cd::Zero();
  for (int i = 0; i < 2; ++i) {
    for (int l = 0; l < 2; ++l) {
      cplx xx = t.da(l, i), pp = -t.da(i, l), px{};
      for (int k = 0; k < 2; ++k) {
        xx += 2.0 * t.dd[l](i, k) * m[k];
        pp -= 2.0 * m[k] * t.dd[i](l, k);
      }
      for (int a = 0; a < 2; ++a) {
        px -= m[a] * t.d2a[a](i, l);
        for (int b = 0; b < 2; ++b) px -= m[a] * m[b] * t.d2d[i][l](a, b);
      }
      j(i, l) = xx;
      j(i, 2 + l) = 2.0 * t.d(i, l);
      j(2 + i, l) = px;
      j(2 + i, 2 + l) = pp;
    }
  }
  return j;
}

Trajectory integrate(const SystemParams& p, const PhaseSpaceState& initial, double t_end,
                     const IntegrateOptions& opt) {
  namespace ode = boost::numeric::odeint;
  if (!(opt.tol >= 1e-12 && opt.tol <= 1e-6)) throw InvalidParams("integration tolerance must lie in [1e-12, 1e-6]");
  const SystemParams q = to_drive_form(p);
  q.validate();
  const double escape = opt.escape_radius > 0.0 ? opt.escape_radius : default_escape(q);
  const double budget = opt.drift_budget > 0.0 ? opt.drift_budget : 1e-6 * rate_scale(q);

  auto rhs = [&](const State& y, State& dy, double) {
    const PhaseSpaceState s = unpack(y);
    const PhaseSpaceState d = eom_rhs(q, s);
    const Vec2c mom = momenta(s);
    const cplx da = -(mom[0] * d.b_cl + mom[1] * d.b_cl_bar);
    dy = pack(d, da);
  };
  auto density = [&](const State& y) { return lindbladian_density(q, unpack(y)); };

  Trajectory tr;
  const State y0 = pack(initial, cplx{});
  const cplx l0 = density(y0);
  auto stepper = ode::make_dense_output(opt.tol, opt.tol, ode::runge_kutta_dopri5<State>());
  stepper.initialize(y0, 0.0, 1e-4 / rate_scale(q));

  double best = embed_distance(initial, opt.target);
  State y_best = y0;
  double t_best = 0.0;
  double drift_run = 0.0, drift_at_best = 0.0;
  double slice_run = slice_residual(initial), slice_at_best = slice_run;
  std::vector<std::pair<double, State>> stored;
  if (opt.store) stored.emplace_back(0.0, y0);
  double next_sample = opt.sample_dt;
  tr.stop_reason = "t_max";

  try {
    while (stepper.current_time() < t_end) {
      auto [ta, tb] = stepper.do_step(rhs);
      if (stepper.current_time_step() < 1e-14 * (1.0 + std::abs(tb)))
        throw StepSizeUnderflow("step size underflow", tb);
      const int sub = 8;
      for (int k = 1; k <= sub; ++k) {
        State y;
        const double t = ta + (tb - ta) * k / sub;
        stepper.calc_state(t, y);
        const double dist = embed_distance(unpack(y), opt.target);
        if (dist < best) {
          best = dist;
          y_best = y;
          t_best = t;
          drift_at_best = std::max(drift_run, std::abs(density(y) - l0));
          slice_at_best = std::max(slice_run, slice_residual(unpack(y)));
        }
      }
      const State& yc = stepper.current_state();
      drift_run = std::max(drift_run, std::abs(density(yc) - l0));
      slice_run = std::max(slice_run, slice_residual(unpack(yc)));
      if (opt.store) {
        if (opt.sample_dt <= 0.0) {
          stored.emplace_back(tb, yc);
        } else {
          while (next_sample <= tb) {
            State y;
            stepper.calc_state(next_sample, y);
            stored.emplace_back(next_sample, y);
            next_sample += opt.sample_dt;
          }
        }
      }
      double norm = 0.0;
      for (int i = 0; i < 8; ++i) norm += yc[i] * yc[i];
      if (std::sqrt(norm) > escape) {
        tr.stop_reason = "escaped";
        break;
      }
      if (drift_run > 100.0 * budget) {
        tr.stop_reason = "density drift";
        break;
      }
    }
  } catch (const StepSizeUnderflow&) {
    throw;
  } catch (const std::exception& e) {
    throw StepSizeUnderflow(std::string("integration failed: ") + e.what(), stepper.current_time());
  }

  // Keep the path up to its closest approach: that is the switching segment.
  for (const auto& [t, y] : stored) {
    if (t >= t_best) break;
    tr.times.push_back(t);
    tr.states.push_back(unpack(y));
    tr.running_action.push_back(y[8]);
  }
  tr.times.push_back(t_best);
  tr.states.push_back(unpack(y_best));
  tr.running_action.push_back(y_best[8]);
  tr.accumulated_action = y_best[8];
  tr.action_imag = y_best[9];
  tr.closest_approach = best;
  tr.t_closest = t_best;
  tr.max_density_drift = drift_at_best;
  tr.max_slice_residual = slice_at_best;
  return tr;
}

SaddleJacobian saddle_jacobian(const SystemParams& p, const PhaseSpaceState& fp) {
  const PhaseSpaceState d = eom_rhs(p, fp);
  const double r = std::sqrt(std::norm(d.b_cl) + std::norm(d.b_cl_bar) + std::norm(d.b_q) + std::norm(d.b_q_bar));
  if (!(r < 1e-8)) throw NotAFixedPoint("equations of motion do not vanish at the requested state");

  SaddleJacobian out;
  out.matrix = eom_jacobian(p, fp);
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> ces(out.matrix, false);
  out.eigenvalues = ces.eigenvalues();
  const double scale = std::max(out.eigenvalues.cwiseAbs().maxCoeff(), 1e-300);
  for (int i = 0; i < 4; ++i) {
    double m = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 4; ++j) m = std::min(m, std::abs(out.eigenvalues[i] + out.eigenvalues[j]));
    out.pairing_residual = std::max(out.pairing_residual, m / scale);
    if (out.eigenvalues[i].real() > 0.0) ++out.n_repulsive;
  }

  // Restrict to the slice: partners of X1, P1 are X2 = conj X1, P2 = conj P1.
  const Eigen::Matrix4cd& j = out.matrix;
  for (int row = 0; row < 2; ++row)
    for (int col = 0; col < 2; ++col) {
      const int fr = row == 0 ? 0 : 2;  // X1 or P1 derivative
      const int vc = col == 0 ? 0 : 2;  // X1 or P1 input
      out.slice_matrix.block<2, 2>(2 * row, 2 * col) = real_block(j(fr, vc), j(fr, vc + 1));
    }
  Eigen::EigenSolver<Eigen::Matrix4d> es(out.slice_matrix);
  std::vector<Eigen::Vector4d> dirs;
  for (int i = 0; i < 4; ++i) {
    const cplx lam = es.eigenvalues()[i];
    if (lam.real() <= 0.0) continue;
    const Eigen::Vector4cd v = es.eigenvectors().col(i);
    if (std::abs(lam.imag()) < 1e-12 * scale) {
      dirs.push_back(v.real());
    } else if (lam.imag() > 0.0) {
      dirs.push_back(v.real());
      dirs.push_back(v.imag());
    }
  }
  if (dirs.size() != 2)
    throw NotAFixedPoint("expected a two-dimensional repulsive plane, found " + std::to_string(dirs.size()));
  Eigen::Vector4d e1 = dirs[0].normalized();
  Eigen::Vector4d e2 = (dirs[1] - e1.dot(dirs[1]) * e1).normalized();
  out.repulsive_basis = {e1, e2};
  return out;
}

ShotResult shoot_instanton(const SystemParams& p, cplx from_fp, const ShootOptions& opt) {
  const SystemParams q = to_drive_form(p);
  const PhaseSpaceState fp = make_state(Vec2c(from_fp, std::conj(from_fp)), Vec2c::Zero());
  if (drift_diffusion(q, coordinates(fp)).d.cwiseAbs().maxCoeff() < 1e-12 * rate_scale(q))
    throw SingularDiffusion("diffusion vanishes at the starting point; noise cannot move it");
  const SaddleJacobian jac = saddle_jacobian(q, fp);
  const double t_max = opt.t_max > 0.0 ? opt.t_max : 50.0 / default_time_scale(q);
  IntegrateOptions io = opt.integ;
  if (io.escape_radius <= 0.0) io.escape_radius = default_escape(q);
  if (io.target.b_cl == cplx{} && io.target.b_cl_bar == cplx{}) {
    const cplx s = fixed_points_general(q).saddle().z;
    io.target = make_state(Vec2c(s, std::conj(s)), Vec2c::Zero());
  }
  const Eigen::Vector4d base(from_fp.real(), from_fp.imag(), 0.0, 0.0);
  const double step = opt.eps * std::max(std::abs(from_fp), 1e-12);

  auto launch = [&](double theta) {
    const Eigen::Vector4d y =
        base + step * (std::cos(theta) * jac.repulsive_basis[0] + std::sin(theta) * jac.repulsive_basis[1]);
    return from_slice(y);
  };
  auto run = [&](double theta, bool store) {
    IntegrateOptions o = io;
    o.store = store;
    return integrate(q, launch(theta), t_max, o);
  };
  auto score = [&](double theta) {
    try {
      return run(theta, false).closest_approach;
    } catch (const StepSizeUnderflow&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  ShotResult res;
  const int n = opt.n_theta;
  res.thetas.resize(static_cast<std::size_t>(n));
  res.scores.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) res.thetas[static_cast<std::size_t>(k)] = 2.0 * std::numbers::pi * k / n;
  detail::parallel_for(n, [&](int k) {
    res.scores[static_cast<std::size_t>(k)] = score(res.thetas[static_cast<std::size_t>(k)]);
  });

  // Local minima of the periodic score, best first.
  std::vector<int> minima;
  for (int k = 0; k < n; ++k) {
    const double s = res.scores[static_cast<std::size_t>(k)];
    const double l = res.scores[static_cast<std::size_t>((k + n - 1) % n)];
    const double r = res.scores[static_cast<std::size_t>((k + 1) % n)];
    if (std::isfinite(s) && s <= l && s < r) minima.push_back(k);
  }
  std::sort(minima.begin(), minima.end(), [&](int a, int b) {
    return res.scores[static_cast<std::size_t>(a)] < res.scores[static_cast<std::size_t>(b)];
  });
  if (static_cast<int>(minima.size()) > opt.max_candidates) minima.resize(static_cast<std::size_t>(opt.max_candidates));

  const double dth = 2.0 * std::numbers::pi / n;
  res.candidates.resize(minima.size());
  detail::parallel_for(static_cast<int>(minima.size()), [&](int c) {
    const int k = minima[static_cast<std::size_t>(c)];
    double a = res.thetas[static_cast<std::size_t>(k)] - dth, b = res.thetas[static_cast<std::size_t>(k)] + dth;
    double best_t = res.thetas[static_cast<std::size_t>(k)], best_s = res.scores[static_cast<std::size_t>(k)];
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = score(x1), f2 = score(x2);
    for (int it = 0; it < opt.refine_iters; ++it) {
      if (f1 < best_s) best_s = f1, best_t = x1;
      if (f2 < best_s) best_s = f2, best_t = x2;
      if (f1 < f2) {
        b = x2, x2 = x1, f2 = f1;
        x1 = b - g * (b - a), f1 = score(x1);
      } else {
        a = x1, x1 = x2, f1 = f2;
        x2 = a + g * (b - a), f2 = score(x2);
      }
    }
    if (f1 < best_s) best_s = f1, best_t = x1;
    if (f2 < best_s) best_s = f2, best_t = x2;
    ShotCandidate cand;
    cand.theta = std::fmod(best_t + 2.0 * std::numbers::pi, 2.0 * std::numbers::pi);
    cand.closest_approach = best_s;
    cand.action = run(best_t, false).accumulated_action;
    res.candidates[static_cast<std::size_t>(c)] = cand;
  });

  const ShotCandidate* pick = nullptr;
  double best_seen = std::numeric_limits<double>::infinity();
  for (double sc : res.scores) best_seen = std::min(best_seen, sc);
  for (const auto& c : res.candidates) {
    best_seen = std::min(best_seen, c.closest_approach);
    if (c.closest_approach >= opt.accept_radius) continue;
    if (!pick || c.action > pick->action + 1e-9 ||
        (std::abs(c.action - pick->action) <= 1e-9 && c.theta < pick->theta))
      pick = &c;
  }
  if (!pick)
    throw NoCandidate("no trajectory within " + std::to_string(opt.accept_radius) +
                      " of the saddle; best closest approach " + std::to_string(best_seen));
  res.theta = pick->theta;
  res.best = run(pick->theta, true);
  return res;
}

double relaxation_deviation(const SystemParams& p, const Trajectory& t, const FixedPointSet& fps, int target) {
  const std::vector<cplx> path = heteroclinic_path(p, fps, target);
  auto seg_dist = [](cplx z, cplx a, cplx b) {
    const cplx ab = b - a;
    const double len2 = std::norm(ab);
    double u = len2 > 0.0 ? ((z - a) * std::conj(ab)).real() / len2 : 0.0;
    u = std::clamp(u, 0.0, 1.0);
    return std::abs(z - (a + u * ab));
  };
  double worst = 0.0;
  for (const auto& s : t.states) {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < path.size(); ++k) d = std::min(d, seg_dist(s.b_cl, path[k], path[k + 1]));
    worst = std::max(worst, d);
  }
  return worst;
}

}  // namespace switchrate
