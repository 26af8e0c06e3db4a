#include "slowfast/sysmodel.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <random>

namespace slowfast {

namespace {

double smoothstep(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * (3.0 - 2.0 * u);
}

double smoothstep_deriv(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  return 6.0 * u * (1.0 - u);
}

Mat fd_jacobian(const std::function<Vec(const Vec&)>& fn, const Vec& at, int out_dim) {
  const double h = 1e-7 * (1.0 + at.norm());
  Mat jac(out_dim, at.size());
  Vec p = at;
  for (Eigen::Index j = 0; j < at.size(); ++j) {
    const double keep = p(j);
    p(j) = keep + h;
    Vec hi = fn(p);
    p(j) = keep - h;
    Vec lo = fn(p);
    p(j) = keep;
    jac.col(j) = (hi - lo) / (2.0 * h);
  }
  return jac;
}

}  // namespace

DisturbanceSignal DisturbanceSignal::zero(int dim) { return constant(Vec::Zero(dim)); }

DisturbanceSignal DisturbanceSignal::constant(Vec value) {
  const int n = static_cast<int>(value.size());
  auto v = [value](double) { return value; };
  auto d = [n](double) { return Vec(Vec::Zero(n)); };
  return DisturbanceSignal(n, v, d, 0.0);
}

DisturbanceSignal DisturbanceSignal::sinusoid(Vec amplitude, double omega, double phase) {
  const int n = static_cast<int>(amplitude.size());
  auto v = [amplitude, omega, phase](double t) { return Vec(amplitude * std::sin(omega * t + phase)); };
  auto d = [amplitude, omega, phase](double t) {
    return Vec(amplitude * (omega * std::cos(omega * t + phase)));
  };
  return DisturbanceSignal(n, v, d, amplitude.norm() * std::abs(omega));
}

DisturbanceSignal DisturbanceSignal::ramp(Vec rate) {
  const int n = static_cast<int>(rate.size());
  auto v = [rate](double t) { return Vec(rate * t); };
  auto d = [rate](double) { return rate; };
  return DisturbanceSignal(n, v, d, rate.norm());
}

DisturbanceSignal DisturbanceSignal::smooth_step(Vec amplitude, double t0, double width) {
  if (!(width > 0.0)) throw std::invalid_argument("smooth_step: width must be positive");
  const int n = static_cast<int>(amplitude.size());
  auto v = [amplitude, t0, width](double t) { return Vec(amplitude * smoothstep((t - t0) / width)); };
  auto d = [amplitude, t0, width](double t) {
    return Vec(amplitude * (smoothstep_deriv((t - t0) / width) / width));
  };
  return DisturbanceSignal(n, v, d, amplitude.norm() * 1.5 / width);
}

DisturbanceSignal DisturbanceSignal::sum(const DisturbanceSignal& a, const DisturbanceSignal& b) {
  if (a.dimension() != b.dimension())
    throw std::invalid_argument("DisturbanceSignal::sum: dimension mismatch");
  auto v = [a, b](double t) { return Vec(a.value(t) + b.value(t)); };
  auto d = [a, b](double t) { return Vec(a.derivative(t) + b.derivative(t)); };
  return DisturbanceSignal(a.dimension(), v, d, a.derivative_bound() + b.derivative_bound());
}

void TwoTimeScaleSystem::validate() const {
  if (!f || !g) throw std::invalid_argument("TwoTimeScaleSystem: missing vector field");
  if (n_x <= 0 || n_z <= 0) throw std::invalid_argument("TwoTimeScaleSystem: dimensions must be positive");
  if (!(epsilon > 0.0)) throw std::invalid_argument("TwoTimeScaleSystem: epsilon must be positive");
  Vec x = Vec::Zero(n_x), z = Vec::Zero(n_z);
  if (f(0.0, x, z, w_x_sig.value(0.0), epsilon).size() != n_x)
    throw std::invalid_argument("TwoTimeScaleSystem: f returns wrong dimension");
  if (g(x, z, w_z_sig.value(0.0), epsilon).size() != n_z)
    throw std::invalid_argument("TwoTimeScaleSystem: g returns wrong dimension");
}

const char* ConstantsTable::field_name(int i) {
  static constexpr const char* names[field_count] = {
      "c_f", "c_g", "l_fx", "l_fz", "l_ft", "l_fw", "l_feps", "l_gx", "l_gw", "l_geps",
      "l_zstar_w", "l_f_wz"};
  return names[i];
}

double ConstantsTable::field(int i) const {
  switch (i) {
    case 0: return c_f;
    case 1: return c_g;
    case 2: return l_fx;
    case 3: return l_fz;
    case 4: return l_ft;
    case 5: return l_fw;
    case 6: return l_feps;
    case 7: return l_gx;
    case 8: return l_gw;
    case 9: return l_geps;
    case 10: return l_zstar_w;
    case 11: return l_f_wz;
  }
  throw std::out_of_range("ConstantsTable::field");
}

void ConstantsTable::require_contractive(const char* who) const {
  if (!(c_f > 0.0) || !(c_g > 0.0))
    throw std::invalid_argument(std::string(who) + ": c_f and c_g must be strictly positive");
  if (!(l_fz > 0.0) || !(l_gx > 0.0))
    throw std::invalid_argument(std::string(who) + ": l_fz and l_gx must be strictly positive");
}

Vec quasi_steady_state(const TwoTimeScaleSystem& system, const Vec& x, const Vec& w_z, double eps,
                       double tol, std::optional<Vec> z_guess) {
  if (!(tol > 0.0)) throw std::invalid_argument("quasi_steady_state: tol must be positive");
  Vec z = z_guess.value_or(Vec::Zero(system.n_z));
  auto residual = [&](const Vec& zz) { return system.g(x, zz, w_z, eps); };
  auto res_norm = [&](const Vec& r) { return vector_norm(r, system.z_norm); };

  Vec r = residual(z);
  double rn = res_norm(r);
  for (int it = 0; it < 60 && rn > tol; ++it) {
    Mat jac = fd_jacobian(residual, z, system.n_z);
    Eigen::PartialPivLU<Mat> lu(jac);
    Vec step = lu.solve(-r);
    if (!step.allFinite()) break;
    double lambda = 1.0;
    bool improved = false;
    for (int bt = 0; bt < 12; ++bt) {
      Vec cand = z + lambda * step;
      Vec rc = residual(cand);
      double rcn = res_norm(rc);
      if (std::isfinite(rcn) && rcn < rn) {
        z = cand;
        r = rc;
        rn = rcn;
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved) break;
  }
  if (rn <= tol) return z;

  // Contractive-flow fallback: dz/dtau = g converges to z* under the
  // fast-contractivity assumption.
  OdeFunction ode;
  ode.dim = system.n_z;
  ode.rhs = [&](double, const Vec& zz) { return system.g(x, zz, w_z, eps); };
  IntegrationConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = std::min(1e-12, 0.01 * tol);
  double horizon = 4.0;
  for (int round = 0; round < 8; ++round) {
    cfg.t_end = horizon;
    Trajectory traj = integrate(ode, z, cfg, {horizon});
    z = traj.at(0);
    r = residual(z);
    rn = res_norm(r);
    if (rn <= tol) return z;
    horizon *= 2.0;
  }
  throw NumericalError("quasi_steady_state: no convergence, residual norm " + std::to_string(rn));
}

ReducedModel reduced_model(const TwoTimeScaleSystem& system, double qss_tol) {
  system.validate();
  ReducedModel red;
  red.dim = system.n_x;
  TwoTimeScaleSystem sys = system;
  red.rhs = [sys, qss_tol](double t, const Vec& x_r, const Vec& w_x, const Vec& w_z) {
    Vec zs = quasi_steady_state(sys, x_r, w_z, 0.0, qss_tol);
    return sys.f(t, x_r, zs, w_x, 0.0);
  };
  return red;
}

BoundaryLayerSystem boundary_layer(const TwoTimeScaleSystem& system, const Vec& x_frozen,
                                   const Vec& w_z_frozen, double qss_tol) {
  system.validate();
  Vec zs = quasi_steady_state(system, x_frozen, w_z_frozen, 0.0, qss_tol);
  BoundaryLayerSystem bl;
  bl.dim = system.n_z;
  TwoTimeScaleSystem sys = system;
  bl.rhs = [sys, x_frozen, w_z_frozen, zs](double, const Vec& y_bl) {
    return sys.g(x_frozen, y_bl + zs, w_z_frozen, 0.0);
  };
  return bl;
}

ShiftedSystem shifted_system(const TwoTimeScaleSystem& system, double qss_tol) {
  system.validate();
  TwoTimeScaleSystem sys = system;
  ShiftedSystem sh;
  sh.n_x = sys.n_x;
  sh.n_z = sys.n_z;

  auto zstar = [sys, qss_tol](const Vec& x, const Vec& w_z) {
    return quasi_steady_state(sys, x, w_z, 0.0, qss_tol);
  };
  sh.z_star = [zstar, sys](double t, const Vec& x) { return zstar(x, sys.w_z_sig.value(t)); };

  sh.x_dot = [sys, zstar](double t, const Vec& x, const Vec& y) {
    Vec w_z = sys.w_z_sig.value(t);
    Vec z = y + zstar(x, w_z);
    return sys.f(t, x, z, sys.w_x_sig.value(t), sys.epsilon);
  };

  sh.y_dot = [sys, zstar](double t, const Vec& x, const Vec& y) {
    const Vec w_z = sys.w_z_sig.value(t);
    const Vec w_x = sys.w_x_sig.value(t);
    const Vec zs = zstar(x, w_z);
    const Vec z = y + zs;
    const Vec fval = sys.f(t, x, z, w_x, sys.epsilon);
    const Vec gval = sys.g(x, z, w_z, sys.epsilon);

    const double hx = 1e-6 * (1.0 + x.norm());
    Vec dzstar_dx_f = Vec::Zero(sys.n_z);  // (dz*/dx) f
    {
      Vec xp = x;
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double keep = xp(j);
        xp(j) = keep + hx;
        Vec hi = zstar(xp, w_z);
        xp(j) = keep - hx;
        Vec lo = zstar(xp, w_z);
        xp(j) = keep;
        dzstar_dx_f += (hi - lo) / (2.0 * hx) * fval(j);
      }
    }
    const Vec wdot = sys.w_z_sig.derivative(t);
    const double hw = 1e-6 * (1.0 + w_z.norm());
    Vec dzstar_dw_wdot = Vec::Zero(sys.n_z);
    {
      Vec wp = w_z;
      for (Eigen::Index j = 0; j < w_z.size(); ++j) {
        const double keep = wp(j);
        wp(j) = keep + hw;
        Vec hi = zstar(x, wp);
        wp(j) = keep - hw;
        Vec lo = zstar(x, wp);
        wp(j) = keep;
        dzstar_dw_wdot += (hi - lo) / (2.0 * hw) * wdot(j);
      }
    }
    Vec ydot = gval / sys.epsilon - dzstar_dx_f - dzstar_dw_wdot;
    if (!ydot.allFinite())
      throw NumericalError("shifted_system: finite-difference breakdown in dz*/dx or dz*/dw_z");
    return ydot;
  };
  return sh;
}

ConstantsTable estimate_constants(const TwoTimeScaleSystem& system, const SamplingBox& box) {
  system.validate();
  if (box.count <= 1) throw std::invalid_argument("estimate_constants: need at least two samples");
  auto check_box = [](const Vec& lo, const Vec& hi, int dim, const char* name) {
    if (lo.size() != dim || hi.size() != dim)
      throw std::invalid_argument(std::string("estimate_constants: box for ") + name +
                                  " has wrong dimension");
    if (!lo.allFinite() || !hi.allFinite() || ((hi - lo).array() < 0.0).any())
      throw std::invalid_argument(std::string("estimate_constants: invalid box for ") + name);
  };
  check_box(box.x_lo, box.x_hi, system.n_x, "x");
  check_box(box.z_lo, box.z_hi, system.n_z, "z");
  check_box(box.wx_lo, box.wx_hi, system.w_x_sig.dimension(), "w_x");
  check_box(box.wz_lo, box.wz_hi, system.w_z_sig.dimension(), "w_z");

  std::mt19937_64 rng(box.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto draw = [&](const Vec& lo, const Vec& hi) {
    Vec v(lo.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = lo(i) + (hi(i) - lo(i)) * uni(rng);
    return v;
  };

  ReducedModel red = reduced_model(system, 1e-12);
  auto zstar = [&](const Vec& x, const Vec& w) { return quasi_steady_state(system, x, w, 0.0, 1e-12); };

  ConstantsTable c;
  double oslip_f = -std::numeric_limits<double>::infinity();
  double oslip_g = -std::numeric_limits<double>::infinity();
  double lip_fx = 0, lip_fz = 0, lip_ft = 0, lip_fw = 0, lip_feps = 0;
  double lip_gx = 0, lip_gw = 0, lip_geps = 0, lip_zw = 0, lip_fred_wz = 0;

  for (int k = 0; k < box.count; ++k) {
    const double t = box.t_max * uni(rng);
    const Vec x1 = draw(box.x_lo, box.x_hi), x2 = draw(box.x_lo, box.x_hi);
    const Vec z1 = draw(box.z_lo, box.z_hi), z2 = draw(box.z_lo, box.z_hi);
    const Vec wx1 = draw(box.wx_lo, box.wx_hi), wx2 = draw(box.wx_lo, box.wx_hi);
    const Vec wz1 = draw(box.wz_lo, box.wz_hi), wz2 = draw(box.wz_lo, box.wz_hi);
    const double e1 = box.eps_max * uni(rng), e2 = box.eps_max * uni(rng);
    const double t2 = box.t_max * uni(rng);

    auto ratio = [](double dy, double dx) { return dx > 1e-12 ? dy / dx : 0.0; };

    // Lipschitz estimates, one argument varied at a time.
    lip_fx = std::max(lip_fx, ratio(vector_norm(system.f(t, x1, z1, wx1, e1) -
                                                    system.f(t, x2, z1, wx1, e1),
                                                system.x_norm),
                                    vector_norm(x1 - x2, system.x_norm)));
    lip_fz = std::max(lip_fz, ratio(vector_norm(system.f(t, x1, z1, wx1, e1) -
                                                    system.f(t, x1, z2, wx1, e1),
                                                system.x_norm),
                                    vector_norm(z1 - z2, system.z_norm)));
    lip_ft = std::max(lip_ft, ratio(vector_norm(system.f(t, x1, z1, wx1, e1) -
                                                    system.f(t2, x1, z1, wx1, e1),
                                                system.x_norm),
                                    std::abs(t - t2)));
    lip_fw = std::max(lip_fw, ratio(vector_norm(system.f(t, x1, z1, wx1, e1) -
                                                    system.f(t, x1, z1, wx2, e1),
                                                system.x_norm),
                                    (wx1 - wx2).norm()));
    lip_feps = std::max(lip_feps, ratio(vector_norm(system.f(t, x1, z1, wx1, e1) -
                                                        system.f(t, x1, z1, wx1, e2),
                                                    system.x_norm),
                                        std::abs(e1 - e2)));
    lip_gx = std::max(lip_gx, ratio(vector_norm(system.g(x1, z1, wz1, e1) -
                                                    system.g(x2, z1, wz1, e1),
                                                system.z_norm),
                                    vector_norm(x1 - x2, system.x_norm)));
    lip_gw = std::max(lip_gw, ratio(vector_norm(system.g(x1, z1, wz1, e1) -
                                                    system.g(x1, z1, wz2, e1),
                                                system.z_norm),
                                    (wz1 - wz2).norm()));
    lip_geps = std::max(lip_geps, ratio(vector_norm(system.g(x1, z1, wz1, e1) -
                                                        system.g(x1, z1, wz1, e2),
                                                    system.z_norm),
                                        std::abs(e1 - e2)));

    // One-sided Lipschitz estimates at l2.
    {
      Vec dz = z1 - z2;
      double dn2 = dz.squaredNorm();
      if (dn2 > 1e-24) {
        Vec dg = system.g(x1, z1, wz1, e1) - system.g(x1, z2, wz1, e1);
        oslip_g = std::max(oslip_g, dg.dot(dz) / dn2);
      }
      Vec dx = x1 - x2;
      double dxn2 = dx.squaredNorm();
      if (dxn2 > 1e-24) {
        Vec df = red.rhs(t, x1, wx1, wz1) - red.rhs(t, x2, wx1, wz1);
        oslip_f = std::max(oslip_f, df.dot(dx) / dxn2);
      }
    }
    lip_fred_wz = std::max(lip_fred_wz, ratio(vector_norm(red.rhs(t, x1, wx1, wz1) -
                                                              red.rhs(t, x1, wx1, wz2),
                                                          system.x_norm),
                                              (wz1 - wz2).norm()));
    // Lip_x of dz*/dw_z via nested finite differences.
    if (k % 8 == 0) {
      const double hw = 1e-5 * (1.0 + wz1.norm());
      auto dzdw = [&](const Vec& x) {
        Mat m(system.n_z, wz1.size());
        Vec wp = wz1;
        for (Eigen::Index j = 0; j < wz1.size(); ++j) {
          const double keep = wp(j);
          wp(j) = keep + hw;
          Vec hi = zstar(x, wp);
          wp(j) = keep - hw;
          Vec lo = zstar(x, wp);
          wp(j) = keep;
          m.col(j) = (hi - lo) / (2.0 * hw);
        }
        return m;
      };
      double dxn = vector_norm(x1 - x2, system.x_norm);
      if (dxn > 1e-8) {
        Mat d1 = dzdw(x1), d2 = dzdw(x2);
        lip_zw = std::max(lip_zw, (d1 - d2).norm() / dxn);
      }
    }
  }

  if (!std::isfinite(oslip_f) || !std::isfinite(oslip_g))
    throw NumericalError("estimate_constants: non-finite field evaluations");

  c.c_f = -oslip_f;
  c.c_g = -oslip_g;
  c.l_fx = lip_fx;
  c.l_fz = lip_fz;
  c.l_ft = lip_ft;
  c.l_fw = lip_fw;
  c.l_feps = lip_feps;
  c.l_gx = lip_gx;
  c.l_gw = lip_gw;
  c.l_geps = lip_geps;
  c.l_zstar_w = lip_zw;
  c.l_f_wz = lip_fred_wz;
  c.set_all_provenance(Provenance::estimated);
  return c;
}

OdeFunction full_ode(const TwoTimeScaleSystem& system, const IntegrationConfig& config) {
  system.validate();
  OdeFunction ode;
  ode.dim = system.n_x + system.n_z;
  ode.step_cap = config.fast_step_cap * system.epsilon / std::max(config.c_g_estimate, 1e-12);
  TwoTimeScaleSystem sys = system;
  ode.rhs = [sys](double t, const Vec& y) {
    Vec x = y.head(sys.n_x), z = y.tail(sys.n_z);
    Vec out(y.size());
    out.head(sys.n_x) = sys.f(t, x, z, sys.w_x_sig.value(t), sys.epsilon);
    out.tail(sys.n_z) = sys.g(x, z, sys.w_z_sig.value(t), sys.epsilon) / sys.epsilon;
    return out;
  };
  return ode;
}

OdeFunction reduced_ode(const TwoTimeScaleSystem& system, const ReducedModel& red) {
  OdeFunction ode;
  ode.dim = red.dim;
  TwoTimeScaleSystem sys = system;
  auto rhs = red.rhs;
  ode.rhs = [sys, rhs](double t, const Vec& x_r) {
    return rhs(t, x_r, sys.w_x_sig.value(t), sys.w_z_sig.value(t));
  };
  return ode;
}

OdeFunction boundary_layer_ode(const BoundaryLayerSystem& bl) {
  OdeFunction ode;
  ode.dim = bl.dim;
  ode.rhs = bl.rhs;
  return ode;
}

OdeFunction shifted_ode(const ShiftedSystem& shifted, const TwoTimeScaleSystem& system,
                        const IntegrationConfig& config) {
  OdeFunction ode;
  ode.dim = shifted.n_x + shifted.n_z;
  ode.step_cap = config.fast_step_cap * system.epsilon / std::max(config.c_g_estimate, 1e-12);
  ShiftedSystem sh = shifted;
  ode.rhs = [sh](double t, const Vec& state) {
    Vec x = state.head(sh.n_x), y = state.tail(sh.n_z);
    Vec out(state.size());
    out.head(sh.n_x) = sh.x_dot(t, x, y);
    out.tail(sh.n_z) = sh.y_dot(t, x, y);
    return out;
  };
  return ode;
}

}  // namespace slowfast
