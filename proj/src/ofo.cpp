#include "slowfast/ofo.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>

namespace slowfast {

void OfoProblem::validate() const {
  if (A.rows() != A.cols()) throw std::invalid_argument("OfoProblem: A must be square");
  if (B.rows() != A.rows() || E.rows() != A.rows())
    throw std::invalid_argument("OfoProblem: B and E must have as many rows as A");
  if (!grad_phi || !grad_psi) throw std::invalid_argument("OfoProblem: missing cost gradients");
  if (!(nu > 0.0)) throw std::invalid_argument("OfoProblem: strong convexity nu must be positive");
  if (nu > l_phi + 1e-12)
    throw std::invalid_argument("OfoProblem: strong convexity cannot exceed smoothness");
  if (l_psi < 0.0) throw std::invalid_argument("OfoProblem: l_psi must be nonnegative");
  if (!(epsilon > 0.0)) throw std::invalid_argument("OfoProblem: epsilon must be positive");
  if (!(spectral_abscissa(A) < 0.0)) throw std::invalid_argument("OfoProblem: A must be Hurwitz");
  if (w_z.dimension() != E.cols())
    throw std::invalid_argument("OfoProblem: disturbance dimension must match E");
}

OfoDerived derive(const OfoProblem& p) {
  p.validate();
  Eigen::PartialPivLU<Mat> lu(p.A);
  OfoDerived d;
  d.G = -lu.solve(p.B);
  d.H = -lu.solve(p.E);
  const double g_norm = induced_norm(d.G, NormKind::l2(), NormKind::l2()).value;
  d.ell = p.l_phi + g_norm * g_norm * p.l_psi;
  return d;
}

Vec steady_state(const OfoProblem& p, const Vec& u, const Vec& w) {
  if (u.size() != p.n_u() || w.size() != p.E.cols())
    throw std::invalid_argument("steady_state: dimension mismatch");
  Eigen::PartialPivLU<Mat> lu(p.A);
  return -lu.solve(p.B * u + p.E * w);
}

TwoTimeScaleSystem closed_loop(const OfoProblem& p) {
  OfoDerived d = derive(p);
  TwoTimeScaleSystem sys;
  sys.n_x = p.n_u();
  sys.n_z = p.n_z();
  sys.x_norm = NormKind::l2();
  sys.z_norm = NormKind::l2();
  sys.w_x_sig = DisturbanceSignal::zero(1);
  sys.w_z_sig = p.w_z;
  sys.epsilon = p.epsilon;
  Mat gt = d.G.transpose();
  auto grad_phi = p.grad_phi;
  auto grad_psi = p.grad_psi;
  sys.f = [grad_phi, grad_psi, gt](double, const Vec& u, const Vec& z, const Vec&, double) {
    return Vec(-grad_phi(u) - gt * grad_psi(z));
  };
  Mat a = p.A, b = p.B, e = p.E;
  sys.g = [a, b, e](const Vec& u, const Vec& z, const Vec& w, double) {
    return Vec(a * z + b * u + e * w);
  };
  return sys;
}

Vec optimizer(const OfoProblem& p, const Vec& w, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("optimizer: tol must be positive");
  OfoDerived d = derive(p);
  const Mat gt = d.G.transpose();
  const Vec hw = d.H * w;
  Vec u = Vec::Zero(p.n_u());
  const double step = 1.0 / std::max(d.ell, 1e-300);
  for (long it = 0; it < 2000000; ++it) {
    Vec grad = p.grad_phi(u) + gt * p.grad_psi(d.G * u + hw);
    if (grad.norm() <= tol) return u;
    u -= step * grad;
    if (!u.allFinite()) throw NumericalError("optimizer: iterate diverged");
  }
  throw NumericalError("optimizer: iteration budget exhausted");
}

ConstantsTable ofo_constants(const OfoProblem& p) {
  OfoDerived d = derive(p);
  const double mu_a = log_norm(p.A, NormKind::l2());
  if (!(mu_a < 0.0))
    throw std::invalid_argument("ofo_constants: mu(A) must be negative in the l2 norm");
  const double g_norm = induced_norm(d.G, NormKind::l2(), NormKind::l2()).value;
  const double h_norm = induced_norm(d.H, NormKind::l2(), NormKind::l2()).value;
  ConstantsTable c;
  c.c_f = p.nu;
  c.c_g = -mu_a;
  c.l_fx = p.l_phi;
  c.l_fz = g_norm * p.l_psi;  // slow field depends on z only through -G^T grad_psi(z)
  c.l_ft = 0.0;
  c.l_fw = 0.0;
  c.l_feps = p.l_psi * g_norm;
  c.l_gx = induced_norm(p.B, NormKind::l2(), NormKind::l2()).value;
  c.l_gw = induced_norm(p.E, NormKind::l2(), NormKind::l2()).value;
  c.l_geps = 0.0;
  c.l_zstar_w = 0.0;  // z* is linear, dz*/dw_z = H is constant in u
  c.l_f_wz = g_norm * p.l_psi * h_norm;
  c.set_all_provenance(Provenance::supplied);
  return c;
}

double epsilon_star_ofo(const OfoProblem& p) {
  OfoDerived d = derive(p);
  const double mu_a = log_norm(p.A, NormKind::l2());
  if (!(mu_a < 0.0))
    throw std::invalid_argument("epsilon_star_ofo: mu(A) must be negative in the l2 norm");
  Mat abgt = p.A.partialPivLu().solve(p.B * d.G.transpose());
  const double denom = induced_norm(abgt, NormKind::l2(), NormKind::l2()).value * p.l_psi;
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  return -mu_a / denom;
}

TrackingBounds tracking_bounds(const OfoProblem& p) {
  const double eps_star = epsilon_star_ofo(p);
  if (!(p.epsilon < eps_star))
    throw std::invalid_argument("tracking_bounds: epsilon = " + std::to_string(p.epsilon) +
                                " is not below epsilon_star_ofo = " + std::to_string(eps_star));
  OfoDerived d = derive(p);
  const double mu_a = log_norm(p.A, NormKind::l2());
  const double g_norm = induced_norm(d.G, NormKind::l2(), NormKind::l2()).value;
  const double h_norm = induced_norm(d.H, NormKind::l2(), NormKind::l2()).value;
  Mat abgt = p.A.partialPivLu().solve(p.B * d.G.transpose());
  const double abgt_norm = induced_norm(abgt, NormKind::l2(), NormKind::l2()).value;
  const double wbar = p.w_z.derivative_bound();
  const double gap = -mu_a - p.epsilon * abgt_norm * p.l_psi;

  TrackingBounds tb;
  tb.u_bound = p.epsilon * g_norm * p.l_psi * h_norm / (p.nu * gap) * wbar +
               g_norm * p.l_psi * h_norm / (p.nu * p.nu) * wbar;
  tb.z_bound = p.epsilon * h_norm * wbar / gap * (1.0 + g_norm * p.l_psi * h_norm / p.nu);
  return tb;
}

DerivedTrackingEnvelopes derived_tracking_envelopes(const OfoProblem& p, const Vec& u0,
                                                    const Vec& z0, double optimizer_tol) {
  OfoDerived d = derive(p);
  ConstantsTable c = ofo_constants(p);
  const double wbar = p.w_z.derivative_bound();

  const Vec w0 = p.w_z.value(0.0);
  const Vec u_star0 = optimizer(p, w0, optimizer_tol);
  const Vec z_eq0 = steady_state(p, u0, w0);

  InitNorms init;
  init.x_gap = 0.0;
  init.y0 = (z0 - z_eq0).norm();
  init.fred0 = (p.grad_phi(u0) + d.G.transpose() * p.grad_psi(d.G * u0 + d.H * w0)).norm();
  const Wbars wbars{0.0, wbar};

  BoundEnvelope xu = envelope_x_general(c, p.epsilon, init, wbars);
  BoundEnvelope xz = envelope_z_general(c, p.epsilon, init, wbars);

  const double g_norm = induced_norm(d.G, NormKind::l2(), NormKind::l2()).value;
  const double h_norm = induced_norm(d.H, NormKind::l2(), NormKind::l2()).value;
  const double nu = p.nu;
  // Reduced-flow tracking of the optimizer: decay of the initial optimality
  // gap plus (Lip_w(u*)/nu) wbar with Lip_w(u*) <= ||G|| l_psi ||H|| / nu.
  const double u_gap0 = (u0 - u_star0).norm();
  const double track_asym = g_norm * p.l_psi * h_norm / (nu * nu) * wbar;

  DerivedTrackingEnvelopes env;
  env.u_envelope.case_tag = xu.case_tag;
  env.u_envelope.asymptote = xu.asymptote + track_asym;
  env.u_envelope.eval = [=, xu_eval = xu.eval](double t) {
    return xu_eval(t) + std::exp(-nu * t) * u_gap0 + track_asym * -std::expm1(-nu * t);
  };

  // ||z - z_eq(u*, w)|| <= ||z - z_eq(u_r, w)|| + ||A^{-1}B|| ||u_r - u*||.
  Mat ainv_b = p.A.partialPivLu().solve(p.B);
  const double ainv_b_norm = induced_norm(ainv_b, NormKind::l2(), NormKind::l2()).value;
  env.z_envelope.case_tag = xz.case_tag;
  env.z_envelope.asymptote = xz.asymptote + ainv_b_norm * track_asym;
  env.z_envelope.eval = [=, xz_eval = xz.eval](double t) {
    return xz_eval(t) +
           ainv_b_norm * (std::exp(-nu * t) * u_gap0 + track_asym * -std::expm1(-nu * t));
  };
  return env;
}

QuadraticCost make_quadratic_cost(const Mat& q, const Vec& center) {
  if (q.rows() != q.cols() || q.rows() != center.size())
    throw std::invalid_argument("make_quadratic_cost: dimension mismatch");
  Mat sym = 0.5 * (q + q.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  QuadraticCost out;
  out.strong_convexity = es.eigenvalues().minCoeff();
  out.smoothness = es.eigenvalues().maxCoeff();
  out.grad = [sym, center](const Vec& u) { return Vec(sym * (u - center)); };
  return out;
}

}  // namespace slowfast
