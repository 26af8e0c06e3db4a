#include "slowfast/lti.hpp"

#include "slowfast/integrator.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <sstream>

namespace slowfast {

namespace {

Mat solve_d(const LtiBlockSystem& s, const Mat& rhs) {
  Eigen::FullPivLU<Mat> lu(s.D);
  if (!lu.isInvertible()) throw std::invalid_argument("lti: D is singular");
  return lu.solve(rhs);
}

bool hurwitz_by_eigenvalues(const Mat& m, double margin = 0.0) {
  return spectral_abscissa(m) < -margin;
}

struct LtiQuantities {
  Mat a_red, dinv_c;
  double mu_d, mu_ared;
  double b_cross;        // ||B||_{z->x}
  double dinv_c_cross;   // ||D^{-1} C||_{x->z}
  double dinv_cb;        // ||D^{-1} C B||_z
  double dinv_c_ared;    // ||D^{-1} C A_red||_{x->z}
};

LtiQuantities quantities(const LtiBlockSystem& s) {
  s.validate_dims();
  LtiQuantities q;
  q.dinv_c = solve_d(s, s.C);
  q.a_red = s.A - s.B * q.dinv_c;
  q.mu_d = log_norm(s.D, s.z_norm);
  q.mu_ared = log_norm(q.a_red, s.x_norm);
  q.b_cross = induced_norm(s.B, s.z_norm, s.x_norm).value;
  q.dinv_c_cross = induced_norm(q.dinv_c, s.x_norm, s.z_norm).value;
  q.dinv_cb = matrix_norm(Mat(q.dinv_c * s.B), s.z_norm);
  q.dinv_c_ared = induced_norm(Mat(q.dinv_c * q.a_red), s.x_norm, s.z_norm).value;
  return q;
}

}  // namespace

void LtiBlockSystem::validate_dims() const {
  if (A.rows() != A.cols() || D.rows() != D.cols())
    throw std::invalid_argument("LtiBlockSystem: A and D must be square");
  if (B.rows() != A.rows() || B.cols() != D.rows())
    throw std::invalid_argument("LtiBlockSystem: B must be n_x by n_z");
  if (C.rows() != D.rows() || C.cols() != A.rows())
    throw std::invalid_argument("LtiBlockSystem: C must be n_z by n_x");
}

Mat reduced_lti(const LtiBlockSystem& s) {
  s.validate_dims();
  return s.A - s.B * solve_d(s, s.C);
}

Mat shifted_lti(const LtiBlockSystem& s, double eps) {
  s.validate_dims();
  if (!(eps > 0.0)) throw std::invalid_argument("shifted_lti: eps must be positive");
  const Mat dinv_c = solve_d(s, s.C);
  const Mat a_red = s.A - s.B * dinv_c;
  const int nx = s.n_x(), nz = s.n_z();
  Mat m(nx + nz, nx + nz);
  m.topLeftCorner(nx, nx) = a_red;
  m.topRightCorner(nx, nz) = s.B;
  m.bottomLeftCorner(nz, nx) = dinv_c * a_red;
  m.bottomRightCorner(nz, nz) = s.D / eps + dinv_c * s.B;
  return m;
}

Mat scaled_block(const LtiBlockSystem& s, double eps) {
  s.validate_dims();
  const int nx = s.n_x(), nz = s.n_z();
  Mat m(nx + nz, nx + nz);
  m.topLeftCorner(nx, nx) = eps * s.A;
  m.topRightCorner(nx, nz) = eps * s.B;
  m.bottomLeftCorner(nz, nx) = s.C;
  m.bottomRightCorner(nz, nz) = s.D;
  return m;
}

Mat full_generator(const LtiBlockSystem& s, double eps) {
  s.validate_dims();
  if (!(eps > 0.0)) throw std::invalid_argument("full_generator: eps must be positive");
  const int nx = s.n_x(), nz = s.n_z();
  Mat m(nx + nz, nx + nz);
  m.topLeftCorner(nx, nx) = s.A;
  m.topRightCorner(nx, nz) = s.B;
  m.bottomLeftCorner(nz, nx) = s.C / eps;
  m.bottomRightCorner(nz, nz) = s.D / eps;
  return m;
}

double epsilon_star_0_lti(const LtiBlockSystem& s) {
  LtiQuantities q = quantities(s);
  if (!(q.mu_d < 0.0))
    throw std::invalid_argument("epsilon_star_0_lti: mu_z(D) must be negative");
  if (q.dinv_cb <= 0.0) return std::numeric_limits<double>::infinity();
  return -q.mu_d / q.dinv_cb;
}

namespace detail {

std::pair<BoundEnvelope, BoundEnvelope> envelope_lti_mode(const LtiBlockSystem& s, double eps,
                                                          const Vec& x0, const Vec& z0,
                                                          const Vec& xr0, KernelMode mode) {
  LtiQuantities q = quantities(s);
  if (!(q.mu_d < 0.0) || !(q.mu_ared < 0.0))
    throw std::invalid_argument("envelope_lti: D and A - B D^{-1} C must have negative log norms");
  const double eps_star = epsilon_star_0_lti(s);
  if (!(eps > 0.0) || !(eps < eps_star))
    throw std::invalid_argument("envelope_lti: eps must lie in (0, " + std::to_string(eps_star) +
                                ")");
  if (x0.size() != s.n_x() || z0.size() != s.n_z() || xr0.size() != s.n_x())
    throw std::invalid_argument("envelope_lti: state dimension mismatch");

  const double a = -q.mu_ared;                 // decay rate of the reduced model
  const double cly = -q.mu_d / eps - q.dinv_cb;  // decay rate of the shifted fast variable
  const double y0 = vector_norm(Vec(z0 + q.dinv_c * x0), s.z_norm);
  const double r0 = vector_norm(Vec(q.a_red * x0), s.x_norm);
  const double gap = vector_norm(Vec(x0 - xr0), s.x_norm);
  const double b_cross = q.b_cross, dc_cross = q.dinv_c_cross;
  const CaseTag tag = std::abs(a - cly) <= 1e-9 * std::max(a, cly) ? CaseTag::equal
                                                                   : CaseTag::distinct;

  BoundEnvelope env_x;
  env_x.case_tag = tag;
  env_x.asymptote = 0.0;
  env_x.eval = [=](double t) {
    return std::exp(-a * t) * gap + b_cross * y0 * conv_exp(t, a, cly, mode) +
           b_cross * dc_cross * r0 * conv_exp_aba(t, a, cly, mode);
  };

  BoundEnvelope env_z;
  env_z.case_tag = tag;
  env_z.asymptote = 0.0;
  env_z.eval = [=, gx = env_x.eval](double t) {
    return std::exp(-cly * t) * y0 + dc_cross * r0 * conv_exp(t, cly, a, mode) +
           dc_cross * gx(t);
  };
  return {env_x, env_z};
}

}  // namespace detail

std::pair<BoundEnvelope, BoundEnvelope> envelope_lti(const LtiBlockSystem& s, double eps,
                                                     const Vec& x0, const Vec& z0,
                                                     const Vec& xr0) {
  return detail::envelope_lti_mode(s, eps, x0, z0, xr0, detail::KernelMode::stable);
}

Mat gain_matrix_lti(const LtiBlockSystem& s, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("gain_matrix_lti: eps must be positive");
  LtiQuantities q = quantities(s);
  Mat g(2, 2);
  g << q.mu_ared, q.b_cross, q.dinv_c_ared, q.mu_d / eps + q.dinv_cb;
  return g;
}

double epsilon_star_lti(const LtiBlockSystem& s) {
  LtiQuantities q = quantities(s);
  if (!(q.mu_d < 0.0) || !(q.mu_ared < 0.0))
    throw std::invalid_argument("epsilon_star_lti: mu(D) and mu(A_red) must be negative");
  const double denom = q.b_cross * q.dinv_c_ared / -q.mu_ared + q.dinv_cb;
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  return -q.mu_d / denom;
}

ContractionCertificate contraction_certificate(const LtiBlockSystem& s, double eps) {
  const double eps_star = epsilon_star_lti(s);
  if (!(eps > 0.0) || !(eps < eps_star))
    throw std::invalid_argument("contraction_certificate: eps must lie in (0, " +
                                std::to_string(eps_star) + ")");
  Mat gamma = gain_matrix_lti(s, eps);
  const double tr = gamma(0, 0) + gamma(1, 1);
  const double det = gamma(0, 0) * gamma(1, 1) - gamma(0, 1) * gamma(1, 0);
  if (!(gamma(0, 0) < 0.0) || !(gamma(1, 1) < 0.0))
    throw NumericalError("contraction_certificate: gain matrix diagonal is not negative "
                         "(lemma condition eps < a_ii/d_ii failed)");
  if (!(det > 0.0))
    throw NumericalError("contraction_certificate: gain matrix determinant is not positive "
                         "(lemma condition on the coupling failed)");
  const double rate = -0.5 * (tr + std::sqrt(std::max(tr * tr - 4.0 * det, 0.0)));

  ContractionCertificate cert;
  cert.rate = rate;
  if (gamma(0, 1) > 0.0 && gamma(1, 0) > 0.0) {
    cert.weights = perron_weights(gamma);
  } else {
    cert.weights = CompositeWeight(1.0, 1.0);  // decoupled or triangular majorant
  }

  // Validate on two trajectories of the shifted system.
  const Mat gen = shifted_lti(s, eps);
  const int nx = s.n_x(), nz = s.n_z();
  Vec s1 = Vec::Zero(nx + nz), s2 = Vec::Zero(nx + nz);
  for (int i = 0; i < nx + nz; ++i) {
    s1(i) = std::sin(1.0 + i);
    s2(i) = std::cos(2.0 + 0.5 * i);
  }
  const double horizon = std::min(2.0 / rate, 50.0);
  const auto grid = uniform_grid(horizon, 201);
  Trajectory t1 = integrate_lti_exact(gen, s1, grid);
  Trajectory t2 = integrate_lti_exact(gen, s2, grid);
  std::vector<double> logd(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    Vec diff = t1.at(k) - t2.at(k);
    double dx = vector_norm(diff.head(nx), s.x_norm);
    double dz = vector_norm(diff.tail(nz), s.z_norm);
    double dist = composite_norm(dx, dz, cert.weights);
    logd[k] = std::log(std::max(dist, 1e-280));
  }
  // Least-squares slope of log distance over time.
  double st = 0, sl = 0, stt = 0, stl = 0;
  const double n = static_cast<double>(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    st += grid[k];
    sl += logd[k];
    stt += grid[k] * grid[k];
    stl += grid[k] * logd[k];
  }
  cert.fitted_rate = -(n * stl - st * sl) / (n * stt - st * st);
  if (cert.fitted_rate < rate * 0.95)
    throw NumericalError("contraction_certificate: fitted decay " +
                         std::to_string(cert.fitted_rate) + " is below the certified rate " +
                         std::to_string(rate));
  return cert;
}

void GainMatrixParams::validate() const {
  if (!(a11 > 0.0) || !(a12 > 0.0) || !(a21 > 0.0) || !(a22 > 0.0))
    throw std::invalid_argument("GainMatrixParams: a11, a12, a21, a22 must be positive");
  if (d11 < 0.0 || d21 < 0.0 || d22 < 0.0)
    throw std::invalid_argument("GainMatrixParams: d11, d21, d22 must be nonnegative");
}

Mat gain_matrix_from_params(const GainMatrixParams& p, double eps) {
  p.validate();
  if (!(eps > 0.0)) throw std::invalid_argument("gain_matrix_from_params: eps must be positive");
  Mat g(2, 2);
  g << -p.a11 + p.d11 * eps, p.a12, p.a21 + p.d21, -p.a22 / eps + p.d22;
  return g;
}

GainCheck hurwitz_gain_check(const GainMatrixParams& p, double eps) {
  p.validate();
  if (!(eps > 0.0)) throw std::invalid_argument("hurwitz_gain_check: eps must be positive");
  const double inf = std::numeric_limits<double>::infinity();
  const double t1 = p.d11 > 0.0 ? p.a11 / p.d11 : inf;
  const double t2 = p.d22 > 0.0 ? p.a22 / p.d22 : inf;
  // Coupling condition: below t3 the determinant satisfies
  // det >= a11 a22/eps - (a12 a21 + a12 d21 + a11 d22 + a22 d11) > 0.
  const double t3 =
      p.a11 * p.a22 / (p.a12 * p.a21 + p.a12 * p.d21 + p.a11 * p.d22 + p.a22 * p.d11);

  GainCheck out;
  out.threshold = std::min({t1, t2, t3});
  out.verdict = eps < out.threshold ? GainVerdict::below_threshold_hurwitz
                                    : GainVerdict::above_threshold_unknown;
  const Mat g = gain_matrix_from_params(p, eps);
  const double tr = g(0, 0) + g(1, 1);
  const double det = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
  const double disc = tr * tr - 4.0 * det;
  if (disc >= 0.0) {
    out.eig_real = {0.5 * (tr - std::sqrt(disc)), 0.5 * (tr + std::sqrt(disc))};
    out.eig_imag = {0.0, 0.0};
  } else {
    out.eig_real = {0.5 * tr, 0.5 * tr};
    out.eig_imag = {-0.5 * std::sqrt(-disc), 0.5 * std::sqrt(-disc)};
  }
  return out;
}

DiagramReport diagram_check(const LtiBlockSystem& s, const std::vector<double>& eps_grid) {
  s.validate_dims();
  for (double e : eps_grid)
    if (!(e > 0.0)) throw std::invalid_argument("diagram_check: eps grid must be positive");

  DiagramReport rep;
  const double mu_a = log_norm(s.A, s.x_norm);
  const double mu_d = log_norm(s.D, s.z_norm);
  const double b_cross = induced_norm(s.B, s.z_norm, s.x_norm).value;
  const double c_cross = induced_norm(s.C, s.x_norm, s.z_norm).value;
  rep.p11 = mu_a < 0.0 && mu_d < 0.0 && mu_a * mu_d > b_cross * c_cross;

  Eigen::FullPivLU<Mat> lu(s.D);
  if (lu.isInvertible()) {
    const Mat a_red = s.A - s.B * lu.solve(s.C);
    rep.p21_spectral = hurwitz_by_eigenvalues(s.D) && hurwitz_by_eigenvalues(a_red);
    const double mu_ared = log_norm(a_red, s.x_norm);
    rep.p21_log_norm = mu_d < 0.0 && mu_ared < 0.0;
    if (rep.p21_log_norm) {
      LtiQuantities q = quantities(s);
      rep.eps_star_1 = q.dinv_cb > 0.0 ? -mu_d / q.dinv_cb
                                       : std::numeric_limits<double>::infinity();
      rep.eps_star_2 = epsilon_star_lti(s);
      rep.eps_star_lti = rep.eps_star_2;
    }
  }

  for (double e : eps_grid) {
    DiagramEpsResult r;
    r.eps = e;
    r.a_eps_hurwitz = hurwitz_by_eigenvalues(scaled_block(s, e));
    r.claimed = rep.p11 || (rep.p21_log_norm && e < rep.eps_star_lti);
    if (r.claimed && !r.a_eps_hurwitz) {
      rep.consistent = false;
      std::ostringstream os;
      os << "A_eps not Hurwitz at eps = " << e << " despite "
         << (rep.p11 ? "P(1,1)" : "P(2,1) with eps < eps*_LTI");
      rep.counterexample = os.str();
    }
    rep.results.push_back(r);
  }
  return rep;
}

}  // namespace slowfast
