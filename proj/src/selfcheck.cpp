#include "slowfast/selfcheck.hpp"

#include "slowfast/bounds.hpp"
#include "slowfast/integrator.hpp"
#include "slowfast/lti.hpp"
#include "slowfast/ofo.hpp"
#include "slowfast/specnorm.hpp"
#include "slowfast/sysmodel.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace slowfast::selfcheck {

namespace {

Mat random_matrix(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = scale * gauss(rng);
  return m;
}

CheckResult log_norm_oracle(std::mt19937_64& rng, int per_kind) {
  // Unit-spectral-norm samples: the quotient's second-order term is
  // O(h ||A||^2), so the 10h limit presumes O(1) scale.
  const double h = 1e-6;
  double worst = 0.0;
  std::uniform_int_distribution<int> dim(1, 6);
  for (int rep = 0; rep < per_kind; ++rep) {
    const int n = dim(rng);
    Mat a = random_matrix(rng, n);
    a /= induced_norm(a, NormKind::l2(), NormKind::l2()).value;
    Mat r = Mat::Identity(n, n) + 0.15 / std::sqrt(double(n)) * random_matrix(rng, n);
    for (const auto& k :
         {NormKind::l1(), NormKind::l2(), NormKind::linf(), NormKind::weighted_l2(r)}) {
      double closed = log_norm(a, k);
      double fd = log_norm_finite_difference(a, k, h);
      worst = std::max(worst, std::abs(closed - fd));
    }
  }
  std::ostringstream os;
  os << "max |closed - fd| = " << worst << " (limit " << 10.0 * h << ")";
  return {"log_norm_finite_difference", worst <= 10.0 * h, os.str()};
}

CheckResult log_norm_properties(std::mt19937_64& rng) {
  std::vector<NormKind> kinds{NormKind::l1(), NormKind::l2(), NormKind::linf()};
  std::uniform_int_distribution<int> dim(1, 6);
  bool ok = true;
  std::ostringstream os;
  for (int rep = 0; rep < 40 && ok; ++rep) {
    const int n = dim(rng);
    Mat a = random_matrix(rng, n), b = random_matrix(rng, n);
    for (const auto& k : kinds) {
      if (log_norm(a + b, k) > log_norm(a, k) + log_norm(b, k) + 1e-9) {
        ok = false;
        os << "subadditivity violated";
        break;
      }
      if (log_norm(a, k) < spectral_abscissa(a) - 1e-9) {
        ok = false;
        os << "mu(A) < alpha(A)";
        break;
      }
    }
  }
  if (ok) os << "subadditivity and mu >= alpha hold on 40 samples";
  return {"log_norm_properties", ok, os.str()};
}

CheckResult perron_scaling(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.1, 2.0);
  bool ok = true;
  for (int rep = 0; rep < 20 && ok; ++rep) {
    Mat g(2, 2);
    double off1 = uni(rng), off2 = uni(rng);
    double d1 = -(off1 + uni(rng) + 0.2), d2 = -(off2 + uni(rng) + 0.2);
    g << d1, off1, off2, d2;
    if (spectral_abscissa(g) >= 0.0) continue;
    CompositeWeight n1 = perron_weights(g);
    CompositeWeight n2 = perron_weights(Mat(uni(rng) * g));
    ok = std::abs(n1.n2 / n1.n1 - n2.n2 / n2.n1) <= 1e-8 * (n1.n2 / n1.n1);
  }
  return {"perron_scaling_invariance", ok, "N ratio invariant under G -> cG"};
}

CheckResult delta_set_values() {
  ConstantsTable c;
  c.c_f = c.c_g = c.l_fx = c.l_fz = c.l_ft = c.l_fw = c.l_feps = c.l_gx = c.l_gw = c.l_geps = 1.0;
  DeltaSet d = delta_set(c);
  bool ok = d.dx1 == 1.0 && d.dx2 == 3.0 && d.dx3 == 2.0 && d.dx4 == 1.0 && d.dz1 == 2.0 &&
            d.dz2 == 5.0 && d.dz3 == 4.0 && d.dz4 == 2.0;
  return {"delta_set_all_ones", ok, "(1,3,2,1) and (2,5,4,2) at unit constants"};
}

CheckResult case_continuity() {
  ConstantsTable c;
  c.c_f = 1.0;
  c.c_g = 1.0;
  c.l_fx = c.l_fz = c.l_gx = 1.0;
  c.l_ft = 0.5;
  c.l_gw = 0.3;
  c.l_fw = 0.0;
  c.l_feps = 0.2;
  c.l_geps = 0.1;
  InitNorms init{0.0, 0.7, 1.3};
  Wbars wb{0.0, 0.4};
  double worst = 0.0;
  for (double sign : {-1.0, 1.0}) {
    const double c_y = c.c_f * (1.0 + sign * 1e-6);
    const double eps1 = c.c_g / (c_y + c.l_gx * c.l_fz / c.c_g);
    const double eps2 = c.c_g / (c.c_f + c.l_gx * c.l_fz / c.c_g);
    BoundEnvelope e1 =
        detail::envelope_x_general_mode(c, eps1, init, wb, detail::KernelMode::case_distinct);
    BoundEnvelope e2 =
        detail::envelope_x_general_mode(c, eps2, init, wb, detail::KernelMode::case_equal);
    for (double t : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
      double v1 = e1.eval(t), v2 = e2.eval(t);
      worst = std::max(worst, std::abs(v1 - v2) / std::max(1e-12, std::abs(v2)));
    }
  }
  std::ostringstream os;
  os << "worst relative gap " << worst;
  return {"envelope_case_continuity", worst <= 1e-3, os.str()};
}

CheckResult gain_lemma_soundness(std::mt19937_64& rng, int draws) {
  std::uniform_real_distribution<double> pos(0.05, 5.0), nonneg(0.0, 3.0), frac(0.0, 1.0);
  int bad = 0;
  for (int i = 0; i < draws; ++i) {
    GainMatrixParams p;
    p.a11 = pos(rng);
    p.a12 = pos(rng);
    p.a21 = pos(rng);
    p.a22 = pos(rng);
    p.d22 = pos(rng);
    p.d11 = nonneg(rng);
    p.d21 = nonneg(rng);
    double thr = hurwitz_gain_check(p, 1.0).threshold;
    if (!std::isfinite(thr)) continue;
    double eps = std::max(1e-9, frac(rng) * thr * (1.0 - 1e-9));
    GainCheck chk = hurwitz_gain_check(p, eps);
    if (chk.verdict == GainVerdict::below_threshold_hurwitz &&
        std::max(chk.eig_real[0], chk.eig_real[1]) >= 0.0)
      ++bad;
  }
  std::ostringstream os;
  os << bad << " false certifications in " << draws << " draws";
  return {"gain_lemma_soundness", bad == 0, os.str()};
}

CheckResult diagram_implications(std::mt19937_64& rng, int instances) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  int bad = 0;
  const std::vector<double> grid{1e-3, 1e-2, 1e-1, 1.0, 10.0};
  for (int i = 0; i < instances; ++i) {
    LtiBlockSystem s;
    s.A = random_matrix(rng, 2);
    if (uni(rng) < 0.7)
      s.A -= (log_norm(s.A, NormKind::l2()) + 0.2 + uni(rng)) * Mat::Identity(2, 2);
    s.D = random_matrix(rng, 2);
    s.D -= (log_norm(s.D, NormKind::l2()) + 0.2 + uni(rng)) * Mat::Identity(2, 2);
    s.B = random_matrix(rng, 2, 0.7);
    s.C = random_matrix(rng, 2, 0.7);
    if (!diagram_check(s, grid).consistent) ++bad;
  }
  std::ostringstream os;
  os << bad << " violated instances of " << instances;
  return {"diagram_implications", bad == 0, os.str()};
}

CheckResult lti_quick(std::mt19937_64& rng, int instances) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  bool ok = true;
  std::string detail = "envelopes hold and certificates fit";
  for (int i = 0; i < instances && ok; ++i) {
    const int nx = 1 + static_cast<int>(rng() % 3), nz = 1 + static_cast<int>(rng() % 3);
    LtiBlockSystem s;
    s.B = Mat(nx, nz);
    s.C = Mat(nz, nx);
    for (int a = 0; a < nx; ++a)
      for (int b = 0; b < nz; ++b) s.B(a, b) = 0.5 * gauss(rng);
    for (int a = 0; a < nz; ++a)
      for (int b = 0; b < nx; ++b) s.C(a, b) = 0.5 * gauss(rng);
    s.D = random_matrix(rng, nz);
    s.D -= (log_norm(s.D, NormKind::l2()) + 0.5) * Mat::Identity(nz, nz);
    Mat a0 = random_matrix(rng, nx);
    s.A = a0 + s.B * s.D.fullPivLu().solve(s.C);  // A_red = a0 - shift below
    s.A -= (log_norm(reduced_lti(s), NormKind::l2()) + 0.8) * Mat::Identity(nx, nx);
    const double eps = 0.5 * std::min(epsilon_star_0_lti(s), epsilon_star_lti(s));
    if (!(eps > 0.0) || !std::isfinite(eps)) continue;
    // stay in the two-time-scale regime where the cascade envelopes apply
    const double ared_rate = -log_norm(reduced_lti(s), NormKind::l2());
    const Mat dinv_c_probe = s.D.fullPivLu().solve(s.C);
    const double cly = -log_norm(s.D, NormKind::l2()) / eps -
                       induced_norm(Mat(dinv_c_probe * s.B), NormKind::l2(), NormKind::l2()).value;
    if (cly < 6.0 * ared_rate) continue;

    Vec x0 = Vec::NullaryExpr(nx, [&](Eigen::Index) { return gauss(rng); });
    Vec z0 = Vec::NullaryExpr(nz, [&](Eigen::Index) { return gauss(rng); });
    auto grid = uniform_grid(8.0, 160);
    Vec st0(nx + nz);
    st0 << x0, z0;
    Trajectory full = integrate_lti_exact(full_generator(s, eps), st0, grid);
    Trajectory red = integrate_lti_exact(reduced_lti(s), x0, grid);
    auto envs = envelope_lti(s, eps, x0, z0, x0);
    const Mat dinv_c = s.D.fullPivLu().solve(s.C);
    for (std::size_t k = 0; k < grid.size() && ok; ++k) {
      Vec xr = red.at(k);
      Vec state = full.at(k);
      double mx = (state.head(nx) - xr).norm();
      double mz = (state.tail(nz) + dinv_c * xr).norm();
      if (mx > envs.first.eval(grid[k]) * 1.01 + 1e-12 ||
          mz > envs.second.eval(grid[k]) * 1.01 + 1e-12) {
        ok = false;
        detail = "envelope violated at t = " + std::to_string(grid[k]);
      }
    }
    if (ok) {
      ContractionCertificate cert = contraction_certificate(s, eps);
      if (cert.fitted_rate < cert.rate * 0.95) {
        ok = false;
        detail = "certificate fit below certified rate";
      }
    }
  }
  return {"lti_envelopes_and_certificates", ok, detail};
}

CheckResult shifted_consistency() {
  // Nonlinear two-time scale system; integrate (x, z) directly and via the
  // shifted variables, then compare.
  TwoTimeScaleSystem sys;
  sys.n_x = 1;
  sys.n_z = 1;
  sys.epsilon = 0.2;
  sys.w_x_sig = DisturbanceSignal::zero(1);
  sys.w_z_sig = DisturbanceSignal::sinusoid(Vec::Constant(1, 0.3), 0.7);
  sys.f = [](double, const Vec& x, const Vec& z, const Vec&, double) {
    return Vec(Vec::Constant(1, -2.0 * x(0) + 0.8 * std::tanh(z(0))));
  };
  sys.g = [](const Vec& x, const Vec& z, const Vec& w, double) {
    return Vec(Vec::Constant(1, -1.5 * z(0) + std::sin(x(0)) + 0.5 * w(0)));
  };
  Vec x0 = Vec::Constant(1, 0.9), z0 = Vec::Constant(1, -0.4);

  IntegrationConfig cfg;
  cfg.t_end = 6.0;
  cfg.rel_tol = 1e-9;
  cfg.abs_tol = 1e-12;
  cfg.max_step = 0.05;
  auto grid = uniform_grid(cfg.t_end, 61);

  Vec y0(2);
  y0 << x0, z0;
  Trajectory direct = integrate(full_ode(sys, cfg), y0, cfg, grid);

  ShiftedSystem sh = shifted_system(sys);
  Vec s0(2);
  s0 << x0, z0 - sh.z_star(0.0, x0);
  Trajectory via_shift = integrate(shifted_ode(sh, sys, cfg), s0, cfg, grid);

  double worst = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    Vec a = direct.at(k);
    Vec b = via_shift.at(k);
    Vec z_back = b.tail(1) + sh.z_star(grid[k], b.head(1));
    worst = std::max(worst, std::abs(a(0) - b(0)));
    worst = std::max(worst, std::abs(a(1) - z_back(0)));
  }
  std::ostringstream os;
  os << "max state gap " << worst;
  return {"shifted_vs_original", worst <= 1e-5, os.str()};
}

CheckResult integrator_order() {
  Mat m(2, 2);
  m << 0.0, 1.0, -4.0, -0.4;
  Vec x0(2);
  x0 << 1.0, 0.0;
  auto grid = uniform_grid(5.0, 11);
  Trajectory exact = integrate_lti_exact(m, x0, grid);
  OdeFunction ode;
  ode.dim = 2;
  ode.rhs = [&m](double, const Vec& y) { return Vec(m * y); };
  auto err_at = [&](double rtol) {
    IntegrationConfig cfg;
    cfg.t_end = 5.0;
    cfg.rel_tol = rtol;
    cfg.abs_tol = rtol * 1e-3;
    cfg.max_step = 1.0;
    Trajectory t = integrate(ode, x0, cfg, grid);
    double e = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) e = std::max(e, (t.at(k) - exact.at(k)).norm());
    return e;
  };
  double e1 = err_at(1e-5), e2 = err_at(5e-7);
  std::ostringstream os;
  os << "error " << e1 << " -> " << e2 << " after tolerance cut";
  return {"integrator_order", e2 * 4.0 <= e1 + 1e-15, os.str()};
}

}  // namespace

std::vector<CheckResult> run_all(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CheckResult> out;
  out.push_back(log_norm_oracle(rng, 50));
  out.push_back(log_norm_properties(rng));
  out.push_back(perron_scaling(rng));
  out.push_back(delta_set_values());
  out.push_back(case_continuity());
  out.push_back(gain_lemma_soundness(rng, 2000));
  out.push_back(diagram_implications(rng, 40));
  out.push_back(lti_quick(rng, 8));
  out.push_back(shifted_consistency());
  out.push_back(integrator_order());
  return out;
}

}  // namespace slowfast::selfcheck
