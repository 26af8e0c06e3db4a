#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "slowfast/sysmodel.hpp"

#include <cmath>
#include <random>

using namespace slowfast;

namespace {

// g(x, z) = -z + sin(x), scalar in both states.
TwoTimeScaleSystem sine_system(double eps = 0.1) {
  TwoTimeScaleSystem sys;
  sys.n_x = 1;
  sys.n_z = 1;
  sys.epsilon = eps;
  sys.f = [](double, const Vec& x, const Vec& z, const Vec&, double) {
    return Vec(Vec::Constant(1, -x(0) + z(0)));
  };
  sys.g = [](const Vec& x, const Vec& z, const Vec&, double) {
    return Vec(Vec::Constant(1, -z(0) + std::sin(x(0))));
  };
  return sys;
}

TwoTimeScaleSystem linear_system(const Mat& a, const Mat& b, const Mat& c, const Mat& d,
                                 double eps) {
  TwoTimeScaleSystem sys;
  sys.n_x = static_cast<int>(a.rows());
  sys.n_z = static_cast<int>(d.rows());
  sys.epsilon = eps;
  sys.f = [a, b](double, const Vec& x, const Vec& z, const Vec&, double) { return Vec(a * x + b * z); };
  sys.g = [c, d](const Vec& x, const Vec& z, const Vec&, double) { return Vec(c * x + d * z); };
  return sys;
}

}  // namespace

TEST_CASE("disturbance signals expose exact derivatives and bounds") {
  auto sig = DisturbanceSignal::sinusoid(Vec::Constant(1, 2.0), 0.5, 0.3);
  CHECK(sig.derivative_bound() == doctest::Approx(1.0));
  // derivative_bound dominates a dense finite-difference sample within 1%
  double sup_fd = 0.0;
  for (int k = 0; k < 2000; ++k) {
    double t = 0.01 * k;
    sup_fd = std::max(sup_fd, ((sig.value(t + 1e-6) - sig.value(t - 1e-6)) / 2e-6).norm());
  }
  CHECK(sig.derivative_bound() >= sup_fd * 0.99);

  auto both = DisturbanceSignal::sum(sig, DisturbanceSignal::ramp(Vec::Constant(1, 0.25)));
  CHECK(both.derivative_bound() == doctest::Approx(1.25));
  CHECK(both.value(2.0)(0) == doctest::Approx(2.0 * std::sin(1.3) + 0.5));
  CHECK(both.derivative(2.0)(0) == doctest::Approx(std::cos(1.3) + 0.25));

  auto step = DisturbanceSignal::smooth_step(Vec::Constant(1, 1.0), 1.0, 2.0);
  CHECK(step.value(0.5)(0) == 0.0);
  CHECK(step.value(3.5)(0) == doctest::Approx(1.0));
  CHECK(step.derivative_bound() == doctest::Approx(0.75));
}

TEST_CASE("quasi steady state") {
  auto sys = sine_system();
  CHECK(quasi_steady_state(sys, Vec::Zero(1), Vec::Zero(1), 0.0, 1e-12)(0) ==
        doctest::Approx(0.0));
  CHECK(quasi_steady_state(sys, Vec::Constant(1, M_PI / 2), Vec::Zero(1), 0.0, 1e-12)(0) ==
        doctest::Approx(1.0));

  // LTI g = Cx + Dz with C = [[-3]], D = [[-1]]: z*(2) = -D^{-1} C x = -6.
  auto lin = linear_system(Mat::Zero(1, 1), Mat::Zero(1, 1), Mat::Constant(1, 1, -3.0),
                           Mat::Constant(1, 1, -1.0), 0.1);
  CHECK(quasi_steady_state(lin, Vec::Constant(1, 2.0), Vec::Zero(1), 0.0, 1e-12)(0) ==
        doctest::Approx(-6.0));

  // Residual contract on a batch of random evaluation points.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  for (int k = 0; k < 25; ++k) {
    Vec x = Vec::Constant(1, uni(rng));
    Vec zs = quasi_steady_state(sys, x, Vec::Zero(1), 0.05, 1e-11);
    CHECK(vector_norm(sys.g(x, zs, Vec::Zero(1), 0.05), sys.z_norm) <= 1e-11);
  }
}

TEST_CASE("reduced model") {
  // f = -x + z, g = -z + x: z* = x, f_red = 0.
  auto cancel = linear_system(Mat::Constant(1, 1, -1.0), Mat::Identity(1, 1),
                              Mat::Identity(1, 1), Mat::Constant(1, 1, -1.0), 0.1);
  auto red = reduced_model(cancel);
  CHECK(red.rhs(0.0, Vec::Constant(1, 0.7), Vec::Zero(1), Vec::Zero(1))(0) ==
        doctest::Approx(0.0).epsilon(1e-9));

  // f = -x + z, g = -z: z* = 0, f_red = -x.
  auto decoup = linear_system(Mat::Constant(1, 1, -1.0), Mat::Identity(1, 1), Mat::Zero(1, 1),
                              Mat::Constant(1, 1, -1.0), 0.1);
  auto red2 = reduced_model(decoup);
  CHECK(red2.rhs(0.0, Vec::Constant(1, 0.7), Vec::Zero(1), Vec::Zero(1))(0) ==
        doctest::Approx(-0.7));
}

TEST_CASE("boundary layer") {
  auto sys = sine_system();
  auto bl = boundary_layer(sys, Vec::Zero(1), Vec::Zero(1));
  // g = -z + sin(x) with x frozen at 0: dy/dtau = -y
  CHECK(bl.rhs(0.0, Vec::Constant(1, 2.0))(0) == doctest::Approx(-2.0));
  // the field vanishes at y_bl = 0
  CHECK(bl.rhs(0.0, Vec::Zero(1))(0) == doctest::Approx(0.0).epsilon(1e-10));

  // linear g: the boundary layer is dy/dtau = D y
  auto lin = linear_system(Mat::Zero(1, 1), Mat::Zero(1, 1), Mat::Constant(1, 1, -3.0),
                           Mat::Constant(1, 1, -2.0), 0.1);
  auto bl2 = boundary_layer(lin, Vec::Constant(1, 1.0), Vec::Zero(1));
  CHECK(bl2.rhs(0.0, Vec::Constant(1, 0.5))(0) == doctest::Approx(-1.0).epsilon(1e-8));
}

TEST_CASE("shifted system matches the exact LTI derivative") {
  Mat a = Mat::Constant(1, 1, -1.0), b = Mat::Identity(1, 1);
  Mat c = Mat::Constant(1, 1, -3.0), d = Mat::Constant(1, 1, -1.0);
  auto sys = linear_system(a, b, c, d, 0.25);
  auto sh = shifted_system(sys);

  // z* = -D^{-1} C x = -3x, so z*(2) = -6.
  Vec x0 = Vec::Constant(1, 2.0);
  Vec zs = sh.z_star(0.0, x0);
  CHECK(zs(0) == doctest::Approx(-6.0));

  // Compare the finite-difference shifted fast field against the closed form
  // eps ydot = (D + eps D^{-1}CB) y + eps D^{-1}C A_red x.
  Vec y = Vec::Constant(1, 0.4);
  const double eps = sys.epsilon;
  const double dinv_c = 3.0;
  const double dinv_cb = dinv_c * b(0, 0);
  const double a_red = a(0, 0) - b(0, 0) * dinv_c;  // = -4
  const double expected =
      ((d(0, 0) + eps * dinv_cb) * y(0) + eps * dinv_c * a_red * x0(0)) / eps;
  CHECK(sh.y_dot(0.0, x0, y)(0) == doctest::Approx(expected).epsilon(1e-6));
  CHECK(c(0, 0) == -3.0);
}

TEST_CASE("shifted and original systems integrate to the same trajectories") {
  auto sys = sine_system(0.15);
  sys.w_z_sig = DisturbanceSignal::sinusoid(Vec::Constant(1, 0.2), 0.9);
  sys.f = [](double t, const Vec& x, const Vec& z, const Vec&, double) {
    return Vec(Vec::Constant(1, -2.0 * x(0) + 0.5 * z(0) + 0.1 * std::sin(t)));
  };
  sys.g = [](const Vec& x, const Vec& z, const Vec& w, double) {
    return Vec(Vec::Constant(1, -1.2 * z(0) + 0.8 * std::tanh(x(0)) + 0.4 * w(0)));
  };

  IntegrationConfig cfg;
  cfg.t_end = 5.0;
  cfg.rel_tol = 1e-9;
  cfg.abs_tol = 1e-12;
  cfg.max_step = 0.05;
  auto grid = uniform_grid(cfg.t_end, 26);

  OdeFunction full;
  full.dim = 2;
  full.step_cap = cfg.fast_step_cap * sys.epsilon;
  full.rhs = [&sys](double t, const Vec& y) {
    Vec out(2);
    out(0) = sys.f(t, y.head(1), y.tail(1), sys.w_x_sig.value(t), sys.epsilon)(0);
    out(1) = sys.g(y.head(1), y.tail(1), sys.w_z_sig.value(t), sys.epsilon)(0) / sys.epsilon;
    return out;
  };
  Vec start(2);
  start << 0.8, -0.3;
  Trajectory direct = integrate(full, start, cfg, grid);

  auto sh = shifted_system(sys);
  OdeFunction shifted;
  shifted.dim = 2;
  shifted.step_cap = full.step_cap;
  shifted.rhs = [&sh](double t, const Vec& y) {
    Vec out(2);
    out(0) = sh.x_dot(t, y.head(1), y.tail(1))(0);
    out(1) = sh.y_dot(t, y.head(1), y.tail(1))(0);
    return out;
  };
  Vec s0(2);
  s0 << start(0), start(1) - sh.z_star(0.0, start.head(1))(0);
  Trajectory via = integrate(shifted, s0, cfg, grid);

  for (std::size_t k = 0; k < grid.size(); ++k) {
    double z_back = via.at(k)(1) + sh.z_star(grid[k], via.at(k).head(1))(0);
    CHECK(std::abs(direct.at(k)(0) - via.at(k)(0)) <= 1e-5);
    CHECK(std::abs(direct.at(k)(1) - z_back) <= 1e-5);
  }
}

TEST_CASE("estimated constants recover linear fields") {
  SamplingBox box;
  box.x_lo = Vec::Constant(1, -2.0);
  box.x_hi = Vec::Constant(1, 2.0);
  box.z_lo = Vec::Constant(1, -2.0);
  box.z_hi = Vec::Constant(1, 2.0);
  box.wx_lo = Vec::Constant(1, -1.0);
  box.wx_hi = Vec::Constant(1, 1.0);
  box.wz_lo = Vec::Constant(1, -1.0);
  box.wz_hi = Vec::Constant(1, 1.0);
  box.count = 400;
  box.seed = 5;

  // g = -2z (osLip_z = -2), f with Lip_z = 3.
  TwoTimeScaleSystem sys;
  sys.n_x = 1;
  sys.n_z = 1;
  sys.epsilon = 0.1;
  sys.f = [](double, const Vec& x, const Vec& z, const Vec&, double) {
    return Vec(Vec::Constant(1, -x(0) + 3.0 * z(0)));
  };
  sys.g = [](const Vec&, const Vec& z, const Vec&, double) {
    return Vec(Vec::Constant(1, -2.0 * z(0)));
  };
  ConstantsTable c = estimate_constants(sys, box);
  CHECK(c.c_g == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(c.l_fz == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(c.c_f == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(c.provenance[0] == Provenance::estimated);

  // g = -z + sin(x): Lip_x estimate approaches 1 from below.
  TwoTimeScaleSystem sine;
  sine.n_x = 1;
  sine.n_z = 1;
  sine.epsilon = 0.1;
  sine.f = [](double, const Vec& x, const Vec& z, const Vec&, double) {
    return Vec(Vec::Constant(1, -x(0) + z(0)));
  };
  sine.g = [](const Vec& x, const Vec& z, const Vec&, double) {
    return Vec(Vec::Constant(1, -z(0) + std::sin(x(0))));
  };
  box.count = 3000;
  ConstantsTable cs = estimate_constants(sine, box);
  CHECK(cs.l_gx <= 1.0 + 1e-12);
  CHECK(cs.l_gx >= 0.9);
}

TEST_CASE("lipschitz bound on z* from the fast contraction") {
  // Linear test: z* = -D^{-1} C x so Lip_x(z*) = |C|/|D| = l_gx / c_g exactly.
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> uni(0.5, 3.0);
  for (int rep = 0; rep < 20; ++rep) {
    const double cg = uni(rng), lgx = uni(rng);
    auto sys = linear_system(Mat::Zero(1, 1), Mat::Zero(1, 1), Mat::Constant(1, 1, lgx),
                             Mat::Constant(1, 1, -cg), 0.1);
    Vec x1 = Vec::Constant(1, uni(rng)), x2 = Vec::Constant(1, -uni(rng));
    Vec z1 = quasi_steady_state(sys, x1, Vec::Zero(1), 0.0, 1e-13);
    Vec z2 = quasi_steady_state(sys, x2, Vec::Zero(1), 0.0, 1e-13);
    CHECK((z1 - z2).norm() <= (lgx / cg) * (x1 - x2).norm() * (1.0 + 1e-6));
  }
}

TEST_CASE("ode wrappers integrate the same trajectories as hand-stacked fields") {
  auto sys = sine_system(0.2);
  IntegrationConfig cfg;
  cfg.t_end = 2.0;
  cfg.c_g_estimate = 1.0;
  auto grid = uniform_grid(cfg.t_end, 11);
  Vec y0(2);
  y0 << 0.7, 0.1;
  Trajectory a = integrate(full_ode(sys, cfg), y0, cfg, grid);

  OdeFunction manual;
  manual.dim = 2;
  manual.step_cap = cfg.fast_step_cap * sys.epsilon;
  manual.rhs = [&sys](double t, const Vec& y) {
    Vec out(2);
    out.head(1) = sys.f(t, y.head(1), y.tail(1), sys.w_x_sig.value(t), sys.epsilon);
    out.tail(1) = sys.g(y.head(1), y.tail(1), sys.w_z_sig.value(t), sys.epsilon) / sys.epsilon;
    return out;
  };
  Trajectory b = integrate(manual, y0, cfg, grid);
  CHECK((a.states - b.states).cwiseAbs().maxCoeff() == 0.0);

  // the boundary-layer wrapper relaxes to y_bl = 0
  auto bl = boundary_layer(sys, Vec::Constant(1, 0.4), Vec::Zero(1));
  IntegrationConfig bl_cfg;
  bl_cfg.t_end = 30.0;
  Trajectory relax = integrate(boundary_layer_ode(bl), Vec::Constant(1, 1.0), bl_cfg, {30.0});
  CHECK(relax.at(0).norm() <= 1e-9);
}

TEST_CASE("validation") {
  TwoTimeScaleSystem sys;
  CHECK_THROWS_AS(sys.validate(), std::invalid_argument);
  auto ok = sine_system();
  CHECK_NOTHROW(ok.validate());
  ok.epsilon = 0.0;
  CHECK_THROWS_AS(ok.validate(), std::invalid_argument);
  SamplingBox empty;
  empty.count = 0;
  CHECK_THROWS_AS(estimate_constants(sine_system(), empty), std::invalid_argument);
}
