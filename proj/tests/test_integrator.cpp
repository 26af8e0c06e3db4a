#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "slowfast/integrator.hpp"

#include <cmath>

using namespace slowfast;

TEST_CASE("scalar decay against the closed form") {
  OdeFunction ode;
  ode.dim = 1;
  ode.rhs = [](double, const Vec& y) { return Vec(-y); };
  IntegrationConfig cfg;
  cfg.t_end = 1.0;
  cfg.rel_tol = 1e-9;
  cfg.abs_tol = 1e-12;
  Trajectory t = integrate(ode, Vec::Constant(1, 1.0), cfg, {0.5, 1.0});
  CHECK(t.at(1)(0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
  CHECK(t.stats.accepted > 0);
}

TEST_CASE("fast subsystem with epsilon step cap") {
  const double eps = 0.01;
  OdeFunction ode;
  ode.dim = 1;
  ode.step_cap = 0.1 * eps;
  ode.rhs = [eps](double, const Vec& y) { return Vec(-y / eps); };
  IntegrationConfig cfg;
  cfg.t_end = 0.1;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-14;
  Trajectory t = integrate(ode, Vec::Constant(1, 1.0), cfg, {0.1});
  CHECK(t.at(0)(0) == doctest::Approx(std::exp(-10.0)).epsilon(1e-4));
  CHECK(std::abs(t.at(0)(0) - std::exp(-10.0)) <= 1e-8);
  CHECK(t.stats.accepted >= 100);  // the cap enforces at least t_end / (0.1 eps) steps
}

TEST_CASE("matrix exponential basics") {
  CHECK((expm(Mat(Mat::Zero(3, 3))) - Mat::Identity(3, 3)).norm() == doctest::Approx(0.0));
  Mat m = -Mat::Identity(2, 2);
  Vec x0 = Vec::Constant(2, 1.0);
  Trajectory t = integrate_lti_exact(m, x0, {1.0});
  CHECK(t.at(0)(0) == doctest::Approx(std::exp(-1.0)));
  CHECK(t.at(0)(1) == doctest::Approx(std::exp(-1.0)));

  Mat nil(2, 2);
  nil << 0, 1, 0, 0;
  Vec e2(2);
  e2 << 0, 1;
  Trajectory tn = integrate_lti_exact(nil, e2, {2.0});
  CHECK(tn.at(0)(0) == doctest::Approx(2.0));
  CHECK(tn.at(0)(1) == doctest::Approx(1.0));
}

TEST_CASE("adaptive solution matches the matrix exponential reference") {
  Mat m(3, 3);
  m << -1, 2, 0, -2, -1, 1, 0, -0.5, -3;
  Vec x0(3);
  x0 << 1, -1, 0.5;
  auto grid = uniform_grid(4.0, 21);
  Trajectory exact = integrate_lti_exact(m, x0, grid);

  OdeFunction ode;
  ode.dim = 3;
  ode.rhs = [&m](double, const Vec& y) { return Vec(m * y); };
  IntegrationConfig cfg;
  cfg.t_end = 4.0;
  cfg.rel_tol = 1e-9;
  cfg.abs_tol = 1e-12;
  Trajectory num = integrate(ode, x0, cfg, grid);
  for (std::size_t k = 0; k < grid.size(); ++k)
    CHECK((num.at(k) - exact.at(k)).norm() <= 1e-6);
}

TEST_CASE("halving tolerances improves accuracy by at least 4x") {
  Mat m(2, 2);
  m << 0, 1, -9, -0.2;
  Vec x0(2);
  x0 << 1, 0;
  auto grid = uniform_grid(6.0, 13);
  Trajectory exact = integrate_lti_exact(m, x0, grid);
  OdeFunction ode;
  ode.dim = 2;
  ode.rhs = [&m](double, const Vec& y) { return Vec(m * y); };
  auto err = [&](double tol) {
    IntegrationConfig cfg;
    cfg.t_end = 6.0;
    cfg.rel_tol = tol;
    cfg.abs_tol = tol * 1e-3;
    Trajectory t = integrate(ode, x0, cfg, grid);
    double e = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) e = std::max(e, (t.at(k) - exact.at(k)).norm());
    return e;
  };
  // Tolerance cut by 32 for a 5th-order method; demand the 4x the contract asks.
  CHECK(err(1e-5 / 32.0) * 4.0 <= err(1e-5));
}

TEST_CASE("deterministic trajectories") {
  OdeFunction ode;
  ode.dim = 2;
  ode.rhs = [](double t, const Vec& y) {
    Vec out(2);
    out << -y(0) + std::sin(t), -2.0 * y(1) + y(0) * y(0);
    return out;
  };
  IntegrationConfig cfg;
  cfg.t_end = 3.0;
  Vec y0(2);
  y0 << 1.0, -1.0;
  auto grid = uniform_grid(3.0, 7);
  Trajectory a = integrate(ode, y0, cfg, grid);
  Trajectory b = integrate(ode, y0, cfg, grid);
  CHECK((a.states - b.states).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("stiffness beyond the method reports an actionable error") {
  OdeFunction ode;
  ode.dim = 1;
  ode.step_cap = 1e-16;
  ode.rhs = [](double, const Vec& y) { return Vec(-y); };
  IntegrationConfig cfg;
  cfg.t_end = 1.0;
  CHECK_THROWS_AS(integrate(ode, Vec::Constant(1, 1.0), cfg, {1.0}), NumericalError);
}

TEST_CASE("config and grid validation") {
  OdeFunction ode;
  ode.dim = 1;
  ode.rhs = [](double, const Vec& y) { return Vec(-y); };
  IntegrationConfig bad;
  bad.t_end = -1.0;
  CHECK_THROWS_AS(integrate(ode, Vec::Constant(1, 1.0), bad, {1.0}), std::invalid_argument);
  IntegrationConfig cfg;
  cfg.t_end = 1.0;
  CHECK_THROWS_AS(integrate(ode, Vec::Constant(1, 1.0), cfg, {}), std::invalid_argument);
  CHECK_THROWS_AS(integrate(ode, Vec::Constant(1, 1.0), cfg, {0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(integrate(ode, Vec::Constant(1, 1.0), cfg, {2.0}), std::invalid_argument);
}
