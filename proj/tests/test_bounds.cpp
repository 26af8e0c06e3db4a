#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "slowfast/bounds.hpp"

#include <cmath>

using namespace slowfast;

namespace {

ConstantsTable all_ones() {
  ConstantsTable c;
  c.c_f = c.c_g = 1.0;
  c.l_fx = c.l_fz = c.l_ft = c.l_fw = c.l_feps = c.l_gx = c.l_gw = c.l_geps = 1.0;
  return c;
}

}  // namespace

TEST_CASE("epsilon star general") {
  ConstantsTable c = all_ones();
  c.c_g = 2.0;
  c.l_gx = 1.0;
  c.l_fz = 2.0;
  CHECK(epsilon_star_general(c) == doctest::Approx(2.0));
  c.c_g = 1.0;
  c.l_fz = 1.0;
  CHECK(epsilon_star_general(c) == doctest::Approx(1.0));
  // quadratic scaling in c_g
  c.c_g = 2.0;
  CHECK(epsilon_star_general(c) == doctest::Approx(4.0));
  c.l_gx = 0.0;
  CHECK_THROWS_AS(epsilon_star_general(c), std::invalid_argument);
}

TEST_CASE("delta set hand values") {
  DeltaSet d = delta_set(all_ones());
  CHECK(d.dx1 == doctest::Approx(1.0));
  CHECK(d.dx2 == doctest::Approx(3.0));
  CHECK(d.dx3 == doctest::Approx(2.0));
  CHECK(d.dx4 == doctest::Approx(1.0));
  CHECK(d.dz1 == doctest::Approx(2.0));
  CHECK(d.dz2 == doctest::Approx(5.0));
  CHECK(d.dz3 == doctest::Approx(4.0));
  CHECK(d.dz4 == doctest::Approx(2.0));

  ConstantsTable c = all_ones();
  c.l_feps = 0.0;
  DeltaSet d2 = delta_set(c);
  CHECK(d2.dx1 == 0.0);
  CHECK(d2.dz1 == 0.0);

  c = all_ones();
  c.c_f = 0.0;
  CHECK_THROWS_AS(delta_set(c), std::invalid_argument);
}

TEST_CASE("delta set positivity") {
  ConstantsTable c = all_ones();
  c.c_f = 0.7;
  c.c_g = 1.9;
  c.l_ft = 0.3;
  c.l_gw = 2.1;
  DeltaSet d = delta_set(c);
  for (double v : {d.dx1, d.dx2, d.dx3, d.dx4, d.dz1, d.dz2, d.dz3, d.dz4}) CHECK(v > 0.0);
}

TEST_CASE("lemma y constants") {
  ConstantsTable c = all_ones();
  LemmaYConstants ly = lemma_y_constants(c, 0.1, 0.0, 0.0);
  CHECK(ly.c_y == doctest::Approx(9.0));
  CHECK(ly.delta_y == doctest::Approx(1.0));
  CHECK(ly.delta == doctest::Approx(2.1));

  // all drive terms vanish -> delta = 0 -> limsup bound 0
  ConstantsTable c0 = all_ones();
  c0.l_ft = c0.l_geps = c0.l_feps = 0.0;
  LemmaYConstants z = lemma_y_constants(c0, 0.1, 0.0, 0.0);
  CHECK(z.delta == doctest::Approx(0.0));

  CHECK_THROWS_AS(lemma_y_constants(c, 1.0, 0.0, 0.0), std::invalid_argument);  // at threshold
}

TEST_CASE("y envelope boundary values") {
  ConstantsTable c = all_ones();
  const double y0 = 0.8, f0 = 1.4;
  Wbars none{0.0, 0.0};
  BoundEnvelope env = envelope_y(c, 0.1, y0, f0, none);
  // at t = 0 the Case-1 transient cancels the offset exactly
  CHECK(env.eval(0.0) == doctest::Approx(y0).epsilon(1e-12));
  // asymptote delta / c_y
  LemmaYConstants ly = lemma_y_constants(c, 0.1, 0.0, 0.0);
  CHECK(env.asymptote == doctest::Approx(ly.delta / ly.c_y));
  CHECK(env.eval(2000.0) == doctest::Approx(env.asymptote).epsilon(1e-9));

  // y0 = 0, delta = 0: envelope decays to zero
  ConstantsTable c0 = all_ones();
  c0.l_ft = c0.l_geps = c0.l_feps = 0.0;
  BoundEnvelope env0 = envelope_y(c0, 0.1, 0.0, f0, none);
  CHECK(env0.eval(0.0) == doctest::Approx(0.0));
  CHECK(env0.eval(300.0) <= 1e-10);
}

TEST_CASE("x envelope hand value and boundary behavior") {
  ConstantsTable c = all_ones();
  Wbars none{0.0, 0.0};
  InitNorms init{0.0, 0.5, 1.0};
  BoundEnvelope env = envelope_x_general(c, 0.1, init, none);
  // leading terms at unit constants, eps = 0.1: (dx2 + eps dx1)/c_y = 3.1/9
  CHECK(env.asymptote == doctest::Approx(31.0 / 90.0));
  CHECK(env.eval(0.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(env.eval(2000.0) == doctest::Approx(env.asymptote).epsilon(1e-9));

  InitNorms gap{0.25, 0.5, 1.0};
  BoundEnvelope env_gap = envelope_x_general(c, 0.1, gap, none);
  CHECK(env_gap.eval(0.0) == doctest::Approx(0.25));

  // the asymptote vanishes in the autonomous limit
  ConstantsTable c0 = all_ones();
  c0.l_ft = c0.l_geps = c0.l_feps = 0.0;
  BoundEnvelope env0 = envelope_x_general(c0, 0.1, init, none);
  CHECK(env0.asymptote == doctest::Approx(0.0));
}

TEST_CASE("x envelope asymptote increases with epsilon") {
  ConstantsTable c = all_ones();
  Wbars wb{0.3, 0.4};
  InitNorms init{0.0, 0.5, 1.0};
  double prev = 0.0;
  for (double eps : {0.05, 0.1, 0.2, 0.4, 0.8, 0.99}) {
    BoundEnvelope env = envelope_x_general(c, eps, init, wb);
    CHECK(env.asymptote > prev);
    prev = env.asymptote;
  }
}

TEST_CASE("z envelope structure") {
  ConstantsTable c = all_ones();
  Wbars none{0.0, 0.0};
  InitNorms init{0.3, 0.5, 1.0};
  BoundEnvelope env_z = envelope_z_general(c, 0.1, init, none);
  LemmaYConstants ly = lemma_y_constants(c, 0.1, 0.0, 0.0);
  DeltaSet d = delta_set(c);
  const double asym = (d.dz2 + 0.1 * d.dz1) / ly.c_y;
  CHECK(env_z.asymptote == doctest::Approx(asym));
  CHECK(env_z.eval(3000.0) == doctest::Approx(asym).epsilon(1e-9));

  // E_z(0) carries ||y(0)|| once with unit coefficient: moving y0 by dy moves
  // the envelope at t = 0 by exactly dy (every other y0 route has a vanishing
  // kernel at t = 0).
  InitNorms bumped = init;
  bumped.y0 += 0.25;
  BoundEnvelope env_b = envelope_z_general(c, 0.1, bumped, none);
  CHECK(env_b.eval(0.0) - env_z.eval(0.0) == doctest::Approx(0.25).epsilon(1e-9));

  // l_gx -> 0 decouples: the z-envelope collapses to the y-envelope terms.
  ConstantsTable dec = all_ones();
  dec.l_gx = 1e-12;
  BoundEnvelope env_dec = envelope_z_general(dec, 0.1, init, none);
  BoundEnvelope env_y = envelope_y(dec, 0.1, init.y0, init.fred0, none);
  for (double t : {0.0, 0.5, 1.0, 5.0})
    CHECK(env_dec.eval(t) ==
          doctest::Approx(env_y.eval(t) + (env_dec.asymptote - env_y.asymptote)).epsilon(1e-6));
}

TEST_CASE("autonomous envelopes") {
  ConstantsTable c = all_ones();
  const double y0 = 0.6, f0 = 1.1;
  auto [gx, gz] = envelope_autonomous(c, 0.1, y0, f0);
  CHECK(gx.eval(0.0) == doctest::Approx(0.0));
  CHECK(gz.eval(0.0) == doctest::Approx(y0));
  CHECK(gx.asymptote == 0.0);
  CHECK(gz.asymptote == 0.0);
  // both envelopes decay below 1e-6 at t = 100/min(c_f, c_y)
  const double t_long = 100.0;
  CHECK(gx.eval(t_long) < 1e-6);
  CHECK(gz.eval(t_long) < 1e-6);
  // nonnegative over the grid
  for (int k = 0; k <= 100; ++k) {
    CHECK(gx.eval(0.3 * k) >= 0.0);
    CHECK(gz.eval(0.3 * k) >= 0.0);
  }
  CHECK_THROWS_AS(envelope_autonomous(c, 1.5, y0, f0), std::invalid_argument);
}

TEST_CASE("case continuity of the kernels and envelopes") {
  using detail::KernelMode;
  ConstantsTable c = all_ones();
  c.l_ft = 0.5;
  c.l_gw = 0.3;
  c.l_feps = 0.2;
  c.l_geps = 0.1;
  c.l_fw = 0.0;
  InitNorms init{0.0, 0.7, 1.3};
  Wbars wb{0.0, 0.4};
  const double eps_equal = c.c_g / (c.c_f + c.l_gx * c.l_fz / c.c_g);
  BoundEnvelope case2 = detail::envelope_x_general_mode(c, eps_equal, init, wb,
                                                        KernelMode::case_equal);
  for (double sign : {-1.0, 1.0}) {
    const double c_y = c.c_f * (1.0 + sign * 1e-6);
    const double eps1 = c.c_g / (c_y + c.l_gx * c.l_fz / c.c_g);
    BoundEnvelope case1 =
        detail::envelope_x_general_mode(c, eps1, init, wb, KernelMode::case_distinct);
    for (double t : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
      CHECK(case1.eval(t) ==
            doctest::Approx(case2.eval(t)).epsilon(1e-3));
    }
  }

  // kernels: the stable path agrees with both raw branches in their domains
  for (double t : {0.2, 1.0, 4.0}) {
    CHECK(detail::conv_exp(t, 1.0, 3.0) ==
          doctest::Approx(detail::conv_exp(t, 1.0, 3.0, KernelMode::case_distinct)));
    CHECK(detail::conv_exp(t, 2.0, 2.0) ==
          doctest::Approx(detail::conv_exp(t, 2.0, 2.0, KernelMode::case_equal)));
    CHECK(detail::conv_exp_aba(t, 1.0, 3.0) ==
          doctest::Approx(detail::conv_exp_aba(t, 1.0, 3.0, KernelMode::case_distinct)));
    CHECK(detail::conv_exp_aba(t, 2.0, 2.0) ==
          doctest::Approx(detail::conv_exp_aba(t, 2.0, 2.0, KernelMode::case_equal)));
  }
}

TEST_CASE("kernels match quadrature") {
  // Independent oracle: composite Simpson quadrature of the defining integrals.
  auto simpson = [](auto fn, double t, int n) {
    double h = t / n, acc = fn(0.0) + fn(t);
    for (int i = 1; i < n; ++i) acc += fn(i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
  };
  for (double a : {0.5, 2.0})
    for (double b : {0.5, 1.7})
      for (double t : {0.3, 1.0, 2.5}) {
        double k1 = simpson([&](double s) { return std::exp(-a * (t - s)) * std::exp(-b * s); },
                            t, 2000);
        CHECK(detail::conv_exp(t, a, b) == doctest::Approx(k1).epsilon(1e-8));
        double k2 = simpson(
            [&](double s) { return std::exp(-a * (t - s)) * detail::conv_exp(s, b, a); }, t, 2000);
        CHECK(detail::conv_exp_aba(t, a, b) == doctest::Approx(k2).epsilon(1e-8));
      }
}

TEST_CASE("asymptote consistency at the settling horizon") {
  ConstantsTable c = all_ones();
  c.c_f = 0.8;
  c.l_ft = 0.4;
  Wbars wb{0.2, 0.3};
  InitNorms init{0.1, 0.6, 1.2};
  for (double eps : {0.05, 0.2, 0.5}) {
    LemmaYConstants ly = lemma_y_constants(c, eps, wb.wx, wb.wz);
    const double t_end = 20.0 / std::min(c.c_f, ly.c_y);
    for (const BoundEnvelope& env :
         {envelope_y(c, eps, init.y0, init.fred0, wb), envelope_x_general(c, eps, init, wb),
          envelope_z_general(c, eps, init, wb)}) {
      CHECK(std::abs(env.eval(t_end) - env.asymptote) <= 0.01 * env.asymptote);
    }
  }
}

TEST_CASE("verify bound") {
  BoundEnvelope env;
  env.asymptote = 1.0;
  env.eval = [](double t) { return 1.0 + std::exp(-t); };
  std::vector<double> times{0.0, 1.0, 2.0, 3.0};
  std::vector<double> zero(4, 0.0);
  BoundReport r0 = verify_bound(times, zero, env, 0.01);
  CHECK(r0.pass);
  CHECK(r0.margins[0] == doctest::Approx(2.0 * 1.01));
  CHECK(r0.worst_ratio == 0.0);

  std::vector<double> exact;
  for (double t : times) exact.push_back(env.eval(t));
  CHECK(verify_bound(times, exact, env, 1e-6).pass);

  std::vector<double> twice;
  for (double v : exact) twice.push_back(2.0 * v);
  BoundReport r2 = verify_bound(times, twice, env, 0.01);
  CHECK(!r2.pass);
  CHECK(r2.worst_ratio == doctest::Approx(2.0));

  CHECK_THROWS_AS(verify_bound({0.0}, zero, env, 0.01), std::invalid_argument);
}
