#include "slowfast/bounds.hpp"

#include <algorithm>
#include <cmath>

namespace slowfast {

namespace detail {

double conv_exp(double t, double a, double b, KernelMode mode) {
  if (t <= 0.0) return 0.0;
  const double q = a - b;
  if (mode == KernelMode::case_equal) return t * std::exp(-a * t);
  const double u = q * t;
  if (mode == KernelMode::stable && std::abs(u) < 1e-5) {
    // e^{-at} t (1 + u/2 + u^2/6)
    return std::exp(-a * t) * t * (1.0 + u * (0.5 + u / 6.0));
  }
  return (std::exp(-b * t) - std::exp(-a * t)) / q;
}

double conv_exp_aba(double t, double a, double b, KernelMode mode) {
  if (t <= 0.0) return 0.0;
  const double q = b - a;
  if (mode == KernelMode::case_equal) return 0.5 * t * t * std::exp(-a * t);
  const double u = q * t;
  if (mode == KernelMode::stable && std::abs(u) < 1e-4) {
    // e^{-at} t^2/2 (1 - u/3 + u^2/12 - u^3/60)
    return std::exp(-a * t) * 0.5 * t * t * (1.0 + u * (-1.0 / 3 + u * (1.0 / 12 - u / 60)));
  }
  // (qt - 1 + e^{-qt}) e^{-at} / q^2 arranged to avoid overflow for q < 0
  return ((u - 1.0) * std::exp(-a * t) + std::exp(-b * t)) / (q * q);
}

}  // namespace detail

using detail::conv_exp;
using detail::conv_exp_aba;
using detail::KernelMode;

double epsilon_star_general(const ConstantsTable& c) {
  if (!(c.c_g > 0.0) || !(c.l_gx > 0.0) || !(c.l_fz > 0.0))
    throw std::invalid_argument("epsilon_star_general: c_g, l_gx and l_fz must be positive");
  return c.c_g * c.c_g / (c.l_gx * c.l_fz);
}

DeltaSet delta_set(const ConstantsTable& c) {
  if (!(c.c_f > 0.0) || !(c.c_g > 0.0))
    throw std::invalid_argument("delta_set: c_f and c_g must be positive");
  const double k = c.l_gx * c.l_fz / c.c_g;
  DeltaSet d;
  d.dx1 = c.l_fz * c.l_gx * c.l_feps / c.c_g;
  d.dx2 = c.l_fz * c.l_geps + c.l_fz * c.l_gx * c.l_ft / (c.c_f * c.c_g) + c.l_feps * c.c_g;
  d.dx3 = c.l_fz * c.l_gw / c.c_g + c.l_fz * c.l_fz * c.l_gx * c.l_gw / (c.c_f * c.c_g * c.c_g);
  d.dx4 = c.l_fz * c.l_gx * c.l_fw / (c.c_f * c.c_g);
  d.dz4 = c.l_gx * c.l_fw / (c.c_g * c.c_f) * (1.0 + k);
  // (c_f l_feps / l_fw) dz4 with the l_fw cancellation carried out, so the
  // value is defined for l_fw = 0 as well.
  d.dz1 = c.l_feps * c.l_gx / c.c_g * (1.0 + k);
  d.dz2 = (1.0 + k) * (c.l_geps + c.l_gx * c.l_ft / (c.c_f * c.c_g)) + c.l_gx * c.l_feps;
  d.dz3 = (c.l_gw / c.c_g + c.l_gx * c.l_gw / (c.c_f * c.c_g * c.c_g)) * (1.0 + k);
  return d;
}

LemmaYConstants lemma_y_constants(const ConstantsTable& c, double eps, double wbar_x,
                                  double wbar_z) {
  c.require_contractive("lemma_y_constants");
  if (!(eps > 0.0)) throw std::invalid_argument("lemma_y_constants: eps must be positive");
  const double eps_star = epsilon_star_general(c);
  if (!(eps < eps_star))
    throw std::invalid_argument(
        "lemma_y_constants: hypothesis violated, eps = " + std::to_string(eps) +
        " is not below c_g^2/(l_gx l_fz) = " + std::to_string(eps_star));
  LemmaYConstants out;
  out.c_y = c.c_g / eps - c.l_gx * c.l_fz / c.c_g;
  out.delta_y =
      c.l_gx / (c.c_g * c.c_f) * (c.l_ft + c.l_fz * (c.l_gw / c.c_g) * wbar_z + c.l_fw * wbar_x);
  out.delta = c.l_geps + (c.l_gw / c.c_g) * wbar_z + eps * (c.l_gx / c.c_g) * c.l_feps + out.delta_y;
  return out;
}

namespace {

CaseTag classify(double c_f, double c_y) {
  return std::abs(c_f - c_y) <= 1e-9 * std::max(std::abs(c_f), std::abs(c_y)) ? CaseTag::equal
                                                                              : CaseTag::distinct;
}

}  // namespace

BoundEnvelope envelope_y(const ConstantsTable& c, double eps, double y0_norm, double fred0_norm,
                         const Wbars& wbars) {
  if (y0_norm < 0.0 || fred0_norm < 0.0)
    throw std::invalid_argument("envelope_y: initial norms must be nonnegative");
  const LemmaYConstants ly = lemma_y_constants(c, eps, wbars.wx, wbars.wz);
  const double c_f = c.c_f, c_y = ly.c_y;
  const double d_over_cy = ly.delta / c_y;
  const double ky = (c.l_gx / c.c_g) * fred0_norm - ly.delta_y;

  BoundEnvelope env;
  env.case_tag = classify(c_f, c_y);
  env.asymptote = d_over_cy;
  env.eval = [=](double t) {
    return std::exp(-c_y * t) * y0_norm + d_over_cy * -std::expm1(-c_y * t) +
           ky * conv_exp(t, c_y, c_f);
  };
  return env;
}

namespace detail {

BoundEnvelope envelope_x_general_mode(const ConstantsTable& c, double eps, const InitNorms& init,
                                      const Wbars& wbars, KernelMode mode) {
  if (init.x_gap < 0.0 || init.y0 < 0.0 || init.fred0 < 0.0)
    throw std::invalid_argument("envelope_x_general: initial norms must be nonnegative");
  const LemmaYConstants ly = lemma_y_constants(c, eps, wbars.wx, wbars.wz);
  const DeltaSet d = delta_set(c);
  const double c_f = c.c_f, c_y = ly.c_y;
  const double d_over_cy = ly.delta / c_y;
  const double ky = (c.l_gx / c.c_g) * init.fred0 - ly.delta_y;
  const double asym = (d.dx2 + d.dx3 * wbars.wz + d.dx4 * wbars.wx + eps * d.dx1) / c_y;
  const double l_fz = c.l_fz;
  const double gap = init.x_gap, y0 = init.y0;

  BoundEnvelope env;
  env.case_tag = classify(c_f, c_y);
  env.asymptote = asym;
  env.eval = [=](double t) {
    return std::exp(-c_f * t) * gap + asym * -std::expm1(-c_f * t) +
           l_fz * (y0 - d_over_cy) * conv_exp(t, c_f, c_y, mode) +
           l_fz * ky * conv_exp_aba(t, c_f, c_y, mode);
  };
  return env;
}

std::pair<BoundEnvelope, BoundEnvelope> envelope_autonomous_mode(const ConstantsTable& c,
                                                                 double eps, double y0_norm,
                                                                 double f0_norm, KernelMode mode) {
  if (y0_norm < 0.0 || f0_norm < 0.0)
    throw std::invalid_argument("envelope_autonomous: initial norms must be nonnegative");
  c.require_contractive("envelope_autonomous");
  const double eps_star = epsilon_star_general(c);
  if (!(eps > 0.0) || !(eps < eps_star))
    throw std::invalid_argument("envelope_autonomous: eps must lie in (0, " +
                                std::to_string(eps_star) + ")");
  const double c_f = c.c_f;
  const double c_y = c.c_g / eps - c.l_gx * c.l_fz / c.c_g;
  const double coupling = c.l_gx / c.c_g;
  const double l_fz = c.l_fz;
  const CaseTag tag = classify(c_f, c_y);

  BoundEnvelope gx;
  gx.case_tag = tag;
  gx.asymptote = 0.0;
  gx.eval = [=](double t) {
    return l_fz * y0_norm * conv_exp(t, c_f, c_y, mode) +
           l_fz * coupling * f0_norm * conv_exp_aba(t, c_f, c_y, mode);
  };

  BoundEnvelope gz;
  gz.case_tag = tag;
  gz.asymptote = 0.0;
  gz.eval = [=, gx_eval = gx.eval](double t) {
    return std::exp(-c_y * t) * y0_norm + coupling * f0_norm * conv_exp(t, c_y, c_f, mode) +
           coupling * gx_eval(t);
  };
  return {gx, gz};
}

}  // namespace detail

BoundEnvelope envelope_x_general(const ConstantsTable& c, double eps, const InitNorms& init,
                                 const Wbars& wbars) {
  return detail::envelope_x_general_mode(c, eps, init, wbars, KernelMode::stable);
}

BoundEnvelope envelope_z_general(const ConstantsTable& c, double eps, const InitNorms& init,
                                 const Wbars& wbars) {
  const BoundEnvelope env_y = envelope_y(c, eps, init.y0, init.fred0, wbars);
  const BoundEnvelope env_x = envelope_x_general(c, eps, init, wbars);
  const LemmaYConstants ly = lemma_y_constants(c, eps, wbars.wx, wbars.wz);
  const DeltaSet d = delta_set(c);
  const double c_y = ly.c_y;
  const double asym = (d.dz2 + d.dz3 * wbars.wz + d.dz4 * wbars.wx + eps * d.dz1) / c_y;
  const double coupling = c.l_gx / c.c_g;
  const double y_asym = env_y.asymptote, x_asym = env_x.asymptote;

  BoundEnvelope env;
  env.case_tag = env_x.case_tag;
  env.asymptote = asym;
  env.eval = [=, y_eval = env_y.eval, x_eval = env_x.eval](double t) {
    return asym + (y_eval(t) - y_asym) + coupling * (x_eval(t) - x_asym);
  };
  return env;
}

std::pair<BoundEnvelope, BoundEnvelope> envelope_autonomous(const ConstantsTable& c, double eps,
                                                            double y0_norm, double f0_norm) {
  return detail::envelope_autonomous_mode(c, eps, y0_norm, f0_norm, KernelMode::stable);
}

BoundReport verify_bound(const std::vector<double>& times, const std::vector<double>& measured,
                         const BoundEnvelope& envelope, double slack) {
  if (times.size() != measured.size())
    throw std::invalid_argument("verify_bound: time grid and measurement length mismatch");
  if (times.empty()) throw std::invalid_argument("verify_bound: empty grid");
  BoundReport rep;
  rep.margins.resize(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double env = envelope.eval(times[k]);
    const double margin = env * (1.0 + slack) - measured[k];
    rep.margins[k] = margin;
    if (margin < rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_time = times[k];
    }
    double ratio;
    if (env > 0.0)
      ratio = measured[k] / env;
    else
      ratio = measured[k] <= 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    rep.worst_ratio = std::max(rep.worst_ratio, ratio);
    if (margin < 0.0) rep.pass = false;
  }
  return rep;
}

}  // namespace slowfast
