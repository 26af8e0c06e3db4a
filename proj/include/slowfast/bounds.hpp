#pragma once

#include "slowfast/sysmodel.hpp"
#include "slowfast/types.hpp"

#include <utility>
#include <vector>

namespace slowfast {

// The eight delta constants of the closeness-of-solutions theorem.
struct DeltaSet {
  double dx1 = 0, dx2 = 0, dx3 = 0, dx4 = 0;
  double dz1 = 0, dz2 = 0, dz3 = 0, dz4 = 0;
};

// c_g^2 / (l_gx * l_fz), the admissible range for the time-scale parameter.
double epsilon_star_general(const ConstantsTable& c);

DeltaSet delta_set(const ConstantsTable& c);

struct LemmaYConstants {
  double c_y = 0;      // c_g/eps - (l_gx/c_g) l_fz
  double delta_y = 0;
  double delta = 0;
};

struct Wbars {
  double wx = 0.0;
  double wz = 0.0;
};

LemmaYConstants lemma_y_constants(const ConstantsTable& c, double eps, double wbar_x,
                                  double wbar_z);

enum class CaseTag { distinct, equal };  // c_f != c_y vs c_f == c_y

struct BoundEnvelope {
  std::function<double(double)> eval;
  double asymptote = 0.0;
  CaseTag case_tag = CaseTag::distinct;

  double operator()(double t) const { return eval(t); }
};

struct InitNorms {
  double x_gap = 0.0;  // ||x(0) - x_r(0)||_x, zero under the usual convention
  double y0 = 0.0;     // ||z(0) - z*(x(0), w_z(0))||_z
  double fred0 = 0.0;  // ||f_red(0, x(0), w_x(0), w_z(0))||_x
};

// Transient bound on ||y(t)||_z: e^{-c_y t} y0 + delta/c_y + E_y(t, eps).
BoundEnvelope envelope_y(const ConstantsTable& c, double eps, double y0_norm, double fred0_norm,
                         const Wbars& wbars);

// Full right-hand side of the ||x - x_r|| bound; asymptote is the
// eps-proportional leading part.
BoundEnvelope envelope_x_general(const ConstantsTable& c, double eps, const InitNorms& init,
                                 const Wbars& wbars);

BoundEnvelope envelope_z_general(const ConstantsTable& c, double eps, const InitNorms& init,
                                 const Wbars& wbars);

// G_x and G_z for the autonomous specialization; both tend to zero.
std::pair<BoundEnvelope, BoundEnvelope> envelope_autonomous(const ConstantsTable& c, double eps,
                                                            double y0_norm, double f0_norm);

struct BoundReport {
  bool pass = true;
  double worst_margin = std::numeric_limits<double>::infinity();
  double worst_time = 0.0;
  double worst_ratio = 0.0;  // max measured/envelope over the grid
  std::vector<double> margins;
};

// Margins envelope(t)*(1+slack) - measured(t) on a shared grid.
BoundReport verify_bound(const std::vector<double>& times, const std::vector<double>& measured,
                         const BoundEnvelope& envelope, double slack);

namespace detail {

enum class KernelMode { stable, case_distinct, case_equal };

// k1(t; a, b) = int_0^t e^{-a(t-s)} e^{-b s} ds  (symmetric in a, b).
double conv_exp(double t, double a, double b, KernelMode mode = KernelMode::stable);

// k2(t; a, b) = int_0^t e^{-a(t-s)} k1(s; b, a) ds.
double conv_exp_aba(double t, double a, double b, KernelMode mode = KernelMode::stable);

BoundEnvelope envelope_x_general_mode(const ConstantsTable& c, double eps, const InitNorms& init,
                                      const Wbars& wbars, KernelMode mode);

std::pair<BoundEnvelope, BoundEnvelope> envelope_autonomous_mode(const ConstantsTable& c,
                                                                 double eps, double y0_norm,
                                                                 double f0_norm, KernelMode mode);

}  // namespace detail

}  // namespace slowfast
