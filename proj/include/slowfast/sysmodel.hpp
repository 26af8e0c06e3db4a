#pragma once

#include "slowfast/integrator.hpp"
#include "slowfast/specnorm.hpp"
#include "slowfast/types.hpp"

#include <array>
#include <cstdint>
#include <optional>

namespace slowfast {

// Time-varying disturbance built from smooth primitives, so the exact
// derivative and an exact ess-sup bound on its norm are always available.
class DisturbanceSignal {
 public:
  static DisturbanceSignal zero(int dim);
  static DisturbanceSignal constant(Vec value);
  // value_i(t) = amplitude_i * sin(omega t + phase)
  static DisturbanceSignal sinusoid(Vec amplitude, double omega, double phase = 0.0);
  static DisturbanceSignal ramp(Vec rate);
  // amplitude * s((t - t0)/width) with the cubic smoothstep s on [0, 1].
  static DisturbanceSignal smooth_step(Vec amplitude, double t0, double width);
  static DisturbanceSignal sum(const DisturbanceSignal& a, const DisturbanceSignal& b);

  int dimension() const { return dim_; }
  Vec value(double t) const { return value_(t); }
  Vec derivative(double t) const { return derivative_(t); }
  // ess-sup_t ||dw/dt||_2 (exact for primitives, triangle bound for sums).
  double derivative_bound() const { return derivative_bound_; }

 private:
  DisturbanceSignal(int dim, std::function<Vec(double)> v, std::function<Vec(double)> d,
                    double bound)
      : dim_(dim), value_(std::move(v)), derivative_(std::move(d)), derivative_bound_(bound) {}
  int dim_;
  std::function<Vec(double)> value_;
  std::function<Vec(double)> derivative_;
  double derivative_bound_;
};

// dx/dt = f(t, x, z, w_x, eps),  eps dz/dt = g(x, z, w_z, eps).
struct TwoTimeScaleSystem {
  std::function<Vec(double t, const Vec& x, const Vec& z, const Vec& w_x, double eps)> f;
  std::function<Vec(const Vec& x, const Vec& z, const Vec& w_z, double eps)> g;
  int n_x = 0;
  int n_z = 0;
  NormKind x_norm = NormKind::l2();
  NormKind z_norm = NormKind::l2();
  DisturbanceSignal w_x_sig = DisturbanceSignal::zero(1);
  DisturbanceSignal w_z_sig = DisturbanceSignal::zero(1);
  double epsilon = 1.0;

  void validate() const;
};

enum class Provenance { supplied, estimated };

// Contraction and Lipschitz constants of the two-time scale system.
struct ConstantsTable {
  double c_f = 0, c_g = 0;
  double l_fx = 0, l_fz = 0, l_ft = 0, l_fw = 0, l_feps = 0;
  double l_gx = 0, l_gw = 0, l_geps = 0;
  double l_zstar_w = 0;  // recorded but consumed by no bound evaluator
  double l_f_wz = 0;     // Lipschitz constant of the reduced field in w_z

  static constexpr int field_count = 12;
  std::array<Provenance, field_count> provenance{};

  static const char* field_name(int i);
  double field(int i) const;
  void set_all_provenance(Provenance p) { provenance.fill(p); }

  // Strict positivity required by the contractivity assumptions.
  void require_contractive(const char* who) const;
};

// Solve g(x, z, w_z, eps) = 0 for z: damped Newton with finite-difference
// Jacobian, falling back to integrating the contractive flow dz/dtau = g.
Vec quasi_steady_state(const TwoTimeScaleSystem& system, const Vec& x, const Vec& w_z, double eps,
                       double tol, std::optional<Vec> z_guess = std::nullopt);

struct ReducedModel {
  std::function<Vec(double t, const Vec& x_r, const Vec& w_x, const Vec& w_z)> rhs;
  int dim = 0;
};

// f_red(t, x_r, w_x, w_z) = f(t, x_r, z*(x_r, w_z), w_x, 0), with x_r(0) = x(0)
// as the initial-condition convention.
ReducedModel reduced_model(const TwoTimeScaleSystem& system, double qss_tol = 1e-12);

struct BoundaryLayerSystem {
  std::function<Vec(double tau, const Vec& y_bl)> rhs;
  int dim = 0;
};

// dy_bl/dtau = g(x, y_bl + z*(x, w_z), w_z, 0) with x and w_z frozen.
BoundaryLayerSystem boundary_layer(const TwoTimeScaleSystem& system, const Vec& x_frozen,
                                   const Vec& w_z_frozen, double qss_tol = 1e-12);

// The system in the deviation variable y = z - z*(x, w_z):
//   dx/dt   = f(t, x, y + z*, w_x, eps)
//   eps dy/dt = g(x, y + z*, w_z, eps)
//               - eps [ (dz*/dx) f(t, x, y + z*, w_x, eps) + (dz*/dw_z) dw_z/dt ]
// with the partial derivatives of z* taken by central finite differences.
struct ShiftedSystem {
  std::function<Vec(double t, const Vec& x, const Vec& y)> x_dot;
  std::function<Vec(double t, const Vec& x, const Vec& y)> y_dot;
  std::function<Vec(double t, const Vec& x)> z_star;  // z*(x, w_z(t))
  int n_x = 0;
  int n_z = 0;
};

ShiftedSystem shifted_system(const TwoTimeScaleSystem& system, double qss_tol = 1e-12);

struct SamplingBox {
  Vec x_lo, x_hi;
  Vec z_lo, z_hi;
  Vec wx_lo, wx_hi;
  Vec wz_lo, wz_hi;
  double t_max = 1.0;
  double eps_max = 1.0;
  int count = 200;
  std::uint64_t seed = 1;
};

// Sampled lower-bound estimates of every Table entry; provenance "estimated".
ConstantsTable estimate_constants(const TwoTimeScaleSystem& system, const SamplingBox& box);

// Right-hand sides ready for integrate(). The full system stacks (x, z) and
// caps the step at fast_step_cap * epsilon / c_g_estimate.
OdeFunction full_ode(const TwoTimeScaleSystem& system, const IntegrationConfig& config);
OdeFunction reduced_ode(const TwoTimeScaleSystem& system, const ReducedModel& red);
OdeFunction boundary_layer_ode(const BoundaryLayerSystem& bl);
OdeFunction shifted_ode(const ShiftedSystem& shifted, const TwoTimeScaleSystem& system,
                        const IntegrationConfig& config);

}  // namespace slowfast
