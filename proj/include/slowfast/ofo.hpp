#pragma once

#include "slowfast/bounds.hpp"
#include "slowfast/sysmodel.hpp"
#include "slowfast/types.hpp"

namespace slowfast {

// Closed loop of an LTI plant eps dz/dt = Az + Bu + Ew_z with the
// gradient-flow controller du/dt = -grad_phi(u) - G^T grad_psi(z).
struct OfoProblem {
  Mat A, B, E;
  std::function<Vec(const Vec&)> grad_phi;
  double nu = 0.0;     // strong convexity of phi
  double l_phi = 0.0;  // smoothness of phi
  std::function<Vec(const Vec&)> grad_psi;
  double l_psi = 0.0;  // smoothness of psi (psi convex)
  DisturbanceSignal w_z = DisturbanceSignal::zero(1);
  double epsilon = 0.1;

  int n_u() const { return static_cast<int>(B.cols()); }
  int n_z() const { return static_cast<int>(A.rows()); }
  void validate() const;
};

struct OfoDerived {
  Mat G;       // -A^{-1} B
  Mat H;       // -A^{-1} E
  double ell;  // l_phi + ||G||^2 l_psi, smoothness of the composite cost
};

OfoDerived derive(const OfoProblem& p);

// Steady state z_eq(u, w) = G u + H w via linear solves against A.
Vec steady_state(const OfoProblem& p, const Vec& u, const Vec& w);

// The closed loop in standard two-time scale form (slow state u, fast z).
TwoTimeScaleSystem closed_loop(const OfoProblem& p);

// u*(w): minimizer of phi(u) + psi(G u + H w), by gradient descent with
// step 1/ell.
Vec optimizer(const OfoProblem& p, const Vec& w, double tol);

// Constants of the closed loop: c_f = nu, c_g = -mu2(A), l_gx = ||B||,
// l_gw = ||E||, l_feps = l_psi ||G||, l_f_wz = ||G|| l_psi ||H||,
// l_fz = ||G^T|| l_psi, and l_ft = l_fw = l_geps = 0.
ConstantsTable ofo_constants(const OfoProblem& p);

// -mu(A) / (||A^{-1} B G^T|| l_psi); +infinity when the denominator vanishes.
double epsilon_star_ofo(const OfoProblem& p);

struct TrackingBounds {
  double u_bound = 0.0;  // asymptotic bound on ||u - u*(w_z)||
  double z_bound = 0.0;  // asymptotic bound on ||z - z_eq(u*, w_z)||
};

TrackingBounds tracking_bounds(const OfoProblem& p);

// Reconstructed transient envelopes for ||u - u*|| and ||z - z_eq(u*, w_z)||,
// built from the general-theorem envelopes plus the reduced-flow decay.
// These are derived envelopes, not closed forms from the tracking theorem.
struct DerivedTrackingEnvelopes {
  BoundEnvelope u_envelope;
  BoundEnvelope z_envelope;
};

DerivedTrackingEnvelopes derived_tracking_envelopes(const OfoProblem& p, const Vec& u0,
                                                    const Vec& z0, double optimizer_tol = 1e-10);

// phi(u) = 0.5 (u - center)^T Q (u - center) packaged gradient with its
// strong-convexity and smoothness parameters.
struct QuadraticCost {
  std::function<Vec(const Vec&)> grad;
  double strong_convexity = 0.0;
  double smoothness = 0.0;
};

QuadraticCost make_quadratic_cost(const Mat& q, const Vec& center);

}  // namespace slowfast
