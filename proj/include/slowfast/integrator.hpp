#pragma once

#include "slowfast/types.hpp"

#include <limits>
#include <vector>

namespace slowfast {

struct IntegrationConfig {
  double t_end = 1.0;
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();
  // For the full two-time scale system the step is additionally capped at
  // fast_step_cap * epsilon / c_g_estimate.
  double fast_step_cap = 0.1;
  double c_g_estimate = 1.0;

  void validate() const;
};

struct StepStats {
  long accepted = 0;
  long rejected = 0;
  double max_error_estimate = 0.0;  // largest accepted scaled local error
};

struct Trajectory {
  std::vector<double> times;
  Mat states;  // row k holds the state at times[k]
  StepStats stats;

  Vec at(std::size_t k) const { return states.row(static_cast<Eigen::Index>(k)).transpose(); }
};

struct OdeFunction {
  std::function<Vec(double t, const Vec& y)> rhs;
  int dim = 0;
  double step_cap = std::numeric_limits<double>::infinity();
};

// Adaptive Dormand-Prince 5(4) with cubic Hermite dense output on the given
// output grid (strictly increasing, grid.back() <= config.t_end).
Trajectory integrate(const OdeFunction& ode, const Vec& y0, const IntegrationConfig& config,
                     const std::vector<double>& grid);

// Matrix exponential by scaling and squaring with a [13/13] Pade approximant.
Mat expm(const Mat& m);

// exp(M t_k) x0 on the grid; the reference oracle for every LTI check.
Trajectory integrate_lti_exact(const Mat& m, const Vec& x0, const std::vector<double>& grid);

std::vector<double> uniform_grid(double t_end, int points);

}  // namespace slowfast
