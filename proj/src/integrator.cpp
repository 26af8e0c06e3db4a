#include "slowfast/integrator.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <map>

namespace slowfast {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// 4th order embedded weights.
constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                 e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;

void check_finite(const Vec& y, double t) {
  if (!y.allFinite())
    throw NumericalError("integrate: non-finite state at t = " + std::to_string(t));
}

Vec hermite(double t, double t0, double t1, const Vec& y0, const Vec& y1, const Vec& f0,
            const Vec& f1) {
  const double h = t1 - t0;
  const double s = (t - t0) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return h00 * y0 + (h10 * h) * f0 + h01 * y1 + (h11 * h) * f1;
}

}  // namespace

void IntegrationConfig::validate() const {
  if (!(t_end > 0.0)) throw std::invalid_argument("IntegrationConfig: t_end must be positive");
  if (!(rel_tol > 0.0 && rel_tol < 1.0) || !(abs_tol > 0.0 && abs_tol < 1.0))
    throw std::invalid_argument("IntegrationConfig: tolerances must lie in (0, 1)");
  if (!(max_step > 0.0)) throw std::invalid_argument("IntegrationConfig: max_step must be positive");
  if (!(fast_step_cap > 0.0))
    throw std::invalid_argument("IntegrationConfig: fast_step_cap must be positive");
}

Trajectory integrate(const OdeFunction& ode, const Vec& y0, const IntegrationConfig& config,
                     const std::vector<double>& grid) {
  config.validate();
  if (!ode.rhs) throw std::invalid_argument("integrate: missing right-hand side");
  if (y0.size() != ode.dim)
    throw std::invalid_argument("integrate: initial state dimension mismatch");
  if (grid.empty()) throw std::invalid_argument("integrate: empty output grid");
  for (std::size_t k = 0; k + 1 < grid.size(); ++k)
    if (!(grid[k] < grid[k + 1]))
      throw std::invalid_argument("integrate: output grid must be strictly increasing");
  if (grid.front() < 0.0 || grid.back() > config.t_end * (1.0 + 1e-12))
    throw std::invalid_argument("integrate: output grid must lie in [0, t_end]");

  Trajectory out;
  out.times = grid;
  out.states.resize(static_cast<Eigen::Index>(grid.size()), ode.dim);

  const double t_final = grid.back();
  const double h_cap = std::min(config.max_step, ode.step_cap);

  double t = 0.0;
  Vec y = y0;
  check_finite(y, t);
  Vec f0 = ode.rhs(t, y);
  check_finite(f0, t);

  std::size_t next_out = 0;
  if (grid.front() == 0.0) {
    out.states.row(0) = y.transpose();
    next_out = 1;
  }

  double h = std::min({h_cap, t_final / 100.0, 1e-2});
  if (!(h > 0.0)) h = std::min(h_cap, 1e-6);
  const double h_min = std::max(1e-14 * std::max(t_final, 1.0), 1e-300);

  Vec k2v, k3v, k4v, k5v, k6v, k7v, y1, yerr;
  while (next_out < grid.size() && t < t_final) {
    h = std::min({h, h_cap, t_final - t});
    if (h < h_min)
      throw NumericalError(
          "integrate: step size underflow (stiffness beyond the explicit method); "
          "reduce t_end or increase epsilon");

    k2v = ode.rhs(t + c2 * h, y + h * (a21 * f0));
    k3v = ode.rhs(t + c3 * h, y + h * (a31 * f0 + a32 * k2v));
    k4v = ode.rhs(t + c4 * h, y + h * (a41 * f0 + a42 * k2v + a43 * k3v));
    k5v = ode.rhs(t + c5 * h, y + h * (a51 * f0 + a52 * k2v + a53 * k3v + a54 * k4v));
    k6v = ode.rhs(t + h, y + h * (a61 * f0 + a62 * k2v + a63 * k3v + a64 * k4v + a65 * k5v));
    y1 = y + h * (b1 * f0 + b3 * k3v + b4 * k4v + b5 * k5v + b6 * k6v);
    k7v = ode.rhs(t + h, y1);  // FSAL stage
    yerr = y1 - (y + h * (e1 * f0 + e3 * k3v + e4 * k4v + e5 * k5v + e6 * k6v + e7 * k7v));

    if (!y1.allFinite() || !yerr.allFinite()) {
      out.stats.rejected++;
      h *= 0.25;
      continue;
    }

    double err = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      double sc = config.abs_tol + config.rel_tol * std::max(std::abs(y(i)), std::abs(y1(i)));
      double e = yerr(i) / sc;
      err += e * e;
    }
    err = std::sqrt(err / static_cast<double>(y.size()));

    if (err <= 1.0) {
      double t1 = t + h;
      while (next_out < grid.size() && grid[next_out] <= t1 + 1e-14 * std::max(1.0, t1)) {
        double tq = std::min(grid[next_out], t1);
        out.states.row(static_cast<Eigen::Index>(next_out)) =
            hermite(tq, t, t1, y, y1, f0, k7v).transpose();
        ++next_out;
      }
      t = t1;
      y.swap(y1);
      f0.swap(k7v);
      out.stats.accepted++;
      out.stats.max_error_estimate = std::max(out.stats.max_error_estimate, err);
      double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
      h *= std::clamp(fac, 0.2, 5.0);
    } else {
      out.stats.rejected++;
      double fac = 0.9 * std::pow(err, -0.2);
      h *= std::clamp(fac, 0.1, 0.9);
    }
  }
  // roundoff can leave the final grid point one ulp past the last accepted t
  while (next_out < grid.size() &&
         grid[next_out] <= t + 1e-12 * std::max(1.0, std::abs(t))) {
    out.states.row(static_cast<Eigen::Index>(next_out)) = y.transpose();
    ++next_out;
  }
  if (next_out != grid.size()) throw NumericalError("integrate: output grid not fully covered");
  return out;
}

Mat expm(const Mat& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("expm: matrix must be square");
  const Eigen::Index n = m.rows();
  if (n == 0) return m;
  if (!m.allFinite()) throw NumericalError("expm: non-finite input");

  const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
  if (norm1 > 1e12) throw NumericalError("expm: matrix norm too large");
  // theta_13 for the [13/13] Pade approximant
  const double theta = 5.371920351148152;
  int squarings = 0;
  Mat a = m;
  if (norm1 > theta) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta)));
    a /= std::pow(2.0, squarings);
  }

  static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                             1187353796428800.0,  129060195264000.0,   10559470521600.0,
                             670442572800.0,      33522128640.0,       1323241920.0,
                             40840800.0,          960960.0,            16380.0,
                             182.0,               1.0};
  const Mat ident = Mat::Identity(n, n);
  const Mat a2 = a * a;
  const Mat a4 = a2 * a2;
  const Mat a6 = a4 * a2;
  Mat u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 +
               b[1] * ident);
  Mat v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 +
          b[0] * ident;
  Mat r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) r = r * r;
  if (!r.allFinite()) throw NumericalError("expm: overflow in result");
  return r;
}

Trajectory integrate_lti_exact(const Mat& m, const Vec& x0, const std::vector<double>& grid) {
  if (m.rows() != m.cols()) throw std::invalid_argument("integrate_lti_exact: matrix must be square");
  if (x0.size() != m.rows())
    throw std::invalid_argument("integrate_lti_exact: state dimension mismatch");
  if (grid.empty()) throw std::invalid_argument("integrate_lti_exact: empty grid");
  for (std::size_t k = 0; k + 1 < grid.size(); ++k)
    if (!(grid[k] < grid[k + 1]))
      throw std::invalid_argument("integrate_lti_exact: grid must be strictly increasing");

  Trajectory out;
  out.times = grid;
  out.states.resize(static_cast<Eigen::Index>(grid.size()), m.rows());

  std::map<double, Mat> propagators;  // step length -> exp(M dt)
  Vec x = x0;
  double t = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double dt = grid[k] - t;
    if (dt > 0.0) {
      auto it = propagators.find(dt);
      if (it == propagators.end()) it = propagators.emplace(dt, expm(m * dt)).first;
      x = it->second * x;
      t = grid[k];
    }
    out.states.row(static_cast<Eigen::Index>(k)) = x.transpose();
  }
  out.stats.accepted = static_cast<long>(grid.size());
  return out;
}

std::vector<double> uniform_grid(double t_end, int points) {
  if (!(t_end > 0.0) || points < 2)
    throw std::invalid_argument("uniform_grid: need t_end > 0 and at least two points");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k)
    g[static_cast<std::size_t>(k)] = t_end * static_cast<double>(k) / (points - 1);
  return g;
}

}  // namespace slowfast
