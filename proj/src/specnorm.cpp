#include "slowfast/specnorm.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <random>

namespace slowfast {

namespace {

double sigma_max(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Mat>(m).singularValues()(0);
}

double max_abs_col_sum(const Mat& m) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) best = std::max(best, m.col(j).cwiseAbs().sum());
  return best;
}

double max_abs_row_sum(const Mat& m) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) best = std::max(best, m.row(i).cwiseAbs().sum());
  return best;
}

void require_square(const Mat& a, const char* who) {
  if (a.rows() != a.cols())
    throw std::invalid_argument(std::string(who) + ": matrix must be square, got " +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
}

void require_dim(const NormKind& kind, Eigen::Index n, const char* who) {
  if (kind.is_weighted() && kind.dim() != n)
    throw std::invalid_argument(std::string(who) + ": weighted norm dimension " +
                                std::to_string(kind.dim()) + " does not match operand dimension " +
                                std::to_string(n));
}

// Dual-norm subgradient s of ||u||_to at u, so that s^T F is an ascent
// direction for v -> ||F v||_to.
Vec dual_vector(const Vec& u, const NormKind& to) {
  switch (to.tag()) {
    case NormTag::L1:
      return u.unaryExpr([](double x) { return x >= 0.0 ? 1.0 : -1.0; });
    case NormTag::Linf: {
      Eigen::Index i;
      u.cwiseAbs().maxCoeff(&i);
      Vec s = Vec::Zero(u.size());
      s(i) = u(i) >= 0.0 ? 1.0 : -1.0;
      return s;
    }
    case NormTag::L2: {
      double n = u.norm();
      return n > 0.0 ? Vec(u / n) : Vec(Vec::Zero(u.size()));
    }
    case NormTag::WeightedL2: {
      Vec ru = to.weight() * u;
      double n = ru.norm();
      if (n == 0.0) return Vec::Zero(u.size());
      return to.weight().transpose() * ru / n;
    }
  }
  return Vec::Zero(u.size());
}

}  // namespace

NormKind NormKind::weighted_l2(Mat weight) {
  if (weight.rows() != weight.cols())
    throw std::invalid_argument("weighted_l2: weight matrix must be square");
  Eigen::JacobiSVD<Mat> svd(weight, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 0.0 || sv(0) / sv(sv.size() - 1) > 1e14)
    throw std::invalid_argument("weighted_l2: weight matrix is singular or too ill-conditioned");
  NormKind k(NormTag::WeightedL2);
  k.weight_inv_ = svd.solve(Mat::Identity(weight.rows(), weight.cols()));
  k.weight_ = std::move(weight);
  return k;
}

const Mat& NormKind::weight() const {
  if (!is_weighted()) throw std::logic_error("NormKind::weight: not a weighted norm");
  return weight_;
}

const Mat& NormKind::weight_inverse() const {
  if (!is_weighted()) throw std::logic_error("NormKind::weight_inverse: not a weighted norm");
  return weight_inv_;
}

std::string NormKind::name() const {
  switch (tag_) {
    case NormTag::L1: return "l1";
    case NormTag::L2: return "l2";
    case NormTag::Linf: return "linf";
    case NormTag::WeightedL2: return "weighted-l2";
  }
  return "?";
}

CompositeWeight::CompositeWeight(double n1_, double n2_) : n1(n1_), n2(n2_) {
  if (!(n1 > 0.0) || !(n2 > 0.0))
    throw std::invalid_argument("CompositeWeight: weights must be strictly positive");
}

double vector_norm(const Vec& v, const NormKind& kind) {
  require_dim(kind, v.size(), "vector_norm");
  switch (kind.tag()) {
    case NormTag::L1: return v.lpNorm<1>();
    case NormTag::L2: return v.norm();
    case NormTag::Linf: return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
    case NormTag::WeightedL2: return (kind.weight() * v).norm();
  }
  return 0.0;
}

double matrix_norm(const Mat& m, const NormKind& kind) {
  require_square(m, "matrix_norm");
  require_dim(kind, m.rows(), "matrix_norm");
  switch (kind.tag()) {
    case NormTag::L1: return max_abs_col_sum(m);
    case NormTag::L2: return sigma_max(m);
    case NormTag::Linf: return max_abs_row_sum(m);
    case NormTag::WeightedL2: return sigma_max(kind.weight() * m * kind.weight_inverse());
  }
  return 0.0;
}

double log_norm(const Mat& a, const NormKind& kind) {
  require_square(a, "log_norm");
  require_dim(kind, a.rows(), "log_norm");
  switch (kind.tag()) {
    case NormTag::L2: {
      Mat sym = 0.5 * (a + a.transpose());
      Eigen::SelfAdjointEigenSolver<Mat> es(sym);
      if (es.info() != Eigen::Success) throw NumericalError("log_norm: eigen solver failed");
      return es.eigenvalues().maxCoeff();
    }
    case NormTag::L1: {
      double best = -std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < a.cols(); ++j) {
        double s = a(j, j);
        for (Eigen::Index i = 0; i < a.rows(); ++i)
          if (i != j) s += std::abs(a(i, j));
        best = std::max(best, s);
      }
      return best;
    }
    case NormTag::Linf: {
      double best = -std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        double s = a(i, i);
        for (Eigen::Index j = 0; j < a.cols(); ++j)
          if (j != i) s += std::abs(a(i, j));
        best = std::max(best, s);
      }
      return best;
    }
    case NormTag::WeightedL2:
      return log_norm(kind.weight() * a * kind.weight_inverse(), NormKind::l2());
  }
  return 0.0;
}

double log_norm_finite_difference(const Mat& a, const NormKind& kind, double h) {
  require_square(a, "log_norm_finite_difference");
  if (!(h > 0.0)) throw std::invalid_argument("log_norm_finite_difference: h must be positive");
  Mat m = Mat::Identity(a.rows(), a.cols()) + h * a;
  return (matrix_norm(m, kind) - 1.0) / h;
}

InducedNormResult induced_norm(const Mat& f, const NormKind& from, const NormKind& to) {
  require_dim(from, f.cols(), "induced_norm(from)");
  require_dim(to, f.rows(), "induced_norm(to)");
  if (f.size() == 0) return {0.0, false};

  // From l1 the maximum is attained at a signed basis vector.
  if (from.tag() == NormTag::L1) {
    double best = 0.0;
    for (Eigen::Index j = 0; j < f.cols(); ++j) best = std::max(best, vector_norm(f.col(j), to));
    return {best, false};
  }
  // Euclidean-type source: substitute v = R^{-1} u with ||u||_2 = 1.
  if (from.tag() == NormTag::L2 || from.tag() == NormTag::WeightedL2) {
    Mat m = from.is_weighted() ? Mat(f * from.weight_inverse()) : f;
    if (to.tag() == NormTag::L2) return {sigma_max(m), false};
    if (to.tag() == NormTag::WeightedL2) return {sigma_max(to.weight() * m), false};
    if (to.tag() == NormTag::Linf) {
      double best = 0.0;
      for (Eigen::Index i = 0; i < m.rows(); ++i) best = std::max(best, m.row(i).norm());
      return {best, false};
    }
  }
  if (from.tag() == NormTag::Linf && to.tag() == NormTag::Linf)
    return {max_abs_row_sum(f), false};

  // No closed form: deterministic sampled maximization plus projected
  // subgradient ascent. 4096 fixed pseudo-random directions, 20 refinements.
  std::mt19937_64 rng(0x5eed5eedULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n = static_cast<int>(f.cols());
  auto normalize_from = [&](Vec v) {
    double nv = vector_norm(v, from);
    if (nv <= 0.0) {
      v = Vec::Zero(n);
      v(0) = 1.0;
      nv = vector_norm(v, from);
    }
    return Vec(v / nv);
  };
  double best = 0.0;
  Vec best_v = Vec::Zero(n);
  for (int s = 0; s < 4096; ++s) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = gauss(rng);
    v = normalize_from(v);
    double val = vector_norm(f * v, to);
    if (val > best) {
      best = val;
      best_v = v;
    }
  }
  Vec v = best_v;
  for (int it = 1; it <= 20; ++it) {
    Vec grad = f.transpose() * dual_vector(f * v, to);
    double step = 0.5 / it;
    Vec cand = normalize_from(v + step * grad);
    double val = vector_norm(f * cand, to);
    if (val >= best) {
      best = val;
      v = cand;
    }
    if (from.tag() == NormTag::Linf) {
      // the maximum over the infinity ball is attained at a sign vertex
      Vec vertex = v.unaryExpr([](double x) { return x >= 0.0 ? 1.0 : -1.0; });
      double vval = vector_norm(f * vertex, to);
      if (vval > best) {
        best = vval;
        v = vertex;
      }
    }
  }
  return {best, true};
}

double spectral_abscissa(const Mat& a) {
  require_square(a, "spectral_abscissa");
  if (a.size() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<Mat> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw NumericalError("spectral_abscissa: eigen solver failed");
  return es.eigenvalues().real().maxCoeff();
}

CompositeWeight perron_weights(const Mat& g) {
  require_square(g, "perron_weights");
  if (g.rows() != 2) throw std::invalid_argument("perron_weights: expects a 2x2 matrix");
  const double g12 = g(0, 1), g21 = g(1, 0);
  if (g12 < 0.0 || g21 < 0.0) throw std::invalid_argument("perron_weights: matrix is not Metzler");
  if (g12 == 0.0 || g21 == 0.0)
    throw std::invalid_argument("perron_weights: matrix is reducible (zero off-diagonal)");
  const double tr = g(0, 0) + g(1, 1);
  const double disc = (g(0, 0) - g(1, 1)) * (g(0, 0) - g(1, 1)) + 4.0 * g12 * g21;
  const double lam = 0.5 * (tr + std::sqrt(disc));  // dominant (Perron) eigenvalue
  if (!(lam < 0.0)) throw std::invalid_argument("perron_weights: matrix is not Hurwitz");
  Vec v(2), w(2);
  v << g12, lam - g(0, 0);
  w << g21, lam - g(0, 0);
  if (!(v(1) > 0.0))
    throw NumericalError("perron_weights: degenerate eigenvector");
  double n1 = std::sqrt(w(0) / v(0));
  double n2 = std::sqrt(w(1) / v(1));  // = 1 by construction
  return CompositeWeight(n1 / n2, 1.0);
}

double composite_norm(double x_norm, double z_norm, const CompositeWeight& n) {
  if (x_norm < 0.0 || z_norm < 0.0)
    throw std::invalid_argument("composite_norm: subsystem norms must be nonnegative");
  return std::sqrt(n.n1 * x_norm * x_norm + n.n2 * z_norm * z_norm);
}

}  // namespace slowfast
