#pragma once

#include "slowfast/types.hpp"

namespace slowfast {

enum class NormTag { L1, L2, Linf, WeightedL2 };

// A norm selection for a finite-dimensional space. The weighted variant
// carries an invertible weight matrix R and means ||v||_R = ||R v||_2.
class NormKind {
 public:
  static NormKind l1() { return NormKind(NormTag::L1); }
  static NormKind l2() { return NormKind(NormTag::L2); }
  static NormKind linf() { return NormKind(NormTag::Linf); }
  static NormKind weighted_l2(Mat weight);

  NormTag tag() const { return tag_; }
  bool is_weighted() const { return tag_ == NormTag::WeightedL2; }
  const Mat& weight() const;
  const Mat& weight_inverse() const;
  // Dimension constraint of a weighted norm, 0 if unconstrained.
  Eigen::Index dim() const { return is_weighted() ? weight_.rows() : 0; }

  std::string name() const;

 private:
  explicit NormKind(NormTag tag) : tag_(tag) {}
  NormTag tag_;
  Mat weight_;
  Mat weight_inv_;
};

struct CompositeWeight {
  double n1 = 1.0;
  double n2 = 1.0;

  CompositeWeight() = default;
  CompositeWeight(double n1_, double n2_);
};

double vector_norm(const Vec& v, const NormKind& kind);

// Induced matrix norm, same NormKind on both sides.
double matrix_norm(const Mat& m, const NormKind& kind);

// Logarithmic norm mu(A) in closed form for the supported kinds.
double log_norm(const Mat& a, const NormKind& kind);

// (||I + hA|| - 1)/h, the defining difference quotient. Used as the
// independent oracle for log_norm.
double log_norm_finite_difference(const Mat& a, const NormKind& kind, double h);

struct InducedNormResult {
  double value = 0.0;
  bool estimated = false;  // true when no closed form exists for the pair
};

// max{||F v||_to : ||v||_from = 1}. Closed form where available, otherwise a
// deterministic sampled maximization (flagged via `estimated`).
InducedNormResult induced_norm(const Mat& f, const NormKind& from, const NormKind& to);

double spectral_abscissa(const Mat& a);

// Perron-based composite weights N_i = sqrt(w_i / v_i) for a 2x2 Metzler
// Hurwitz matrix with strictly positive off-diagonals; v, w are the right and
// left eigenvectors of the dominant eigenvalue. Normalized so n2 = 1.
CompositeWeight perron_weights(const Mat& g);

// sqrt(N1 x^2 + N2 z^2) over nonnegative subsystem norms.
double composite_norm(double x_norm, double z_norm, const CompositeWeight& n);

}  // namespace slowfast
