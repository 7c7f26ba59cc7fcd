#include "geomech/linear_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace geomech {

namespace {

double threshold(const Vector& singular_values, double rank_factor) {
  const double top = singular_values.size() > 0 ? singular_values(0) : 0.0;
  return rank_factor * std::max(top, 1.0);
}

void require_same_ambient(const Subspace& a, const Subspace& b) {
  if (a.ambient_dim() != b.ambient_dim())
    throw DimensionMismatch("subspaces live in R^" + std::to_string(a.ambient_dim()) + " and R^" +
                            std::to_string(b.ambient_dim()));
}

}  // namespace

Subspace::Subspace(int ambient_dim) : basis_(ambient_dim, 0) {}

Subspace Subspace::span(const Matrix& columns, double rank_factor) {
  Subspace s(static_cast<int>(columns.rows()));
  if (columns.cols() == 0 || columns.rows() == 0) return s;
  Eigen::JacobiSVD<Matrix> svd(columns, Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  const double tol = threshold(sv, rank_factor);
  int rank = 0;
  while (rank < sv.size() && sv(rank) > tol) ++rank;
  s.basis_ = svd.matrixU().leftCols(rank);
  return s;
}

Subspace Subspace::full(int ambient_dim) {
  Subspace s(ambient_dim);
  s.basis_ = Matrix::Identity(ambient_dim, ambient_dim);
  return s;
}

Subspace subspace_from_vectors(int ambient_dim, const std::vector<Vector>& vectors, double rank_factor) {
  if (ambient_dim < 0) throw DimensionMismatch("negative ambient dimension");
  Matrix m(ambient_dim, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != ambient_dim)
      throw DimensionMismatch("vector " + std::to_string(i) + " has length " +
                              std::to_string(vectors[i].size()) + ", expected " +
                              std::to_string(ambient_dim));
    m.col(static_cast<Eigen::Index>(i)) = vectors[i];
  }
  return Subspace::span(m, rank_factor);
}

int numerical_rank(const Matrix& m, double rank_factor) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& sv = svd.singularValues();
  const double tol = threshold(sv, rank_factor);
  int rank = 0;
  while (rank < sv.size() && sv(rank) > tol) ++rank;
  return rank;
}

Subspace kernel(const Matrix& m, double rank_factor) {
  const int d = static_cast<int>(m.cols());
  if (m.rows() == 0) return Subspace::full(d);
  Subspace out(d);
  if (d == 0) return out;
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  const double tol = threshold(sv, rank_factor);
  int rank = 0;
  while (rank < sv.size() && sv(rank) > tol) ++rank;
  return Subspace::span(svd.matrixV().rightCols(d - rank));
}

Subspace image(const Matrix& m, const Subspace& s) {
  if (m.cols() != s.ambient_dim()) throw DimensionMismatch("image: matrix and subspace disagree");
  if (s.dim() == 0) return Subspace(static_cast<int>(m.rows()));
  return Subspace::span(m * s.basis());
}

Subspace kernel_of_covectors(const std::vector<Vector>& covectors, int ambient_dim) {
  Matrix m(static_cast<Eigen::Index>(covectors.size()), ambient_dim);
  for (std::size_t i = 0; i < covectors.size(); ++i) {
    if (covectors[i].size() != ambient_dim) throw DimensionMismatch("covector length");
    m.row(static_cast<Eigen::Index>(i)) = covectors[i].transpose();
  }
  return kernel(m);
}

Subspace intersect(const Subspace& a, const Subspace& b) {
  require_same_ambient(a, b);
  const int d = a.ambient_dim();
  if (a.dim() == 0 || b.dim() == 0) return Subspace(d);
  const Matrix eye = Matrix::Identity(d, d);
  Matrix stacked(2 * d, d);
  stacked << eye - a.projector(), eye - b.projector();
  return kernel(stacked);
}

Subspace sum(const Subspace& a, const Subspace& b) {
  require_same_ambient(a, b);
  Matrix joined(a.ambient_dim(), a.dim() + b.dim());
  joined << a.basis(), b.basis();
  return Subspace::span(joined);
}

Subspace annihilator(const Subspace& a) {
  if (a.dim() == 0) return Subspace::full(a.ambient_dim());
  return kernel(a.basis().transpose());
}

QuotientBasis quotient(const Subspace& total, const Subspace& kernel_space) {
  require_same_ambient(total, kernel_space);
  if (!contains(total, kernel_space)) throw NotASubspace("kernel is not contained in total space");
  Matrix reps(total.ambient_dim(), 0);
  if (total.dim() > 0) {
    const Subspace coeffs = kernel(kernel_space.basis().transpose() * total.basis());
    reps = total.basis() * coeffs.basis();
  }
  return quotient(total, kernel_space, reps);
}

QuotientBasis quotient(const Subspace& total, const Subspace& kernel_space, const Matrix& reps) {
  require_same_ambient(total, kernel_space);
  if (reps.rows() != total.ambient_dim()) throw DimensionMismatch("representatives have wrong length");
  if (!contains(total, kernel_space)) throw NotASubspace("kernel is not contained in total space");
  const int k = kernel_space.dim();
  const int m = static_cast<int>(reps.cols());
  if (k + m != total.dim()) throw NotASubspace("representatives do not complete the kernel");
  Matrix joined(total.ambient_dim(), k + m);
  joined << kernel_space.basis(), reps;
  if (numerical_rank(joined) != k + m || !contains(total, Subspace::span(joined)))
    throw NotASubspace("representatives do not complete the kernel");
  Matrix projection(m, total.ambient_dim());
  if (m > 0) {
    const Matrix pinv = joined.completeOrthogonalDecomposition().pseudoInverse();
    projection = pinv.bottomRows(m);
  }
  return QuotientBasis{total, kernel_space, reps, projection};
}

Vector principal_angles(const Subspace& a, const Subspace& b) {
  require_same_ambient(a, b);
  const Subspace& big = a.dim() >= b.dim() ? a : b;
  const Subspace& small = a.dim() >= b.dim() ? b : a;
  const int k = small.dim();
  if (k == 0) return Vector(0);
  const Vector cosines = Eigen::JacobiSVD<Matrix>(big.basis().transpose() * small.basis()).singularValues();
  const Matrix residual = small.basis() - big.basis() * (big.basis().transpose() * small.basis());
  Vector sines = Eigen::JacobiSVD<Matrix>(residual).singularValues();
  std::sort(sines.data(), sines.data() + sines.size());
  // Pair the i-th largest cosine with the i-th smallest sine; atan2 keeps small angles accurate.
  Vector angles(k);
  for (int i = 0; i < k; ++i) {
    const double s = i < sines.size() ? sines(i) : 0.0;
    angles(i) = std::atan2(s, std::min(cosines(i), 1.0));
  }
  std::sort(angles.data(), angles.data() + k);
  return angles;
}

double span_distance(const Subspace& a, const Subspace& b) {
  require_same_ambient(a, b);
  if (a.dim() != b.dim()) return std::numbers::pi / 2;
  if (a.dim() == 0) return 0.0;
  return principal_angles(a, b).maxCoeff();
}

bool same_span(const Subspace& a, const Subspace& b, double tol) { return span_distance(a, b) <= tol; }

double containment_residual(const Subspace& outer, const Subspace& inner) {
  require_same_ambient(outer, inner);
  if (inner.dim() == 0) return 0.0;
  const Matrix residual = inner.basis() - outer.basis() * (outer.basis().transpose() * inner.basis());
  return residual.norm();
}

bool contains(const Subspace& outer, const Subspace& inner, double tol) {
  return containment_residual(outer, inner) <= tol;
}

}  // namespace geomech
