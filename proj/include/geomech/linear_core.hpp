#pragma once

#include <vector>

#include <Eigen/Dense>

#include "geomech/error.hpp"

namespace geomech {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Singular values below kRankFactor * max(sigma_max, 1) count as zero.
inline constexpr double kRankFactor = 1e-9;

// Linear subspace of R^d stored as an orthonormal basis (d x k, k may be 0).
// Covectors share the representation; the pairing is the dot product.
class Subspace {
 public:
  explicit Subspace(int ambient_dim = 0);

  // Orthonormal basis of the column span of `columns`.
  static Subspace span(const Matrix& columns, double rank_factor = kRankFactor);
  static Subspace full(int ambient_dim);

  int ambient_dim() const { return static_cast<int>(basis_.rows()); }
  int dim() const { return static_cast<int>(basis_.cols()); }
  const Matrix& basis() const { return basis_; }
  Matrix projector() const { return basis_ * basis_.transpose(); }

 private:
  Matrix basis_;
};

struct QuotientBasis {
  Subspace total;
  Subspace kernel;
  Matrix representatives;  // d x m, completes kernel to total
  Matrix projection;       // m x d, class coordinates
  int dim() const { return static_cast<int>(representatives.cols()); }
};

Subspace subspace_from_vectors(int ambient_dim, const std::vector<Vector>& vectors,
                               double rank_factor = kRankFactor);
Subspace intersect(const Subspace& a, const Subspace& b);
Subspace sum(const Subspace& a, const Subspace& b);
Subspace annihilator(const Subspace& a);

// Null space of a matrix acting on R^cols.
Subspace kernel(const Matrix& m, double rank_factor = kRankFactor);
// Span of m * basis(s).
Subspace image(const Matrix& m, const Subspace& s);
// Span of the columns of m.
inline Subspace image(const Matrix& m) { return Subspace::span(m); }
// Common zero set of the given covectors.
Subspace kernel_of_covectors(const std::vector<Vector>& covectors, int ambient_dim);

// Orthonormal representatives of total modulo kernel.
QuotientBasis quotient(const Subspace& total, const Subspace& kernel);
// Same quotient with caller-chosen representatives (any completion).
QuotientBasis quotient(const Subspace& total, const Subspace& kernel, const Matrix& representatives);

// Principal angles in ascending order; min(dim a, dim b) entries.
Vector principal_angles(const Subspace& a, const Subspace& b);
// Largest principal angle, or pi/2 if the dimensions differ.
double span_distance(const Subspace& a, const Subspace& b);
bool same_span(const Subspace& a, const Subspace& b, double tol = 1e-8);
// Whether inner is contained in outer.
bool contains(const Subspace& outer, const Subspace& inner, double tol = 1e-8);
// Norm of the component of inner outside outer.
double containment_residual(const Subspace& outer, const Subspace& inner);

int numerical_rank(const Matrix& m, double rank_factor = kRankFactor);

}  // namespace geomech
