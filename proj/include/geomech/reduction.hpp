#pragma once

#include <optional>
#include <utility>
#include <string>
#include <vector>

#include "geomech/expr.hpp"
#include "geomech/geometry.hpp"
#include "geomech/linear_core.hpp"
#include "geomech/sampling.hpp"

namespace geomech {

// N as the common zero set of constraint functions on a Darboux chart.
struct ConstraintManifold {
  Kind kind = Kind::Symplectic;
  int n = 1;
  std::vector<Expression> constraints;
  Binding params;
  ShsCoefficients shs;  // used only for Kind::SHS
};

// Rows are the differentials of the constraints at `point`.
Matrix constraint_jacobian(const ConstraintManifold& manifold, const Binding& point);
Subspace tangent_space_at(const ConstraintManifold& manifold, const Binding& point);
LinearGeometry geometry_at(const ConstraintManifold& manifold, const Binding& point);

enum class ReductionCase {
  Symplectic,
  Vertical,
  Horizontal,
  TzVertical,
  TVerticalZHorizontal,
  ZVerticalTHorizontal,
  TzHorizontal,
  Other,
};

std::string to_string(ReductionCase c);

struct Check {
  std::string name;
  bool passed = false;
  double residual = 0.0;
};

// Structure forms restricted to quotient representatives.
struct ReducedForms {
  Matrix two_form;
  Vector theta;
  Vector eta;
  Matrix dlambda;
};

struct ReductionReport {
  Binding point;
  Subspace tangent;
  Subspace orthogonal;
  ClassificationReport classification;
  ReductionCase verticality_case = ReductionCase::Other;
  QuotientBasis quotient;
  Kind reduced_kind = Kind::Symplectic;
  ReducedForms forms;
  std::optional<LinearGeometry> reduced_structure;  // empty for zero-dimensional quotients
  int expected_dim = 0;
  std::vector<Check> checks;

  bool passed() const;
  const Check* find(const std::string& name) const;
};

ReductionCase detect_case(const LinearGeometry& g, const Subspace& w, double tol = 1e-8);

// Kind of the quotient structure and the closed-form quotient dimension for a case.
Kind reduced_kind(Kind kind, ReductionCase c);
int expected_quotient_dim(Kind kind, int n, ReductionCase c, int tangent_dim);

ReductionReport linear_reduce(const LinearGeometry& g, const Subspace& w);
// Same reduction with caller-chosen class representatives.
ReductionReport linear_reduce(const LinearGeometry& g, const Subspace& w, const Matrix& representatives);

// Max discrepancy of the reduced forms between the default representatives and a random
// second completion, compared through the change of basis.
double representative_independence(const LinearGeometry& g, const Subspace& w, Rng& rng);

struct ProjectionReport {
  ReductionReport reduction;
  Subspace intersection;  // L cap W
  Subspace image;         // in quotient coordinates
  ClassificationReport classification;
  int expected_dim = 0;
  bool lagrangian = false;
};

ProjectionReport project_through_reduction(const LinearGeometry& g, const Subspace& l, const Subspace& w);

// Largest component outside the distribution of finite-difference Lie brackets of
// smooth frames of (TN)^perp near `point`.
double involutivity_residual(const ConstraintManifold& manifold, const Binding& point, double h = 1e-4);

struct CpReport {
  int n = 0;
  int samples = 0;
  double max_angle = 0.0;
  int reduced_dim = -1;  // common reduced dimension, -1 if it varied
  bool nondegenerate = true;
  bool passed = false;
};

// S^{2n+1} inside symplectic R^{2n+2} reduced to CP^n at random sphere points.
CpReport cp_example(int n, int samples, Rng& rng);
ConstraintManifold sphere(int dof);
// Point of the unit sphere, uniformly distributed.
Binding random_sphere_point(Rng& rng, int dof);
// Sum_i (p_i d/dq^i - q^i d/dp_i) at a point.
Vector cp_generator(int dof, const Binding& point);

// Random coisotropic subspace realising `c` with tangent dimension `dim`,
// respecting the restrictions a tangent space of a submanifold obeys.
Subspace random_coisotropic(Rng& rng, const LinearGeometry& g, ReductionCase c, int dim);
// Admissible tangent dimensions for a case.
std::pair<int, int> coisotropic_dim_range(const LinearGeometry& g, ReductionCase c);
// Random Lagrangian (Poisson kinds) or Legendrian (contact kinds) subspace; horizontal if asked.
Subspace random_lagrangian(Rng& rng, const LinearGeometry& g, bool horizontal);
// Isotropic subspace of (inside, form) of the given dimension.
Subspace random_isotropic(Rng& rng, const Matrix& form, const Subspace& inside, int dim);
// Isotropic subspace of the given dimension containing the isotropic `start`.
Subspace extend_isotropic(Rng& rng, const Matrix& form, const Subspace& inside, const Subspace& start, int dim);

// SHS with closed lambda: a = d phi / dq, b = d phi / dp for a random quadratic phi.
ShsCoefficients random_closed_shs(Rng& rng, int n);

}  // namespace geomech
