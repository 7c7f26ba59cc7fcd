#pragma once

#include <optional>
#include <string>
#include <vector>

#include "geomech/expr.hpp"
#include "geomech/linear_core.hpp"

namespace geomech {

enum class Kind { Symplectic, Cosymplectic, Contact, Cocontact, SHS };

std::string to_string(Kind kind);
Kind kind_from_string(const std::string& name);  // throws InvalidDimension on unknown names

// Chart layout: q1..qn, p1..pn, then z and/or t.
int chart_dim(Kind kind, int n);
std::vector<std::string> coordinate_names(Kind kind, int n);
inline int q_index(int, int i) { return i; }
inline int p_index(int n, int i) { return n + i; }
std::optional<int> z_index(Kind kind, int n);
std::optional<int> t_index(Kind kind, int n);

// lambda = a_i dq^i + b^i dp_i + dz with a, b functions of (q, p).
struct ShsCoefficients {
  std::vector<Expression> a;
  std::vector<Expression> b;
};

struct JacobiPair {
  Matrix lambda;  // lambda(i, j) = Lambda(dx^i, dx^j)
  Vector e_field;
};

// One of the five structures frozen at a chart point.
class LinearGeometry {
 public:
  // Darboux form at `point`; contact kinds read p_i, SHS evaluates a, b and their derivatives.
  static LinearGeometry standard(Kind kind, int n, const Binding& point,
                                 const ShsCoefficients* shs = nullptr);
  // Arbitrary forms; `eta` carries lambda for SHS. For SHS `dlambda` may be given.
  static LinearGeometry from_forms(Kind kind, int n, const Matrix& two_form, const Vector& theta,
                                   const Vector& eta, const Matrix& dlambda = Matrix());

  Kind kind() const { return kind_; }
  int n() const { return n_; }
  int dim() const { return static_cast<int>(two_form_.rows()); }

  const Matrix& two_form() const { return two_form_; }
  const Vector& theta() const { return theta_; }
  const Vector& eta() const { return eta_; }
  const Matrix& dlambda() const { return dlambda_; }
  const Matrix& flat_matrix() const { return flat_; }
  const Matrix& sharp_matrix() const { return sharp_; }
  double condition_number() const { return condition_; }

  Vector flat(const Vector& v) const;
  Vector sharp(const Vector& covector) const;

  JacobiPair jacobi_pair() const;
  // Lambda(alpha, .) as a vector.
  Vector sharp_lambda(const Vector& covector) const;

  // Reeb field; for cocontact the z-Reeb field.
  Vector reeb() const;
  // Cocontact time Reeb field.
  Vector reeb_t() const;

  // ker theta, ker eta, ker lambda; intersection for cocontact; everything for symplectic.
  Subspace horizontal() const;
  // Image of sharp_lambda.
  Subspace characteristic() const;

  // SHS conformal factor fitted from dlambda = f omega, and the fit residual.
  double shs_factor() const { return shs_factor_; }
  double shs_factor_residual() const { return shs_residual_; }

 private:
  void finish();

  Kind kind_ = Kind::Symplectic;
  int n_ = 0;
  Matrix two_form_;
  Vector theta_;
  Vector eta_;
  Matrix dlambda_;
  Matrix flat_;
  Matrix sharp_;
  Matrix lambda_;
  double condition_ = 0.0;
  double shs_factor_ = 0.0;
  double shs_residual_ = 0.0;
};

// B^T M B: a bilinear form restricted to a subspace basis.
Matrix restrict_form(const Matrix& form, const Subspace& s);
Vector restrict_covector(const Vector& covector, const Subspace& s);

Subspace lambda_orthogonal(const LinearGeometry& g, const Subspace& delta);
// {v in inside : form(v, w) = 0 for all w in delta}.
Subspace form_orthogonal(const Matrix& form, const Subspace& delta, const Subspace& inside);

struct ClassificationReport {
  int dim = 0;
  int complement_dim = 0;
  bool isotropic = false;
  bool coisotropic = false;
  // Lagrangian or Legendrian per kind: complement equals delta within the characteristic space.
  bool lagrangian = false;
  // delta == delta^perp intersected with the characteristic space, taken literally.
  bool lagrangian_literal = false;
  bool symplectic_subspace = false;
  bool horizontal = false;
  bool vertical = false;
  bool t_horizontal = false;
  bool z_horizontal = false;
  bool t_vertical = false;
  bool z_vertical = false;
};

ClassificationReport classify_subspace(const LinearGeometry& g, const Subspace& delta, double tol = 1e-8);

struct ShsCompatibility {
  bool compatible = false;
  Expression factor;      // f = d b^1/dq1 - d a_1/dp1
  double residual = 0.0;  // max over samples of |dlambda - f omega| and the f-transport terms
  bool z_independent = true;
};

// Tests dlambda = f omega and sharp(df) vertical at the given chart points.
ShsCompatibility shs_compatibility(int n, const ShsCoefficients& shs, const std::vector<Binding>& points);

// Coefficients of lambda and dlambda at a point.
Vector shs_lambda(int n, const ShsCoefficients& shs, const Binding& point);
Matrix shs_dlambda(int n, const ShsCoefficients& shs, const Binding& point);

}  // namespace geomech
