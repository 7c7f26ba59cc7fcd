#pragma once

#include <string>
#include <vector>

#include "geomech/expr.hpp"
#include "geomech/geometry.hpp"
#include "geomech/linear_core.hpp"

namespace geomech {

enum class FieldKind { Gradient, Hamiltonian, Evolution };

std::string to_string(FieldKind kind);
FieldKind field_kind_from_string(const std::string& name);

// A Hamiltonian on a Darboux chart of one of the five structures.
class PhaseSystem {
 public:
  // For SHS, `shs` defaults to a = b = 0.
  PhaseSystem(Kind kind, int n, Expression hamiltonian, Binding params = {},
              const ShsCoefficients* shs = nullptr);

  Kind kind() const { return kind_; }
  int n() const { return n_; }
  int dim() const { return static_cast<int>(names_.size()); }
  const Expression& hamiltonian() const { return hamiltonian_; }
  const Binding& params() const { return params_; }
  const std::vector<std::string>& coordinates() const { return names_; }

  // dH/dx^i in chart order.
  const Expression& partial(int index) const { return partials_[static_cast<std::size_t>(index)]; }
  const std::vector<Expression>& partials() const { return partials_; }

  const ShsCoefficients& shs() const { return shs_; }
  // f with d(lambda) = f omega; zero for the other kinds.
  const Expression& conformal_factor() const { return factor_; }
  const ShsCompatibility& compatibility() const { return compatibility_; }

  Binding binding(const Vector& x) const;
  Vector state(const Binding& point) const;
  LinearGeometry geometry_at(const Vector& x) const;

  double energy(const Vector& x) const;
  Vector differential(const Vector& x) const;

  // Symbolic musical matrix: flat(v)_a = sum_b flat(a, b) v_b.
  const std::vector<std::vector<Expression>>& flat_expressions() const { return flat_; }

 private:
  Kind kind_;
  int n_;
  Expression hamiltonian_;
  Binding params_;
  std::vector<std::string> names_;
  std::vector<Expression> partials_;
  ShsCoefficients shs_;
  Expression factor_;
  ShsCompatibility compatibility_;
  std::vector<std::vector<Expression>> flat_;
  CompiledExpression energy_fn_;
  std::vector<CompiledExpression> partial_fns_;
};

// Closed-form coordinate expressions of a field.
std::vector<Expression> field_components(const PhaseSystem& sys, FieldKind kind);

class VectorField {
 public:
  VectorField() = default;
  VectorField(const std::vector<Expression>& components, const std::vector<std::string>& names,
              const Binding& params);
  Vector operator()(const Vector& x) const;
  int dim() const { return static_cast<int>(components_.size()); }

 private:
  std::vector<CompiledExpression> components_;
};

VectorField field(const PhaseSystem& sys, FieldKind kind);
// Same field assembled from the musical isomorphism, Reeb fields and the Jacobi pair.
Vector field_via_sharp(const PhaseSystem& sys, FieldKind kind, const Vector& x);

// {f, g} = Lambda(df, dg) + f E(g) - g E(f) with (Lambda, E) from the structure at the point.
double bracket(const PhaseSystem& sys, const Expression& f, const Expression& g, const Binding& at);
// Closed-form bracket as an expression, for nested brackets.
Expression bracket_expression(const PhaseSystem& sys, const Expression& f, const Expression& g);

struct IntegrationOptions {
  double step = 1e-3;
  bool adaptive = false;
  double atol = 1e-9;
  double rtol = 1e-9;
};

struct Trajectory {
  Kind kind = Kind::Symplectic;
  FieldKind field = FieldKind::Hamiltonian;
  Expression hamiltonian;
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<double> energy;
  std::vector<double> energy_rate;  // dH . X at each sample
};

// RK4 with uniform step, or Dormand-Prince 5(4) when `adaptive`.
Trajectory integrate(const PhaseSystem& sys, FieldKind kind, const Vector& x0, double t0, double t1,
                     const IntegrationOptions& options = {});

struct EnergyRates {
  std::string law;                       // the rate law being compared against, or "none"
  std::vector<double> rate;              // dH/dt by the chain rule
  std::vector<double> law_residual;      // rate minus the law
  std::vector<double> entropy_residual;  // dz/dt - p_i dq^i/dt, contact evolution only
  double max_law_residual() const;
  double max_entropy_residual() const;
};

EnergyRates energy_rates(const PhaseSystem& sys, const Trajectory& traj);

enum class LiftTest { GradientImage, ModifiedForm, LegendrianLift };

std::string to_string(LiftTest test);
LiftTest lift_test_from_string(const std::string& name);

double lift_residual(const PhaseSystem& sys, FieldKind kind, LiftTest test, const Vector& at,
                     double fd_step = 1e-5);

// Two-forms on TM as 2d x 2d matrices in the coordinates (x, xdot).
Matrix tangent_form(const PhaseSystem& sys, const Vector& x, const Vector& xdot);
// Tangent form corrected so that the given field is a Lagrangian section.
Matrix modified_tangent_form(const PhaseSystem& sys, FieldKind kind, const Vector& x, const Vector& xdot);
// Central-difference Jacobian of a field.
Matrix field_jacobian(const VectorField& f, const Vector& x, double step);
// Pullback of a form on TM by the section with the given Jacobian.
Matrix section_pullback(const Matrix& form, const Matrix& jacobian);

}  // namespace geomech
