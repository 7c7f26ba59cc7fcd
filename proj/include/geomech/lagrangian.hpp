#pragma once

#include <functional>
#include <string>
#include <vector>

#include "geomech/expr.hpp"
#include "geomech/linear_core.hpp"

namespace geomech {

// L(q, qdot, z, t) with coordinates q1..qn, qdot1..qdotn, z, t in that order.
// z and t are always slots; a Lagrangian that ignores them has zero partials there.
class LagrangianSystem {
 public:
  LagrangianSystem(int n, Expression lagrangian, Binding params = {});

  int n() const { return n_; }
  int dim() const { return 2 * n_ + 2; }
  int z_slot() const { return 2 * n_; }
  int t_slot() const { return 2 * n_ + 1; }
  const Expression& lagrangian() const { return lagrangian_; }
  const Binding& params() const { return params_; }
  const std::vector<std::string>& coordinates() const { return names_; }

  // dL/dqdot^i, dL/dq^i, dL/dz, d^2L/dqdot^i dqdot^j.
  const Expression& velocity_partial(int i) const { return velocity_partials_[static_cast<std::size_t>(i)]; }
  const Expression& position_partial(int i) const { return position_partials_[static_cast<std::size_t>(i)]; }
  const Expression& action_partial() const { return action_partial_; }
  const Expression& hessian(int i, int j) const {
    return hessian_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }

  Binding binding(const Vector& state) const;
  Vector state(const Binding& point) const;
  Vector state(const Vector& q, const Vector& qdot, double z = 0.0, double t = 0.0) const;

  double value(const Vector& state) const;
  Vector momenta(const Vector& state) const;
  Vector forces(const Vector& state) const;  // dL/dq
  double action_rate(const Vector& state) const;
  Matrix hessian_at(const Vector& state) const;
  // Throws SingularLagrangian unless the velocity Hessian is invertible at the state.
  void require_regular(const Vector& state) const;

 private:
  std::span<const double> view(const Vector& state) const;

  int n_;
  Expression lagrangian_;
  Binding params_;
  std::vector<std::string> names_;
  std::vector<Expression> velocity_partials_;
  std::vector<Expression> position_partials_;
  Expression action_partial_;
  std::vector<std::vector<Expression>> hessian_;
  CompiledExpression value_fn_;
  CompiledExpression action_fn_;
  std::vector<CompiledExpression> velocity_fns_;
  std::vector<CompiledExpression> position_fns_;
  std::vector<std::vector<CompiledExpression>> hessian_fns_;
};

struct LegendreResult {
  Vector momenta;
  double energy = 0.0;           // qdot^i dL/dqdot^i - L
  double lambda_residual = 0.0;  // |S*(dL) - FL*(p dq)| on the q-components
};

LegendreResult legendre(const LagrangianSystem& sys, const Vector& state);

// Uniform grid of configurations on [a, b] with fixed endpoints.
class PathGrid {
 public:
  PathGrid(double a, double b, std::vector<Vector> nodes, double initial_action = 0.0);
  static PathGrid sample(double a, double b, int count, const std::function<Vector(double)>& path,
                         double initial_action = 0.0);

  int size() const { return static_cast<int>(nodes_.size()); }
  int n() const { return static_cast<int>(nodes_.front().size()); }
  double start() const { return a_; }
  double end() const { return b_; }
  double step() const { return (b_ - a_) / static_cast<double>(size() - 1); }
  double time(int k) const;
  const Vector& node(int k) const { return nodes_[static_cast<std::size_t>(k)]; }
  const std::vector<Vector>& nodes() const { return nodes_; }
  double initial_action() const { return initial_action_; }

  void set_interior(int k, const Vector& q);
  void set_initial_action(double c) { initial_action_ = c; }

 private:
  double a_;
  double b_;
  std::vector<Vector> nodes_;
  double initial_action_;
};

// Second-order finite-difference velocities at every node.
std::vector<Vector> node_velocities(const PathGrid& path);

// z along the piecewise-linear path from zdot = L, one RK4 step per cell, z(a) = c.
std::vector<double> action_series(const LagrangianSystem& sys, const PathGrid& path);

struct ResidualSeries {
  std::vector<double> times;     // interior nodes
  std::vector<Vector> residual;  // one n-vector per interior node
  std::vector<double> z;         // action at every node
  double max() const;
};

// d/dt(dL/dqdot) - dL/dq at interior nodes; the time derivative differences the momenta
// of the two adjacent cells.
ResidualSeries euler_lagrange_residual(const LagrangianSystem& sys, const PathGrid& path);
// Same operator minus dL/dqdot * dL/dz.
ResidualSeries herglotz_residual(const LagrangianSystem& sys, const PathGrid& path);

double herglotz_action(const LagrangianSystem& sys, const PathGrid& path);

// Forward-difference derivative of the action in each interior node coordinate. Row k-1 is node k.
Matrix action_gradient(const LagrangianSystem& sys, const PathGrid& path, double perturbation = 1e-6);

enum class Extension { Action, Time };

// Structure forms on (q, qdot, z) or (q, qdot, t): the one-form is
// eta_L = dz - dL/dqdot^i dq^i with two-form d(eta_L), or theta = dt with -d(lambda_L).
struct LagrangianForms {
  Matrix two_form;
  Vector one_form;
};

LagrangianForms lagrangian_forms(const LagrangianSystem& sys, Extension ext, const Vector& state);
// d/dz (or d/dt) - W^{ij} d^2L/dqdot^j dz (dt) d/dqdot^i on the same 2n + 1 coordinates.
Vector lagrangian_reeb(const LagrangianSystem& sys, Extension ext, const Vector& state);
// Determinant of the bordered matrix [[B, a], [-a^T, 0]]; zero exactly when a ^ B^n vanishes.
double volume_condition(const LagrangianForms& forms);

}  // namespace geomech
