#include "geomech/lagrangian.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

namespace geomech {

namespace {

std::string velocity_name(int i) { return "qdot" + std::to_string(i + 1); }
std::string position_name(int i) { return "q" + std::to_string(i + 1); }

// Chart slots of the 2n + 1 coordinates (q, qdot, extension).
std::vector<int> extended_slots(const LagrangianSystem& sys, Extension ext) {
  std::vector<int> slots;
  for (int i = 0; i < 2 * sys.n(); ++i) slots.push_back(i);
  slots.push_back(ext == Extension::Action ? sys.z_slot() : sys.t_slot());
  return slots;
}

Vector gradient_on(const LagrangianSystem& sys, const Expression& e, const Binding& b,
                   const std::vector<int>& slots) {
  Vector g(static_cast<Eigen::Index>(slots.size()));
  for (std::size_t k = 0; k < slots.size(); ++k)
    g(static_cast<Eigen::Index>(k)) =
        evaluate(differentiate(e, sys.coordinates()[static_cast<std::size_t>(slots[k])]), b);
  return g;
}

void require_path_matches(const LagrangianSystem& sys, const PathGrid& path) {
  if (path.n() != sys.n())
    throw DimensionMismatch("path has " + std::to_string(path.n()) + " coordinates, system has " +
                            std::to_string(sys.n()));
}

ResidualSeries residual(const LagrangianSystem& sys, const PathGrid& path, bool herglotz) {
  require_path_matches(sys, path);
  const std::vector<Vector> v = node_velocities(path);
  ResidualSeries out;
  out.z = action_series(sys, path);
  const double h = path.step();
  std::vector<Vector> states;
  for (int k = 0; k < path.size(); ++k) {
    states.push_back(sys.state(path.node(k), v[static_cast<std::size_t>(k)], out.z[static_cast<std::size_t>(k)],
                               path.time(k)));
    sys.require_regular(states.back());
  }
  // Momenta at cell midpoints from the cell slopes.
  std::vector<Vector> cell_momenta;
  for (int k = 0; k + 1 < path.size(); ++k) {
    const auto i = static_cast<std::size_t>(k);
    const Vector mid = sys.state((path.node(k) + path.node(k + 1)) / 2.0, (path.node(k + 1) - path.node(k)) / h,
                                 (out.z[i] + out.z[i + 1]) / 2.0, path.time(k) + h / 2.0);
    sys.require_regular(mid);
    cell_momenta.push_back(sys.momenta(mid));
  }
  for (int k = 1; k + 1 < path.size(); ++k) {
    const auto i = static_cast<std::size_t>(k);
    Vector r = (cell_momenta[i] - cell_momenta[i - 1]) / h - sys.forces(states[i]);
    if (herglotz) r -= sys.momenta(states[i]) * sys.action_rate(states[i]);
    out.times.push_back(path.time(k));
    out.residual.push_back(std::move(r));
  }
  return out;
}

}  // namespace

LagrangianSystem::LagrangianSystem(int n, Expression lagrangian, Binding params)
    : n_(n), lagrangian_(std::move(lagrangian)), params_(std::move(params)) {
  if (n < 1) throw InvalidDimension("Lagrangian system needs n >= 1, got " + std::to_string(n));
  for (int i = 0; i < n; ++i) names_.push_back(position_name(i));
  for (int i = 0; i < n; ++i) names_.push_back(velocity_name(i));
  names_.push_back("z");
  names_.push_back("t");
  for (const auto& name : names_)
    if (params_.count(name) != 0) throw InvalidDimension("parameter '" + name + "' shadows a coordinate");

  for (int i = 0; i < n; ++i) {
    velocity_partials_.push_back(differentiate(lagrangian_, velocity_name(i)));
    position_partials_.push_back(differentiate(lagrangian_, position_name(i)));
  }
  action_partial_ = differentiate(lagrangian_, "z");
  hessian_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      hessian_[static_cast<std::size_t>(i)].push_back(differentiate(velocity_partials_[static_cast<std::size_t>(i)],
                                                                    velocity_name(j)));

  value_fn_ = CompiledExpression(lagrangian_, names_, params_);
  action_fn_ = CompiledExpression(action_partial_, names_, params_);
  for (int i = 0; i < n; ++i) {
    velocity_fns_.emplace_back(velocity_partials_[static_cast<std::size_t>(i)], names_, params_);
    position_fns_.emplace_back(position_partials_[static_cast<std::size_t>(i)], names_, params_);
    hessian_fns_.emplace_back();
    for (int j = 0; j < n; ++j) hessian_fns_.back().emplace_back(hessian(i, j), names_, params_);
  }
}

std::span<const double> LagrangianSystem::view(const Vector& state) const {
  if (state.size() != dim())
    throw DimensionMismatch("state has length " + std::to_string(state.size()) + ", expected " +
                            std::to_string(dim()));
  return {state.data(), static_cast<std::size_t>(state.size())};
}

Binding LagrangianSystem::binding(const Vector& state) const {
  view(state);
  Binding b = params_;
  for (std::size_t i = 0; i < names_.size(); ++i) b[names_[i]] = state(static_cast<Eigen::Index>(i));
  return b;
}

Vector LagrangianSystem::state(const Binding& point) const {
  Vector x = Vector::Zero(dim());
  for (std::size_t i = 0; i < names_.size(); ++i) {
    auto it = point.find(names_[i]);
    if (it != point.end()) x(static_cast<Eigen::Index>(i)) = it->second;
    else if (static_cast<int>(i) < 2 * n_) throw MissingCoordinate("state lacks '" + names_[i] + "'");
  }
  return x;
}

Vector LagrangianSystem::state(const Vector& q, const Vector& qdot, double z, double t) const {
  if (q.size() != n_ || qdot.size() != n_) throw DimensionMismatch("configuration has the wrong length");
  Vector x(dim());
  x << q, qdot, z, t;
  return x;
}

double LagrangianSystem::value(const Vector& state) const { return value_fn_(view(state)); }

Vector LagrangianSystem::momenta(const Vector& state) const {
  const auto values = view(state);
  Vector p(n_);
  for (int i = 0; i < n_; ++i) p(i) = velocity_fns_[static_cast<std::size_t>(i)](values);
  return p;
}

Vector LagrangianSystem::forces(const Vector& state) const {
  const auto values = view(state);
  Vector f(n_);
  for (int i = 0; i < n_; ++i) f(i) = position_fns_[static_cast<std::size_t>(i)](values);
  return f;
}

double LagrangianSystem::action_rate(const Vector& state) const { return action_fn_(view(state)); }

Matrix LagrangianSystem::hessian_at(const Vector& state) const {
  const auto values = view(state);
  Matrix w(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      w(i, j) = hessian_fns_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)](values);
  return w;
}

void LagrangianSystem::require_regular(const Vector& state) const {
  const Matrix w = hessian_at(state);
  if (!w.allFinite()) throw SingularLagrangian("velocity Hessian is not finite");
  const Eigen::JacobiSVD<Matrix> svd(w);
  const Vector& s = svd.singularValues();
  if (s(s.size() - 1) <= kRankFactor * std::max(s(0), 1.0))
    throw SingularLagrangian("velocity Hessian is singular (smallest singular value " +
                             std::to_string(s(s.size() - 1)) + ")");
}

LegendreResult legendre(const LagrangianSystem& sys, const Vector& state) {
  sys.require_regular(state);
  LegendreResult out;
  out.momenta = sys.momenta(state);
  const int n = sys.n();
  const Vector qdot = state.segment(n, n);
  out.energy = qdot.dot(out.momenta) - sys.value(state);

  // S*(dL) with S = dq^i (x) d/dqdot^i, against FL*(p_i dq^i).
  const Binding b = sys.binding(state);
  Matrix vertical = Matrix::Zero(sys.dim(), sys.dim());
  Vector dl(sys.dim());
  for (int i = 0; i < sys.dim(); ++i)
    dl(i) = evaluate(differentiate(sys.lagrangian(), sys.coordinates()[static_cast<std::size_t>(i)]), b);
  for (int i = 0; i < n; ++i) vertical(n + i, i) = 1.0;
  Vector pulled = Vector::Zero(sys.dim());
  pulled.head(n) = out.momenta;
  out.lambda_residual = (vertical.transpose() * dl - pulled).cwiseAbs().maxCoeff();
  return out;
}

PathGrid::PathGrid(double a, double b, std::vector<Vector> nodes, double initial_action)
    : a_(a), b_(b), nodes_(std::move(nodes)), initial_action_(initial_action) {
  if (!(b > a) || !std::isfinite(a) || !std::isfinite(b))
    throw InvalidDimension("path interval must satisfy a < b");
  if (nodes_.size() < 5) throw InvalidDimension("path needs at least 3 interior nodes");
  const auto n = nodes_.front().size();
  if (n < 1) throw InvalidDimension("path nodes are empty");
  for (const auto& q : nodes_) {
    if (q.size() != n) throw DimensionMismatch("path nodes differ in length");
    if (!q.allFinite()) throw DomainError("path node is not finite");
  }
  if (!std::isfinite(initial_action)) throw DomainError("initial action is not finite");
}

PathGrid PathGrid::sample(double a, double b, int count, const std::function<Vector(double)>& path,
                          double initial_action) {
  if (count < 5) throw InvalidDimension("path needs at least 3 interior nodes");
  std::vector<Vector> nodes;
  for (int k = 0; k < count; ++k) nodes.push_back(path(a + (b - a) * k / static_cast<double>(count - 1)));
  return PathGrid(a, b, std::move(nodes), initial_action);
}

double PathGrid::time(int k) const {
  if (k == size() - 1) return b_;
  return a_ + step() * static_cast<double>(k);
}

void PathGrid::set_interior(int k, const Vector& q) {
  if (k <= 0 || k >= size() - 1) throw InvalidDimension("endpoint " + std::to_string(k) + " is fixed");
  if (q.size() != n()) throw DimensionMismatch("node has the wrong length");
  nodes_[static_cast<std::size_t>(k)] = q;
}

std::vector<Vector> node_velocities(const PathGrid& path) {
  const int m = path.size();
  const double h = path.step();
  std::vector<Vector> v(static_cast<std::size_t>(m));
  const auto& q = path.nodes();
  v[0] = (-3.0 * q[0] + 4.0 * q[1] - q[2]) / (2.0 * h);
  for (std::size_t k = 1; k + 1 < q.size(); ++k) v[k] = (q[k + 1] - q[k - 1]) / (2.0 * h);
  const auto l = q.size() - 1;
  v[l] = (3.0 * q[l] - 4.0 * q[l - 1] + q[l - 2]) / (2.0 * h);
  return v;
}

std::vector<double> action_series(const LagrangianSystem& sys, const PathGrid& path) {
  require_path_matches(sys, path);
  std::vector<double> z{path.initial_action()};
  const double h = path.step();
  for (int k = 0; k + 1 < path.size(); ++k) {
    const Vector& q0 = path.node(k);
    const Vector slope = (path.node(k + 1) - q0) / h;
    const double t0 = path.time(k);
    auto rate = [&](double s, double zv) { return sys.value(sys.state(q0 + s * slope, slope, zv, t0 + s)); };
    const double zk = z.back();
    const double k1 = rate(0.0, zk);
    const double k2 = rate(0.5 * h, zk + 0.5 * h * k1);
    const double k3 = rate(0.5 * h, zk + 0.5 * h * k2);
    const double k4 = rate(h, zk + h * k3);
    const double next = zk + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(next)) throw DomainError("action became non-finite at t=" + std::to_string(t0));
    z.push_back(next);
  }
  return z;
}

double ResidualSeries::max() const {
  double m = 0.0;
  for (const auto& r : residual) m = std::max(m, r.cwiseAbs().maxCoeff());
  return m;
}

ResidualSeries euler_lagrange_residual(const LagrangianSystem& sys, const PathGrid& path) {
  return residual(sys, path, false);
}

ResidualSeries herglotz_residual(const LagrangianSystem& sys, const PathGrid& path) {
  return residual(sys, path, true);
}

double herglotz_action(const LagrangianSystem& sys, const PathGrid& path) {
  const std::vector<Vector> v = node_velocities(path);
  for (int k = 0; k < path.size(); ++k)
    sys.require_regular(sys.state(path.node(k), v[static_cast<std::size_t>(k)], 0.0, path.time(k)));
  return action_series(sys, path).back();
}

Matrix action_gradient(const LagrangianSystem& sys, const PathGrid& path, double perturbation) {
  if (!(perturbation > 0.0)) throw InvalidDimension("perturbation must be positive");
  const double base = herglotz_action(sys, path);
  const int n = path.n();
  Matrix grad(path.size() - 2, n);
  PathGrid moved = path;
  for (int k = 1; k + 1 < path.size(); ++k)
    for (int i = 0; i < n; ++i) {
      Vector q = path.node(k);
      q(i) += perturbation;
      moved.set_interior(k, q);
      grad(k - 1, i) = (action_series(sys, moved).back() - base) / perturbation;
      moved.set_interior(k, path.node(k));
    }
  return grad;
}

LagrangianForms lagrangian_forms(const LagrangianSystem& sys, Extension ext, const Vector& state) {
  const Binding b = sys.binding(state);
  const std::vector<int> slots = extended_slots(sys, ext);
  const int n = sys.n();
  const auto d = static_cast<Eigen::Index>(slots.size());
  // d(lambda_L) = sum_i d(dL/dqdot^i) ^ dq^i
  Matrix dlambda = Matrix::Zero(d, d);
  Vector lambda = Vector::Zero(d);
  for (int i = 0; i < n; ++i) {
    const Vector g = gradient_on(sys, sys.velocity_partial(i), b, slots);
    const Vector e = Vector::Unit(d, i);
    dlambda += g * e.transpose() - e * g.transpose();
    lambda(i) = evaluate(sys.velocity_partial(i), b);
  }
  LagrangianForms out;
  out.two_form = -dlambda;
  if (ext == Extension::Action) {
    out.one_form = -lambda;
    out.one_form(d - 1) = 1.0;
  } else {
    out.one_form = Vector::Unit(d, d - 1);
  }
  return out;
}

Vector lagrangian_reeb(const LagrangianSystem& sys, Extension ext, const Vector& state) {
  sys.require_regular(state);
  const int n = sys.n();
  const Binding b = sys.binding(state);
  const std::string var = ext == Extension::Action ? "z" : "t";
  Vector mixed(n);
  for (int j = 0; j < n; ++j) mixed(j) = evaluate(differentiate(sys.velocity_partial(j), var), b);
  Vector r = Vector::Zero(2 * n + 1);
  r(2 * n) = 1.0;
  r.segment(n, n) = -sys.hessian_at(state).lu().solve(mixed);
  return r;
}

double volume_condition(const LagrangianForms& forms) {
  const auto d = forms.two_form.rows();
  if (forms.two_form.cols() != d || forms.one_form.size() != d) throw DimensionMismatch("form sizes differ");
  Matrix bordered = Matrix::Zero(d + 1, d + 1);
  bordered.topLeftCorner(d, d) = forms.two_form;
  bordered.topRightCorner(d, 1) = forms.one_form;
  bordered.bottomLeftCorner(1, d) = -forms.one_form.transpose();
  return bordered.determinant();
}

}  // namespace geomech
