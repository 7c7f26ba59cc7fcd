#include "geomech/reduction.hpp"

#include <algorithm>
#include <cmath>

#include "geomech/error.hpp"

namespace geomech {

namespace {

constexpr double kOnManifoldTol = 1e-8;
constexpr double kDescentTol = 1e-9;

Binding merged(const ConstraintManifold& manifold, const Binding& point) {
  Binding all = manifold.params;
  for (const auto& [name, value] : point) all[name] = value;
  return all;
}

Binding to_binding(Kind kind, int n, const Vector& x) {
  Binding b;
  const auto names = coordinate_names(kind, n);
  for (std::size_t i = 0; i < names.size(); ++i) b[names[i]] = x(static_cast<Eigen::Index>(i));
  return b;
}

Vector to_vector(Kind kind, int n, const Binding& point) {
  const auto names = coordinate_names(kind, n);
  Vector x(static_cast<Eigen::Index>(names.size()));
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto it = point.find(names[i]);
    if (it == point.end()) throw MissingCoordinate("chart point lacks '" + names[i] + "'");
    x(static_cast<Eigen::Index>(i)) = it->second;
  }
  return x;
}

double eval_at(const Expression& e, const Binding& b) {
  try {
    return evaluate(e, b);
  } catch (const MissingBinding& err) {
    throw MissingCoordinate("no value for '" + err.name() + "'");
  }
}

// ker dPhi without the on-manifold test.
Subspace level_tangent(const ConstraintManifold& manifold, const Binding& point) {
  const Matrix jac = constraint_jacobian(manifold, point);
  if (numerical_rank(jac) < jac.rows())
    throw DegenerateConstraints("constraint differentials are dependent (rank " + std::to_string(numerical_rank(jac)) +
                                " < " + std::to_string(jac.rows()) + ")");
  return kernel(jac);
}

int extra_dims(Kind kind) {
  switch (kind) {
    case Kind::Symplectic: return 0;
    case Kind::Cocontact: return 2;
    default: return 1;
  }
}

struct Descent {
  bool two_form = false;
  bool theta = false;
  bool eta = false;
  bool dlambda = false;
  bool trivial = false;
};

Descent descending_forms(Kind kind, ReductionCase c) {
  switch (kind) {
    case Kind::Symplectic: return {true, false, false, false, false};
    case Kind::Cosymplectic:
      return c == ReductionCase::Vertical ? Descent{true, true, false, false, false} : Descent{true, false, false, false, false};
    case Kind::Contact:
      return c == ReductionCase::Vertical ? Descent{true, false, true, false, false} : Descent{false, false, false, false, true};
    case Kind::SHS:
      return c == ReductionCase::Vertical ? Descent{true, false, true, true, false} : Descent{true, false, false, false, false};
    case Kind::Cocontact:
      switch (c) {
        case ReductionCase::TzVertical: return {true, true, true, false, false};
        case ReductionCase::TVerticalZHorizontal: return {false, true, false, false, false};
        case ReductionCase::ZVerticalTHorizontal: return {true, false, true, false, false};
        default: return {false, false, false, false, true};
      }
  }
  return {};
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

void add_check(ReductionReport& r, std::string name, double residual, double tol) {
  r.checks.push_back(Check{std::move(name), residual <= tol, residual});
}

Subspace line(const Vector& v) { return Subspace::span(v); }

bool dlambda_vanishes_on(const LinearGeometry& g, const Subspace& s) {
  return max_abs(restrict_form(g.dlambda(), s)) <= kDescentTol * std::max(1.0, max_abs(g.dlambda()));
}

// Horizontal Lagrangian of (H, two_form) as the graph of a symmetric matrix over the q-directions,
// moved into H along the Reeb fields; greedy construction when the chart is not Darboux.
Subspace horizontal_lagrangian(Rng& rng, const LinearGeometry& g) {
  const int n = g.n();
  const int d = g.dim();
  const Subspace h = g.horizontal();
  if (n == 0) return Subspace(d);
  const Matrix s = random_symmetric(rng, n);
  Matrix cols = Matrix::Zero(d, n);
  for (int i = 0; i < n; ++i) {
    cols(q_index(n, i), i) = 1.0;
    for (int j = 0; j < n; ++j) cols(p_index(n, j), i) = s(i, j);
  }
  for (int i = 0; i < n; ++i) {
    Vector u = cols.col(i);
    if (g.kind() == Kind::Cosymplectic) u -= g.theta().dot(u) * g.reeb();
    if (g.kind() == Kind::Contact || g.kind() == Kind::SHS) u -= g.eta().dot(u) * g.reeb();
    if (g.kind() == Kind::Cocontact) u -= g.theta().dot(u) * g.reeb_t() + g.eta().dot(u) * g.reeb();
    cols.col(i) = u;
  }
  const Subspace graph = Subspace::span(cols);
  const bool ok = graph.dim() == n && contains(h, graph, 1e-9) &&
                  max_abs(restrict_form(g.two_form(), graph)) <= 1e-9 * std::max(1.0, max_abs(g.two_form()));
  if (ok) return graph;
  return random_isotropic(rng, g.two_form(), h, n);
}

}  // namespace

Matrix constraint_jacobian(const ConstraintManifold& manifold, const Binding& point) {
  const Binding all = merged(manifold, point);
  const auto names = coordinate_names(manifold.kind, manifold.n);
  Matrix jac(static_cast<Eigen::Index>(manifold.constraints.size()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t a = 0; a < manifold.constraints.size(); ++a)
    for (std::size_t i = 0; i < names.size(); ++i)
      jac(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(i)) =
          eval_at(differentiate(manifold.constraints[a], names[i]), all);
  return jac;
}

Subspace tangent_space_at(const ConstraintManifold& manifold, const Binding& point) {
  const Binding all = merged(manifold, point);
  for (std::size_t a = 0; a < manifold.constraints.size(); ++a) {
    const double value = eval_at(manifold.constraints[a], all);
    if (!(std::abs(value) <= kOnManifoldTol))
      throw NotOnManifold("constraint " + std::to_string(a + 1) + " (" + to_string(manifold.constraints[a]) +
                          ") evaluates to " + std::to_string(value));
  }
  return level_tangent(manifold, point);
}

LinearGeometry geometry_at(const ConstraintManifold& manifold, const Binding& point) {
  if (manifold.kind == Kind::SHS && !manifold.shs.a.empty())
    return LinearGeometry::standard(manifold.kind, manifold.n, merged(manifold, point), &manifold.shs);
  return LinearGeometry::standard(manifold.kind, manifold.n, merged(manifold, point));
}

std::string to_string(ReductionCase c) {
  switch (c) {
    case ReductionCase::Symplectic: return "symplectic";
    case ReductionCase::Vertical: return "vertical";
    case ReductionCase::Horizontal: return "horizontal";
    case ReductionCase::TzVertical: return "tz-vertical";
    case ReductionCase::TVerticalZHorizontal: return "t-vertical/z-horizontal";
    case ReductionCase::ZVerticalTHorizontal: return "z-vertical/t-horizontal";
    case ReductionCase::TzHorizontal: return "tz-horizontal";
    case ReductionCase::Other: return "other";
  }
  return "other";
}

bool ReductionReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

const Check* ReductionReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

ReductionCase detect_case(const LinearGeometry& g, const Subspace& w, double tol) {
  if (w.ambient_dim() != g.dim()) throw DimensionMismatch("subspace and structure live in different dimensions");
  if (g.kind() == Kind::Symplectic) return ReductionCase::Symplectic;
  const ClassificationReport c = classify_subspace(g, w, tol);
  if (g.kind() == Kind::Cocontact) {
    if (c.t_vertical && c.z_vertical) return ReductionCase::TzVertical;
    if (c.t_vertical && c.z_horizontal) return ReductionCase::TVerticalZHorizontal;
    if (c.z_vertical && c.t_horizontal) return ReductionCase::ZVerticalTHorizontal;
    if (c.t_horizontal && c.z_horizontal) return ReductionCase::TzHorizontal;
    return ReductionCase::Other;
  }
  if (c.vertical) return ReductionCase::Vertical;
  if (c.horizontal) return ReductionCase::Horizontal;
  return ReductionCase::Other;
}

Kind reduced_kind(Kind kind, ReductionCase c) {
  switch (c) {
    case ReductionCase::Symplectic:
    case ReductionCase::Horizontal:
    case ReductionCase::TzHorizontal: return Kind::Symplectic;
    case ReductionCase::Vertical: return kind;
    case ReductionCase::TzVertical: return Kind::Cocontact;
    case ReductionCase::TVerticalZHorizontal: return Kind::Cosymplectic;
    case ReductionCase::ZVerticalTHorizontal: return Kind::Contact;
    case ReductionCase::Other: break;
  }
  throw CaseUnsupported("no reduced structure for case " + to_string(c));
}

int expected_quotient_dim(Kind kind, int n, ReductionCase c, int k) {
  switch (kind) {
    case Kind::Symplectic:
      if (c == ReductionCase::Symplectic) return 2 * k - 2 * n;
      break;
    case Kind::Cosymplectic:
    case Kind::SHS:
      if (c == ReductionCase::Vertical) return 2 * (k - n - 1) + 1;
      if (c == ReductionCase::Horizontal) return 2 * k - 2 * n;
      break;
    case Kind::Contact:
      if (c == ReductionCase::Vertical) return 2 * (k - n - 1) + 1;
      if (c == ReductionCase::Horizontal) return 0;
      break;
    case Kind::Cocontact:
      // tangent dimension is k + 2 for tz-vertical and k + 1 for z-vertical/t-horizontal
      if (c == ReductionCase::TzVertical) return 2 * ((k - 2) - n) + 2;
      if (c == ReductionCase::TVerticalZHorizontal) return 1;
      if (c == ReductionCase::ZVerticalTHorizontal) return 2 * ((k - 1) - n) + 1;
      if (c == ReductionCase::TzHorizontal) return 0;
      break;
  }
  throw CaseUnsupported("case " + to_string(c) + " does not apply to " + to_string(kind));
}

ReductionReport linear_reduce(const LinearGeometry& g, const Subspace& w) {
  return linear_reduce(g, w, Matrix());
}

ReductionReport linear_reduce(const LinearGeometry& g, const Subspace& w, const Matrix& representatives) {
  if (w.ambient_dim() != g.dim())
    throw DimensionMismatch("subspace of R^" + std::to_string(w.ambient_dim()) + " for a " + std::to_string(g.dim()) +
                            "-dimensional structure");
  ReductionReport r;
  r.tangent = w;
  r.orthogonal = lambda_orthogonal(g, w);
  r.classification = classify_subspace(g, w);
  if (!r.classification.coisotropic)
    throw NotCoisotropic("subspace of dimension " + std::to_string(w.dim()) + " does not contain its " +
                         std::to_string(r.orthogonal.dim()) + "-dimensional orthogonal complement");
  r.verticality_case = detect_case(g, w);
  if (r.verticality_case == ReductionCase::Other) {
    const int leafwise = intersect(w, g.horizontal()).dim();
    throw CaseUnsupported(to_string(g.kind()) + " coisotropic subspace is neither vertical nor horizontal; "
                          "reduction happens leafwise (tangent cap horizontal has dimension " +
                          std::to_string(leafwise) + ")");
  }
  const Kind kind = g.kind();
  const ReductionCase c = r.verticality_case;
  r.reduced_kind = reduced_kind(kind, c);
  r.expected_dim = expected_quotient_dim(kind, g.n(), c, w.dim());

  const Subspace kernel_space = intersect(r.orthogonal, w);
  r.quotient = representatives.size() == 0 ? quotient(w, kernel_space) : quotient(w, kernel_space, representatives);
  const Matrix& reps = r.quotient.representatives;
  const int m = r.quotient.dim();

  const bool has_theta = g.theta().size() > 0;
  const bool has_eta = g.eta().size() > 0;
  r.forms.two_form = reps.transpose() * g.two_form() * reps;
  if (has_theta) r.forms.theta = reps.transpose() * g.theta();
  if (has_eta) r.forms.eta = reps.transpose() * g.eta();
  if (kind == Kind::SHS) r.forms.dlambda = reps.transpose() * g.dlambda() * reps;

  add_check(r, "dimension", std::abs(m - r.expected_dim), 0.0);

  const Descent descent = descending_forms(kind, c);
  const Matrix& kb = kernel_space.basis();
  const Matrix& wb = w.basis();
  const Matrix projected = r.quotient.projection * wb;
  const double scale2 = std::max(1.0, max_abs(g.two_form()));
  if (descent.two_form) {
    add_check(r, "well_defined_two_form", max_abs(kb.transpose() * g.two_form() * wb), kDescentTol * scale2);
    add_check(r, "pullback_two_form",
              max_abs(wb.transpose() * g.two_form() * wb - projected.transpose() * r.forms.two_form * projected),
              kDescentTol * scale2);
  }
  if (descent.theta) {
    add_check(r, "well_defined_theta", max_abs(kb.transpose() * g.theta()), kDescentTol);
    add_check(r, "pullback_theta", max_abs(wb.transpose() * g.theta() - projected.transpose() * r.forms.theta),
              kDescentTol * std::max(1.0, max_abs(g.theta())));
  }
  if (descent.eta) {
    add_check(r, "well_defined_eta", max_abs(kb.transpose() * g.eta()), kDescentTol);
    add_check(r, "pullback_eta", max_abs(wb.transpose() * g.eta() - projected.transpose() * r.forms.eta),
              kDescentTol * std::max(1.0, max_abs(g.eta())));
  }
  if (descent.dlambda) {
    // lambda_N is only well defined when dlambda pulls back to zero on N.
    add_check(r, "dlambda_pullback_zero", max_abs(restrict_form(g.dlambda(), w)),
              kDescentTol * std::max(1.0, max_abs(g.dlambda())));
  }
  if (has_theta && !descent.theta) add_check(r, "horizontal_theta", max_abs(wb.transpose() * g.theta()), kDescentTol);
  if (has_eta && !descent.eta) add_check(r, "horizontal_eta", max_abs(wb.transpose() * g.eta()), kDescentTol);

  // A tangent space annihilated by eta (or lambda) is also annihilated by its differential.
  const bool eta_horizontal = has_eta && !descent.eta;
  if (eta_horizontal) {
    const Matrix& d_eta = kind == Kind::SHS ? g.dlambda() : g.two_form();
    add_check(r, "integrable_horizontal", max_abs(restrict_form(d_eta, w)),
              kDescentTol * std::max(1.0, max_abs(d_eta)));
  }

  if (c == ReductionCase::Vertical || c == ReductionCase::TzVertical) {
    Matrix moved = wb;
    for (Eigen::Index j = 0; j < wb.cols(); ++j) {
      const Vector v = wb.col(j);
      if (kind == Kind::Cosymplectic) moved.col(j) = v - g.theta().dot(v) * g.reeb();
      else if (kind == Kind::Cocontact) moved.col(j) = v - g.theta().dot(v) * g.reeb_t() - g.eta().dot(v) * g.reeb();
      else moved.col(j) = v - g.eta().dot(v) * g.reeb();
    }
    add_check(r, "reeb_projection_tangent", containment_residual(w, Subspace::span(moved)), 1e-8);
  }

  if (m > 0 && !descent.trivial) {
    const int extra = extra_dims(r.reduced_kind);
    const bool parity = m >= extra && (m - extra) % 2 == 0;
    double residual = 1.0;
    if (parity) {
      const Kind rk = r.reduced_kind;
      const Vector theta_n = (rk == Kind::Cosymplectic || rk == Kind::Cocontact) ? r.forms.theta : Vector(0);
      const Vector eta_n = (rk == Kind::Contact || rk == Kind::Cocontact || rk == Kind::SHS) ? r.forms.eta : Vector(0);
      const Matrix dlam_n = rk == Kind::SHS ? r.forms.dlambda : Matrix();
      try {
        r.reduced_structure = LinearGeometry::from_forms(rk, (m - extra) / 2, r.forms.two_form, theta_n, eta_n, dlam_n);
        residual = 0.0;
      } catch (const Error&) {
        r.reduced_structure.reset();
      }
    }
    add_check(r, "nondegenerate", residual, 0.0);
  }
  return r;
}

double representative_independence(const LinearGeometry& g, const Subspace& w, Rng& rng) {
  const ReductionReport first = linear_reduce(g, w);
  const int m = first.quotient.dim();
  if (m == 0) return 0.0;
  const Matrix& k = first.quotient.kernel.basis();
  Matrix a = random_matrix(rng, m, m);
  while (numerical_rank(a) < m) a = random_matrix(rng, m, m);
  const Matrix reps = first.quotient.representatives * a + k * random_matrix(rng, static_cast<int>(k.cols()), m);
  const ReductionReport second = linear_reduce(g, w, reps);
  const Matrix change = first.quotient.projection * reps;
  double worst = max_abs(second.forms.two_form - change.transpose() * first.forms.two_form * change);
  if (first.forms.theta.size() > 0)
    worst = std::max(worst, max_abs(second.forms.theta - change.transpose() * first.forms.theta));
  if (first.forms.eta.size() > 0)
    worst = std::max(worst, max_abs(second.forms.eta - change.transpose() * first.forms.eta));
  if (first.forms.dlambda.size() > 0)
    worst = std::max(worst, max_abs(second.forms.dlambda - change.transpose() * first.forms.dlambda * change));
  return worst;
}

ProjectionReport project_through_reduction(const LinearGeometry& g, const Subspace& l, const Subspace& w) {
  if (l.ambient_dim() != g.dim()) throw DimensionMismatch("Lagrangian candidate lives in the wrong dimension");
  if (!classify_subspace(g, l).lagrangian)
    throw NotLagrangian("subspace of dimension " + std::to_string(l.dim()) + " is not Lagrangian/Legendrian");
  ProjectionReport out;
  out.reduction = linear_reduce(g, w);
  const int m = out.reduction.quotient.dim();
  out.intersection = intersect(l, w);
  out.image = out.intersection.dim() == 0 || m == 0
                  ? Subspace(m)
                  : Subspace::span(out.reduction.quotient.projection * out.intersection.basis());
  const ReductionCase c = out.reduction.verticality_case;
  switch (c) {
    case ReductionCase::Symplectic:
    case ReductionCase::Horizontal: out.expected_dim = g.kind() == Kind::Contact ? 0 : m / 2; break;
    case ReductionCase::Vertical:
      if (g.kind() == Kind::Contact) out.expected_dim = (m - 1) / 2;
      else out.expected_dim = contains(g.horizontal(), out.intersection) ? (m - 1) / 2 : (m + 1) / 2;
      break;
    case ReductionCase::TzVertical: out.expected_dim = (m - 2) / 2; break;
    case ReductionCase::ZVerticalTHorizontal: out.expected_dim = (m - 1) / 2; break;
    default: out.expected_dim = 0; break;
  }
  if (out.reduction.reduced_structure) {
    out.classification = classify_subspace(*out.reduction.reduced_structure, out.image);
    out.lagrangian = out.classification.lagrangian;
  } else {
    out.classification.dim = out.image.dim();
    out.lagrangian = m == 0;
    out.classification.lagrangian = out.lagrangian;
  }
  return out;
}

double involutivity_residual(const ConstraintManifold& manifold, const Binding& point, double h) {
  if (!(h > 0.0)) throw InvalidDimension("finite-difference step must be positive");
  const Kind kind = manifold.kind;
  const int n = manifold.n;
  tangent_space_at(manifold, point);
  const Vector x0 = to_vector(kind, n, point);
  const int d = static_cast<int>(x0.size());

  auto distribution = [&](const Vector& x) {
    const Binding b = to_binding(kind, n, x);
    return lambda_orthogonal(geometry_at(manifold, b), level_tangent(manifold, b));
  };
  const Subspace base = distribution(x0);
  const int rank = base.dim();
  const Matrix reference = base.basis();

  // Projected coordinate fields plus a re-orthonormalized projected reference frame.
  auto frame = [&](const Vector& x) {
    const Subspace here = distribution(x);
    if (here.dim() != rank)
      throw RankJump("orthogonal distribution has rank " + std::to_string(here.dim()) + " near the point, " +
                     std::to_string(rank) + " at it");
    const Matrix p = here.projector();
    Matrix fields(d, d + rank);
    fields.leftCols(d) = p;
    for (int j = 0; j < rank; ++j) {
      Vector v = p * reference.col(j);
      for (int i = 0; i < j; ++i) v -= fields.col(d + i).dot(v) * fields.col(d + i);
      fields.col(d + j) = v.normalized();
    }
    return fields;
  };

  const Matrix at = frame(x0);
  const int count = static_cast<int>(at.cols());
  std::vector<Matrix> jac(static_cast<std::size_t>(count), Matrix(d, d));
  for (int k = 0; k < d; ++k) {
    Vector up = x0, down = x0;
    up(k) += h;
    down(k) -= h;
    const Matrix diff = (frame(up) - frame(down)) / (2.0 * h);
    for (int f = 0; f < count; ++f) jac[static_cast<std::size_t>(f)].col(k) = diff.col(f);
  }
  const Matrix outside = Matrix::Identity(d, d) - base.projector();
  double worst = 0.0;
  for (int a = 0; a < count; ++a)
    for (int b = a + 1; b < count; ++b) {
      const Vector bracket = jac[static_cast<std::size_t>(b)] * at.col(a) - jac[static_cast<std::size_t>(a)] * at.col(b);
      worst = std::max(worst, (outside * bracket).norm());
    }
  return worst;
}

ConstraintManifold sphere(int dof) {
  if (dof < 1) throw InvalidDimension("sphere needs at least one degree of freedom");
  Expression phi = Expression::number(-1.0);
  for (int i = 1; i <= dof; ++i) {
    const Expression q = Expression::name("q" + std::to_string(i));
    const Expression p = Expression::name("p" + std::to_string(i));
    phi = phi + q * q + p * p;
  }
  ConstraintManifold m;
  m.kind = Kind::Symplectic;
  m.n = dof;
  m.constraints = {phi};
  return m;
}

Binding random_sphere_point(Rng& rng, int dof) {
  Vector v = random_vector(rng, 2 * dof);
  while (v.norm() < 1e-6) v = random_vector(rng, 2 * dof);
  return to_binding(Kind::Symplectic, dof, v.normalized());
}

Vector cp_generator(int dof, const Binding& point) {
  const Vector x = to_vector(Kind::Symplectic, dof, point);
  Vector v(2 * dof);
  for (int i = 0; i < dof; ++i) {
    v(q_index(dof, i)) = x(p_index(dof, i));
    v(p_index(dof, i)) = -x(q_index(dof, i));
  }
  return v;
}

CpReport cp_example(int n, int samples, Rng& rng) {
  if (n < 1) throw InvalidDimension("complex projective example needs n >= 1");
  CpReport out;
  out.n = n;
  out.samples = samples;
  const ConstraintManifold s = sphere(n + 1);
  bool first = true;
  bool dims_agree = true;
  for (int i = 0; i < samples; ++i) {
    const Binding point = random_sphere_point(rng, n + 1);
    const Subspace tangent = tangent_space_at(s, point);
    const LinearGeometry g = geometry_at(s, point);
    const Subspace perp = lambda_orthogonal(g, tangent);
    out.max_angle = std::max(out.max_angle, span_distance(perp, line(cp_generator(n + 1, point))));
    const ReductionReport r = linear_reduce(g, tangent);
    const int dim = r.quotient.dim();
    if (first) out.reduced_dim = dim;
    else if (dim != out.reduced_dim) dims_agree = false;
    first = false;
    const Check* nd = r.find("nondegenerate");
    if (nd == nullptr || !nd->passed) out.nondegenerate = false;
  }
  if (!dims_agree) out.reduced_dim = -1;
  out.passed = samples > 0 && out.max_angle <= 1e-8 && out.reduced_dim == 2 * n && out.nondegenerate;
  return out;
}

Subspace extend_isotropic(Rng& rng, const Matrix& form, const Subspace& inside, const Subspace& start, int dim) {
  Subspace current = start;
  while (current.dim() < dim) {
    const Subspace candidates = form_orthogonal(form, current, inside);
    if (candidates.dim() <= current.dim())
      throw InvalidDimension("no isotropic subspace of dimension " + std::to_string(dim));
    Vector v = candidates.basis() * random_vector(rng, candidates.dim());
    if (current.dim() > 0) v -= current.projector() * v;
    if (v.norm() < 1e-8) continue;
    current = sum(current, line(v));
  }
  return current;
}

Subspace random_isotropic(Rng& rng, const Matrix& form, const Subspace& inside, int dim) {
  return extend_isotropic(rng, form, inside, Subspace(inside.ambient_dim()), dim);
}

std::pair<int, int> coisotropic_dim_range(const LinearGeometry& g, ReductionCase c) {
  const int n = g.n();
  const Kind kind = g.kind();
  const bool closed = kind != Kind::SHS || dlambda_vanishes_on(g, g.horizontal());
  switch (c) {
    case ReductionCase::Symplectic:
      if (kind == Kind::Symplectic) return {n, 2 * n};
      break;
    case ReductionCase::Vertical:
      if (kind == Kind::Cosymplectic || kind == Kind::Contact) return {n + 1, 2 * n + 1};
      if (kind == Kind::SHS) return closed ? std::pair{n + 1, 2 * n + 1} : std::pair{n + 1, n + 1};
      break;
    case ReductionCase::Horizontal:
      if (kind == Kind::Cosymplectic) return {n, 2 * n};
      if (kind == Kind::Contact) return {n, n};
      if (kind == Kind::SHS) return closed ? std::pair{n, 2 * n} : std::pair{n, n};
      break;
    case ReductionCase::TzVertical:
      if (kind == Kind::Cocontact) return {n + 2, 2 * n + 2};
      break;
    case ReductionCase::TVerticalZHorizontal:
      if (kind == Kind::Cocontact) return {n + 1, n + 1};
      break;
    case ReductionCase::ZVerticalTHorizontal:
      if (kind == Kind::Cocontact) return {n + 1, 2 * n + 1};
      break;
    case ReductionCase::TzHorizontal:
      if (kind == Kind::Cocontact) return {n, n};
      break;
    case ReductionCase::Other: break;
  }
  throw CaseUnsupported("case " + to_string(c) + " does not apply to " + to_string(kind));
}

Subspace random_coisotropic(Rng& rng, const LinearGeometry& g, ReductionCase c, int dim) {
  const auto [lo, hi] = coisotropic_dim_range(g, c);
  if (dim < lo || dim > hi)
    throw InvalidDimension("case " + to_string(c) + " admits tangent dimensions " + std::to_string(lo) + ".." +
                           std::to_string(hi) + ", got " + std::to_string(dim));
  const Subspace h = g.horizontal();
  auto coisotropic_in_h = [&](int target) {
    const int r = h.dim() - target;
    return form_orthogonal(g.two_form(), random_isotropic(rng, g.two_form(), h, r), h);
  };
  switch (c) {
    case ReductionCase::Symplectic:
    case ReductionCase::Horizontal:
    case ReductionCase::TzHorizontal: return coisotropic_in_h(dim);
    case ReductionCase::Vertical: return sum(coisotropic_in_h(dim - 1), line(g.reeb()));
    case ReductionCase::TzVertical: return sum(sum(coisotropic_in_h(dim - 2), line(g.reeb_t())), line(g.reeb()));
    case ReductionCase::TVerticalZHorizontal: return sum(coisotropic_in_h(dim - 1), line(g.reeb_t()));
    case ReductionCase::ZVerticalTHorizontal: return sum(coisotropic_in_h(dim - 1), line(g.reeb()));
    case ReductionCase::Other: break;
  }
  throw CaseUnsupported("cannot generate case " + to_string(c));
}

Subspace random_lagrangian(Rng& rng, const LinearGeometry& g, bool horizontal) {
  const Subspace base = horizontal_lagrangian(rng, g);
  if (horizontal || (g.kind() != Kind::Cosymplectic && g.kind() != Kind::SHS)) return base;
  const Subspace h = g.horizontal();
  const Vector tilt = g.reeb() + h.basis() * random_vector(rng, h.dim());
  return sum(base, line(tilt));
}

ShsCoefficients random_closed_shs(Rng& rng, int n) {
  if (n < 1) throw InvalidDimension("SHS needs n >= 1");
  const Matrix s = random_symmetric(rng, 2 * n);
  const Vector c = random_vector(rng, 2 * n);
  std::vector<Expression> x;
  for (int i = 1; i <= n; ++i) x.push_back(Expression::name("q" + std::to_string(i)));
  for (int i = 1; i <= n; ++i) x.push_back(Expression::name("p" + std::to_string(i)));
  auto gradient = [&](int row) {
    Expression e = Expression::number(c(row));
    for (int j = 0; j < 2 * n; ++j) e = e + Expression::number(s(row, j)) * x[static_cast<std::size_t>(j)];
    return e;
  };
  ShsCoefficients out;
  for (int i = 0; i < n; ++i) {
    out.a.push_back(gradient(q_index(n, i)));
    out.b.push_back(gradient(p_index(n, i)));
  }
  return out;
}

}  // namespace geomech
