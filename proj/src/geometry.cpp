#include "geomech/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace geomech {

namespace {

Matrix darboux_two_form(int n, int d) {
  Matrix w = Matrix::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    w(q_index(n, i), p_index(n, i)) = 1.0;
    w(p_index(n, i), q_index(n, i)) = -1.0;
  }
  return w;
}

double lookup(const Binding& point, const std::string& name) {
  auto it = point.find(name);
  if (it == point.end()) throw MissingCoordinate("chart point lacks '" + name + "'");
  return it->second;
}

double eval_coordinate(const Expression& e, const Binding& point) {
  try {
    return evaluate(e, point);
  } catch (const MissingBinding& err) {
    throw MissingCoordinate("chart point lacks '" + err.name() + "'");
  }
}

int expected_dim(Kind kind, int n) { return chart_dim(kind, n); }

}  // namespace

std::string to_string(Kind kind) {
  switch (kind) {
    case Kind::Symplectic: return "symplectic";
    case Kind::Cosymplectic: return "cosymplectic";
    case Kind::Contact: return "contact";
    case Kind::Cocontact: return "cocontact";
    case Kind::SHS: return "shs";
  }
  return "unknown";
}

Kind kind_from_string(const std::string& name) {
  for (Kind k : {Kind::Symplectic, Kind::Cosymplectic, Kind::Contact, Kind::Cocontact, Kind::SHS})
    if (to_string(k) == name) return k;
  throw InvalidDimension("unknown geometry kind '" + name + "'");
}

int chart_dim(Kind kind, int n) {
  switch (kind) {
    case Kind::Symplectic: return 2 * n;
    case Kind::Cocontact: return 2 * n + 2;
    default: return 2 * n + 1;
  }
}

std::vector<std::string> coordinate_names(Kind kind, int n) {
  std::vector<std::string> names;
  for (int i = 1; i <= n; ++i) names.push_back("q" + std::to_string(i));
  for (int i = 1; i <= n; ++i) names.push_back("p" + std::to_string(i));
  if (z_index(kind, n)) names.push_back("z");
  if (t_index(kind, n)) names.push_back("t");
  return names;
}

std::optional<int> z_index(Kind kind, int n) {
  if (kind == Kind::Contact || kind == Kind::Cocontact || kind == Kind::SHS) return 2 * n;
  return std::nullopt;
}

std::optional<int> t_index(Kind kind, int n) {
  if (kind == Kind::Cosymplectic) return 2 * n;
  if (kind == Kind::Cocontact) return 2 * n + 1;
  return std::nullopt;
}

Vector shs_lambda(int n, const ShsCoefficients& shs, const Binding& point) {
  if (static_cast<int>(shs.a.size()) != n || static_cast<int>(shs.b.size()) != n)
    throw InvalidDimension("SHS coefficients need n entries each");
  Vector lam = Vector::Zero(2 * n + 1);
  for (int i = 0; i < n; ++i) {
    lam(q_index(n, i)) = eval_coordinate(shs.a[static_cast<std::size_t>(i)], point);
    lam(p_index(n, i)) = eval_coordinate(shs.b[static_cast<std::size_t>(i)], point);
  }
  lam(2 * n) = 1.0;
  return lam;
}

Matrix shs_dlambda(int n, const ShsCoefficients& shs, const Binding& point) {
  const int d = 2 * n + 1;
  const auto names = coordinate_names(Kind::SHS, n);
  std::vector<Expression> coeff(static_cast<std::size_t>(d), Expression::number(0.0));
  for (int i = 0; i < n; ++i) {
    coeff[static_cast<std::size_t>(q_index(n, i))] = shs.a[static_cast<std::size_t>(i)];
    coeff[static_cast<std::size_t>(p_index(n, i))] = shs.b[static_cast<std::size_t>(i)];
  }
  coeff[static_cast<std::size_t>(2 * n)] = Expression::number(1.0);
  // jac(i, j) = d c_j / d x^i
  Matrix jac(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i)
      jac(i, j) = eval_coordinate(differentiate(coeff[static_cast<std::size_t>(j)], names[static_cast<std::size_t>(i)]), point);
  return jac - jac.transpose();
}

LinearGeometry LinearGeometry::standard(Kind kind, int n, const Binding& point, const ShsCoefficients* shs) {
  if (n < 1) throw InvalidDimension("chart needs n >= 1, got " + std::to_string(n));
  const int d = chart_dim(kind, n);
  const Matrix w = darboux_two_form(n, d);
  Vector theta(0), eta(0);
  Matrix dlam;
  if (auto t = t_index(kind, n)) theta = Vector::Unit(d, *t);
  if (kind == Kind::Contact || kind == Kind::Cocontact) {
    eta = Vector::Unit(d, 2 * n);
    for (int i = 0; i < n; ++i) eta(q_index(n, i)) = -lookup(point, "p" + std::to_string(i + 1));
  }
  if (kind == Kind::SHS) {
    if (shs == nullptr) {
      eta = Vector::Unit(d, 2 * n);
      dlam = Matrix::Zero(d, d);
    } else {
      eta = shs_lambda(n, *shs, point);
      dlam = shs_dlambda(n, *shs, point);
    }
  }
  return from_forms(kind, n, w, theta, eta, dlam);
}

LinearGeometry LinearGeometry::from_forms(Kind kind, int n, const Matrix& two_form, const Vector& theta,
                                          const Vector& eta, const Matrix& dlambda) {
  if (n < 0) throw InvalidDimension("negative n");
  const int d = expected_dim(kind, n);
  if (two_form.rows() != d || two_form.cols() != d)
    throw InvalidDimension(to_string(kind) + " with n=" + std::to_string(n) + " needs a " + std::to_string(d) +
                           "x" + std::to_string(d) + " two-form");
  if ((two_form + two_form.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, two_form.cwiseAbs().maxCoeff()))
    throw SingularStructure("two-form is not antisymmetric");
  const bool needs_theta = kind == Kind::Cosymplectic || kind == Kind::Cocontact;
  const bool needs_eta = kind == Kind::Contact || kind == Kind::Cocontact || kind == Kind::SHS;
  if ((needs_theta && theta.size() != d) || (!needs_theta && theta.size() != 0))
    throw InvalidDimension("theta has the wrong length for " + to_string(kind));
  if ((needs_eta && eta.size() != d) || (!needs_eta && eta.size() != 0))
    throw InvalidDimension("one-form has the wrong length for " + to_string(kind));
  LinearGeometry g;
  g.kind_ = kind;
  g.n_ = n;
  g.two_form_ = two_form;
  g.theta_ = theta;
  g.eta_ = eta;
  if (kind == Kind::SHS) g.dlambda_ = dlambda.size() == 0 ? Matrix::Zero(d, d) : dlambda;
  g.finish();
  return g;
}

void LinearGeometry::finish() {
  const int d = dim();
  flat_ = two_form_.transpose();
  if (theta_.size() > 0) flat_ += theta_ * theta_.transpose();
  if (eta_.size() > 0) flat_ += eta_ * eta_.transpose();
  if (d == 0) {
    sharp_ = flat_;
    lambda_ = flat_;
    condition_ = 1.0;
    return;
  }
  Eigen::JacobiSVD<Matrix> svd(flat_);
  const Vector& sv = svd.singularValues();
  if (sv(d - 1) <= kRankFactor * std::max(sv(0), 1.0))
    throw SingularStructure(to_string(kind_) + " structure is degenerate (flat map has rank " +
                            std::to_string(numerical_rank(flat_)) + " < " + std::to_string(d) + ")");
  condition_ = sv(0) / sv(d - 1);
  sharp_ = flat_.fullPivLu().inverse();
  const double sign = (kind_ == Kind::Contact || kind_ == Kind::Cocontact) ? -1.0 : 1.0;
  lambda_ = sign * sharp_.transpose() * two_form_ * sharp_;
  lambda_ = 0.5 * (lambda_ - lambda_.transpose());
  if (kind_ == Kind::SHS) {
    const Vector r = sharp_ * eta_;
    if ((dlambda_ * r).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, dlambda_.cwiseAbs().maxCoeff()))
      throw SingularStructure("ker omega is not contained in ker dlambda");
    const double ww = two_form_.squaredNorm();
    shs_factor_ = ww > 0.0 ? (dlambda_.cwiseProduct(two_form_)).sum() / ww : 0.0;
    shs_residual_ = d > 0 ? (dlambda_ - shs_factor_ * two_form_).cwiseAbs().maxCoeff() : 0.0;
  }
}

Vector LinearGeometry::flat(const Vector& v) const {
  if (v.size() != dim()) throw DimensionMismatch("flat: vector length");
  return flat_ * v;
}

Vector LinearGeometry::sharp(const Vector& covector) const {
  if (covector.size() != dim()) throw DimensionMismatch("sharp: covector length");
  return sharp_ * covector;
}

JacobiPair LinearGeometry::jacobi_pair() const {
  Vector e = Vector::Zero(dim());
  switch (kind_) {
    case Kind::Contact:
    case Kind::Cocontact: e = -reeb(); break;
    case Kind::SHS: e = shs_factor_ * reeb(); break;
    default: break;
  }
  return JacobiPair{lambda_, e};
}

Vector LinearGeometry::sharp_lambda(const Vector& covector) const {
  if (covector.size() != dim()) throw DimensionMismatch("sharp_lambda: covector length");
  return lambda_.transpose() * covector;
}

Vector LinearGeometry::reeb() const {
  switch (kind_) {
    case Kind::Symplectic: throw UnsupportedCombination("symplectic structures carry no Reeb field");
    case Kind::Cosymplectic: return sharp_ * theta_;
    default: return sharp_ * eta_;
  }
}

Vector LinearGeometry::reeb_t() const {
  if (kind_ != Kind::Cocontact) throw UnsupportedCombination("time Reeb field exists only for cocontact");
  return sharp_ * theta_;
}

Subspace LinearGeometry::horizontal() const {
  std::vector<Vector> forms;
  if (theta_.size() > 0) forms.push_back(theta_);
  if (eta_.size() > 0) forms.push_back(eta_);
  return kernel_of_covectors(forms, dim());
}

Subspace LinearGeometry::characteristic() const { return Subspace::span(lambda_.transpose()); }

Matrix restrict_form(const Matrix& form, const Subspace& s) { return s.basis().transpose() * form * s.basis(); }

Vector restrict_covector(const Vector& covector, const Subspace& s) { return s.basis().transpose() * covector; }

Subspace lambda_orthogonal(const LinearGeometry& g, const Subspace& delta) {
  if (delta.ambient_dim() != g.dim())
    throw DimensionMismatch("subspace of R^" + std::to_string(delta.ambient_dim()) + " for a " +
                            std::to_string(g.dim()) + "-dimensional structure");
  return image(g.jacobi_pair().lambda.transpose(), annihilator(delta));
}

Subspace form_orthogonal(const Matrix& form, const Subspace& delta, const Subspace& inside) {
  if (delta.dim() == 0) return inside;
  if (inside.dim() == 0) return inside;
  const Subspace coeffs = kernel(delta.basis().transpose() * form.transpose() * inside.basis());
  return image(inside.basis(), coeffs);
}

ClassificationReport classify_subspace(const LinearGeometry& g, const Subspace& delta, double tol) {
  const Subspace perp = lambda_orthogonal(g, delta);
  const Subspace leaf = g.characteristic();
  ClassificationReport r;
  r.dim = delta.dim();
  r.complement_dim = perp.dim();
  r.isotropic = contains(perp, delta, tol);
  r.coisotropic = contains(delta, perp, tol);
  r.symplectic_subspace = intersect(delta, perp).dim() == 0;
  r.horizontal = contains(g.horizontal(), delta, tol);
  auto holds = [&](const Vector& v) { return contains(delta, Subspace::span(v), tol); };
  switch (g.kind()) {
    case Kind::Symplectic:
      r.lagrangian = same_span(perp, delta, tol);
      r.lagrangian_literal = r.lagrangian;
      break;
    case Kind::Cosymplectic:
      r.lagrangian = same_span(perp, intersect(delta, leaf), tol);
      r.lagrangian_literal = same_span(delta, intersect(perp, leaf), tol);
      r.vertical = holds(g.reeb());
      r.t_horizontal = r.horizontal;
      r.t_vertical = r.vertical;
      break;
    case Kind::SHS:
      r.lagrangian = same_span(perp, intersect(delta, leaf), tol);
      r.lagrangian_literal = same_span(perp, intersect(perp, g.horizontal()), tol);
      r.vertical = holds(g.reeb());
      r.z_horizontal = r.horizontal;
      r.z_vertical = r.vertical;
      break;
    case Kind::Contact:
      r.lagrangian = same_span(perp, delta, tol);
      r.lagrangian_literal = r.lagrangian;
      r.vertical = holds(g.reeb());
      r.z_horizontal = r.horizontal;
      r.z_vertical = r.vertical;
      break;
    case Kind::Cocontact:
      r.lagrangian = same_span(perp, delta, tol);
      r.lagrangian_literal = r.lagrangian;
      r.t_horizontal = contains(kernel_of_covectors({g.theta()}, g.dim()), delta, tol);
      r.z_horizontal = contains(kernel_of_covectors({g.eta()}, g.dim()), delta, tol);
      r.t_vertical = holds(g.reeb_t());
      r.z_vertical = holds(g.reeb());
      r.vertical = r.t_vertical && r.z_vertical;
      break;
  }
  return r;
}

ShsCompatibility shs_compatibility(int n, const ShsCoefficients& shs, const std::vector<Binding>& points) {
  if (n < 1 || static_cast<int>(shs.a.size()) != n || static_cast<int>(shs.b.size()) != n)
    throw InvalidDimension("SHS coefficients need n entries each");
  ShsCompatibility out;
  for (int i = 0; i < n; ++i)
    if (depends_on(shs.a[static_cast<std::size_t>(i)], "z") || depends_on(shs.b[static_cast<std::size_t>(i)], "z"))
      out.z_independent = false;
  out.factor = differentiate(shs.b[0], "q1") - differentiate(shs.a[0], "p1");
  const auto names = coordinate_names(Kind::SHS, n);
  const Matrix w = darboux_two_form(n, 2 * n + 1);
  std::vector<Expression> df;
  for (const auto& name : names) df.push_back(differentiate(out.factor, name));
  for (const Binding& pt : points) {
    const Matrix dlam = shs_dlambda(n, shs, pt);
    const double f = eval_coordinate(out.factor, pt);
    double res = (dlam - f * w).cwiseAbs().maxCoeff();
    const double fz = eval_coordinate(df[static_cast<std::size_t>(2 * n)], pt);
    for (int i = 0; i < n; ++i) {
      const double a = eval_coordinate(shs.a[static_cast<std::size_t>(i)], pt);
      const double b = eval_coordinate(shs.b[static_cast<std::size_t>(i)], pt);
      res = std::max(res, std::abs(eval_coordinate(df[static_cast<std::size_t>(q_index(n, i))], pt) - a * fz));
      res = std::max(res, std::abs(-eval_coordinate(df[static_cast<std::size_t>(p_index(n, i))], pt) + b * fz));
    }
    out.residual = std::max(out.residual, res);
  }
  out.compatible = out.z_independent && out.residual <= 1e-9;
  return out;
}

}  // namespace geomech
