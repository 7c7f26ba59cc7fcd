#include "geomech/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "geomech/sampling.hpp"

namespace geomech {

namespace {

using Expr = Expression;

Expr num(double v) { return Expr::number(v); }

double eval_in(const Expr& e, const Binding& b) {
  try {
    return evaluate(e, b);
  } catch (const MissingBinding& err) {
    throw MissingCoordinate("no value for '" + err.name() + "'");
  }
}

// Sum_i p_i * v_i over the momentum slots.
Expr momentum_dot(const PhaseSystem& sys, const std::vector<Expr>& v) {
  Expr out = num(0.0);
  for (int i = 0; i < sys.n(); ++i)
    out = out + Expr::name("p" + std::to_string(i + 1)) * v[static_cast<std::size_t>(i)];
  return out;
}

std::vector<Expr> slice(const std::vector<Expr>& v, int from, int count) {
  return {v.begin() + from, v.begin() + from + count};
}

// Symbolic one-form eta (contact kinds) or lambda (SHS) as chart components.
std::vector<Expr> contact_form_expr(Kind kind, int n, const ShsCoefficients& shs) {
  const int d = chart_dim(kind, n);
  std::vector<Expr> form(static_cast<std::size_t>(d), num(0.0));
  form[static_cast<std::size_t>(2 * n)] = num(1.0);
  for (int i = 0; i < n; ++i) {
    if (kind == Kind::SHS) {
      form[static_cast<std::size_t>(q_index(n, i))] = shs.a[static_cast<std::size_t>(i)];
      form[static_cast<std::size_t>(p_index(n, i))] = shs.b[static_cast<std::size_t>(i)];
    } else {
      form[static_cast<std::size_t>(q_index(n, i))] = -Expr::name("p" + std::to_string(i + 1));
    }
  }
  return form;
}

Matrix eval_matrix(const std::vector<std::vector<Expr>>& m, const Binding& b) {
  const auto d = static_cast<Eigen::Index>(m.size());
  Matrix out(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      out(i, j) = eval_in(m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], b);
  return out;
}

// Lambda(dx^i, dx^j) and E in Darboux coordinates.
struct SymbolicJacobi {
  std::vector<std::vector<Expr>> lambda;
  std::vector<Expr> e;
};

SymbolicJacobi symbolic_jacobi(const PhaseSystem& sys) {
  const int n = sys.n();
  const int d = sys.dim();
  SymbolicJacobi j{std::vector<std::vector<Expr>>(static_cast<std::size_t>(d),
                                                  std::vector<Expr>(static_cast<std::size_t>(d), num(0.0))),
                   std::vector<Expr>(static_cast<std::size_t>(d), num(0.0))};
  auto set = [&](int a, int b, const Expr& v) {
    j.lambda[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = v;
    j.lambda[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = -v;
  };
  const int z = 2 * n;
  for (int i = 0; i < n; ++i) {
    const int qi = q_index(n, i);
    const int pi = p_index(n, i);
    switch (sys.kind()) {
      case Kind::Symplectic:
      case Kind::Cosymplectic: set(qi, pi, num(1.0)); break;
      case Kind::Contact:
      case Kind::Cocontact:
        // dp ^ dq + p dp ^ dz
        set(pi, qi, num(1.0));
        set(pi, z, Expr::name("p" + std::to_string(i + 1)));
        break;
      case Kind::SHS:
        // dq ^ dp + (a dp - b dq) ^ dz
        set(qi, pi, num(1.0));
        set(pi, z, sys.shs().a[static_cast<std::size_t>(i)]);
        set(qi, z, -sys.shs().b[static_cast<std::size_t>(i)]);
        break;
    }
  }
  if (sys.kind() == Kind::Contact || sys.kind() == Kind::Cocontact) j.e[static_cast<std::size_t>(z)] = num(-1.0);
  if (sys.kind() == Kind::SHS) j.e[static_cast<std::size_t>(z)] = sys.conformal_factor();
  return j;
}

void require_shs_compatible(const PhaseSystem& sys) {
  if (sys.kind() == Kind::SHS && !sys.compatibility().compatible)
    throw JacobiIncompatible("lambda and omega do not satisfy d(lambda) = f omega with sharp(df) vertical (residual " +
                             std::to_string(sys.compatibility().residual) + ")");
}

void add_wedge(Matrix& m, const Vector& a, const Vector& b, double scale) {
  m.noalias() += scale * (a * b.transpose() - b * a.transpose());
}

bool finite(const Vector& v) { return v.allFinite(); }

}  // namespace

std::string to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::Gradient: return "gradient";
    case FieldKind::Hamiltonian: return "hamiltonian";
    case FieldKind::Evolution: return "evolution";
  }
  return "hamiltonian";
}

FieldKind field_kind_from_string(const std::string& name) {
  if (name == "gradient") return FieldKind::Gradient;
  if (name == "hamiltonian") return FieldKind::Hamiltonian;
  if (name == "evolution") return FieldKind::Evolution;
  throw UnsupportedCombination("unknown field kind '" + name + "'");
}

std::string to_string(LiftTest test) {
  switch (test) {
    case LiftTest::GradientImage: return "gradient_image";
    case LiftTest::ModifiedForm: return "modified_form";
    case LiftTest::LegendrianLift: return "legendrian_lift";
  }
  return "gradient_image";
}

LiftTest lift_test_from_string(const std::string& name) {
  if (name == "gradient_image") return LiftTest::GradientImage;
  if (name == "modified_form") return LiftTest::ModifiedForm;
  if (name == "legendrian_lift") return LiftTest::LegendrianLift;
  throw UnsupportedCombination("unknown lift test '" + name + "'");
}

PhaseSystem::PhaseSystem(Kind kind, int n, Expression hamiltonian, Binding params, const ShsCoefficients* shs)
    : kind_(kind), n_(n), hamiltonian_(std::move(hamiltonian)), params_(std::move(params)) {
  if (n < 1) throw InvalidDimension("phase system needs n >= 1, got " + std::to_string(n));
  names_ = coordinate_names(kind, n);
  for (const auto& name : names_) partials_.push_back(differentiate(hamiltonian_, name));
  energy_fn_ = CompiledExpression(hamiltonian_, names_, params_);
  for (const auto& p : partials_) partial_fns_.emplace_back(p, names_, params_);

  if (kind == Kind::SHS) {
    if (shs != nullptr) {
      if (static_cast<int>(shs->a.size()) != n || static_cast<int>(shs->b.size()) != n)
        throw InvalidDimension("SHS coefficients need n entries each");
      shs_ = *shs;
    } else {
      shs_.a.assign(static_cast<std::size_t>(n), num(0.0));
      shs_.b.assign(static_cast<std::size_t>(n), num(0.0));
    }
    Rng rng(0x5eedULL);
    std::vector<Binding> samples;
    for (int i = 0; i < 16; ++i) {
      Binding b = params_;
      for (const auto& [name, value] : random_point(rng, kind, n)) b[name] = value;
      samples.push_back(std::move(b));
    }
    compatibility_ = shs_compatibility(n, shs_, samples);
    factor_ = compatibility_.factor;
  } else {
    factor_ = num(0.0);
    compatibility_.compatible = true;
  }

  const int d = dim();
  flat_.assign(static_cast<std::size_t>(d), std::vector<Expr>(static_cast<std::size_t>(d), num(0.0)));
  for (int i = 0; i < n; ++i) {
    // transpose of dq ^ dp
    flat_[static_cast<std::size_t>(q_index(n, i))][static_cast<std::size_t>(p_index(n, i))] = num(-1.0);
    flat_[static_cast<std::size_t>(p_index(n, i))][static_cast<std::size_t>(q_index(n, i))] = num(1.0);
  }
  auto add_outer = [&](const std::vector<Expr>& form) {
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        auto& cell = flat_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        cell = cell + form[static_cast<std::size_t>(a)] * form[static_cast<std::size_t>(b)];
      }
  };
  if (auto t = t_index(kind, n)) {
    std::vector<Expr> theta(static_cast<std::size_t>(d), num(0.0));
    theta[static_cast<std::size_t>(*t)] = num(1.0);
    add_outer(theta);
  }
  if (kind == Kind::Contact || kind == Kind::Cocontact || kind == Kind::SHS) add_outer(contact_form_expr(kind, n, shs_));
}

Binding PhaseSystem::binding(const Vector& x) const {
  if (x.size() != dim()) throw DimensionMismatch("state has length " + std::to_string(x.size()) + ", expected " +
                                                 std::to_string(dim()));
  Binding b = params_;
  for (std::size_t i = 0; i < names_.size(); ++i) b[names_[i]] = x(static_cast<Eigen::Index>(i));
  return b;
}

Vector PhaseSystem::state(const Binding& point) const {
  Vector x(dim());
  for (std::size_t i = 0; i < names_.size(); ++i) {
    auto it = point.find(names_[i]);
    if (it == point.end()) throw MissingCoordinate("state lacks '" + names_[i] + "'");
    x(static_cast<Eigen::Index>(i)) = it->second;
  }
  return x;
}

LinearGeometry PhaseSystem::geometry_at(const Vector& x) const {
  const Binding b = binding(x);
  return LinearGeometry::standard(kind_, n_, b, kind_ == Kind::SHS ? &shs_ : nullptr);
}

double PhaseSystem::energy(const Vector& x) const {
  if (x.size() != dim()) throw DimensionMismatch("state length");
  return energy_fn_(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

Vector PhaseSystem::differential(const Vector& x) const {
  if (x.size() != dim()) throw DimensionMismatch("state length");
  Vector out(dim());
  const std::span<const double> values(x.data(), static_cast<std::size_t>(x.size()));
  for (int i = 0; i < dim(); ++i) out(i) = partial_fns_[static_cast<std::size_t>(i)](values);
  return out;
}

std::vector<Expression> field_components(const PhaseSystem& sys, FieldKind kind) {
  const int n = sys.n();
  const auto& dh = sys.partials();
  const std::vector<Expr> hq = slice(dh, 0, n);
  const std::vector<Expr> hp = slice(dh, n, n);
  const Expr& h = sys.hamiltonian();
  std::vector<Expr> out;
  auto push_all = [&](const std::vector<Expr>& v) { out.insert(out.end(), v.begin(), v.end()); };
  auto each = [&](auto&& fn) {
    std::vector<Expr> v;
    for (int i = 0; i < n; ++i) v.push_back(fn(i));
    return v;
  };
  auto pname = [](int i) { return Expr::name("p" + std::to_string(i + 1)); };

  switch (sys.kind()) {
    case Kind::Symplectic:
      if (kind == FieldKind::Evolution) break;
      push_all(hp);
      push_all(each([&](int i) { return -hq[static_cast<std::size_t>(i)]; }));
      return out;
    case Kind::Cosymplectic: {
      const Expr& ht = dh[static_cast<std::size_t>(2 * n)];
      push_all(hp);
      push_all(each([&](int i) { return -hq[static_cast<std::size_t>(i)]; }));
      out.push_back(kind == FieldKind::Gradient ? ht : kind == FieldKind::Hamiltonian ? num(0.0) : num(1.0));
      return out;
    }
    case Kind::Contact:
    case Kind::Cocontact: {
      if (sys.kind() == Kind::Cocontact && kind == FieldKind::Evolution) break;
      const Expr& hz = dh[static_cast<std::size_t>(2 * n)];
      push_all(hp);
      push_all(each([&](int i) { return -hq[static_cast<std::size_t>(i)] - pname(i) * hz; }));
      const Expr php = momentum_dot(sys, hp);
      if (kind == FieldKind::Gradient) out.push_back(php + hz);
      else if (kind == FieldKind::Hamiltonian) out.push_back(php - h);
      else out.push_back(php);
      if (sys.kind() == Kind::Cocontact)
        out.push_back(kind == FieldKind::Gradient ? dh[static_cast<std::size_t>(2 * n + 1)] : num(1.0));
      return out;
    }
    case Kind::SHS: {
      if (kind == FieldKind::Evolution) break;
      const Expr& hz = dh[static_cast<std::size_t>(2 * n)];
      const auto& a = sys.shs().a;
      const auto& b = sys.shs().b;
      Expr reeb_part = num(0.0);  // sum_i b^i H_qi - a_i H_pi
      for (int i = 0; i < n; ++i)
        reeb_part = reeb_part + b[static_cast<std::size_t>(i)] * hq[static_cast<std::size_t>(i)] -
                    a[static_cast<std::size_t>(i)] * hp[static_cast<std::size_t>(i)];
      if (kind == FieldKind::Gradient) {
        push_all(each([&](int i) { return hp[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(i)] * hz; }));
        push_all(each([&](int i) { return -hq[static_cast<std::size_t>(i)] + a[static_cast<std::size_t>(i)] * hz; }));
        out.push_back(reeb_part + hz);
        return out;
      }
      require_shs_compatible(sys);
      push_all(each([&](int i) { return -hp[static_cast<std::size_t>(i)] + b[static_cast<std::size_t>(i)] * hz; }));
      push_all(each([&](int i) { return hq[static_cast<std::size_t>(i)] - a[static_cast<std::size_t>(i)] * hz; }));
      out.push_back(-reeb_part + sys.conformal_factor() * h);
      return out;
    }
  }
  throw UnsupportedCombination(to_string(kind) + " field is not defined for " + to_string(sys.kind()));
}

VectorField::VectorField(const std::vector<Expression>& components, const std::vector<std::string>& names,
                         const Binding& params) {
  for (const auto& c : components) components_.emplace_back(c, names, params);
}

Vector VectorField::operator()(const Vector& x) const {
  Vector out(dim());
  const std::span<const double> values(x.data(), static_cast<std::size_t>(x.size()));
  for (int i = 0; i < dim(); ++i) out(i) = components_[static_cast<std::size_t>(i)](values);
  return out;
}

VectorField field(const PhaseSystem& sys, FieldKind kind) {
  return VectorField(field_components(sys, kind), sys.coordinates(), sys.params());
}

Vector field_via_sharp(const PhaseSystem& sys, FieldKind kind, const Vector& x) {
  const LinearGeometry g = sys.geometry_at(x);
  const Vector dh = sys.differential(x);
  const double h = sys.energy(x);
  const Vector grad = g.sharp(dh);
  if (kind == FieldKind::Gradient) return grad;
  switch (sys.kind()) {
    case Kind::Symplectic:
      if (kind == FieldKind::Hamiltonian) return grad;
      break;
    case Kind::Cosymplectic: {
      const Vector r = g.reeb();
      const Vector xh = grad - dh.dot(r) * r;
      return kind == FieldKind::Hamiltonian ? xh : Vector(xh + r);
    }
    case Kind::Contact: {
      const JacobiPair jp = g.jacobi_pair();
      const Vector xh = g.sharp_lambda(dh) + h * jp.e_field;
      return kind == FieldKind::Hamiltonian ? xh : Vector(xh + h * g.reeb());
    }
    case Kind::Cocontact:
      if (kind == FieldKind::Hamiltonian) {
        const Vector rz = g.reeb();
        const Vector rt = g.reeb_t();
        return grad - (dh.dot(rz) + h) * rz + (1.0 - dh.dot(rt)) * rt;
      }
      break;
    case Kind::SHS:
      if (kind == FieldKind::Hamiltonian) {
        require_shs_compatible(sys);
        return g.sharp_lambda(dh) + h * g.jacobi_pair().e_field;
      }
      break;
  }
  throw UnsupportedCombination(to_string(kind) + " field is not defined for " + to_string(sys.kind()));
}

double bracket(const PhaseSystem& sys, const Expression& f, const Expression& g, const Binding& at) {
  if (sys.kind() == Kind::SHS && !sys.compatibility().compatible)
    throw UnsupportedCombination("SHS without a compatible Jacobi structure has no bracket");
  Binding b = sys.params();
  for (const auto& [name, value] : at) b[name] = value;
  const Vector x = sys.state(b);
  const LinearGeometry geo = sys.geometry_at(x);
  const JacobiPair jp = geo.jacobi_pair();
  Vector df(sys.dim()), dg(sys.dim());
  for (int i = 0; i < sys.dim(); ++i) {
    df(i) = eval_in(differentiate(f, sys.coordinates()[static_cast<std::size_t>(i)]), b);
    dg(i) = eval_in(differentiate(g, sys.coordinates()[static_cast<std::size_t>(i)]), b);
  }
  const double fv = eval_in(f, b);
  const double gv = eval_in(g, b);
  return df.dot(jp.lambda * dg) + fv * jp.e_field.dot(dg) - gv * jp.e_field.dot(df);
}

Expression bracket_expression(const PhaseSystem& sys, const Expression& f, const Expression& g) {
  if (sys.kind() == Kind::SHS && !sys.compatibility().compatible)
    throw UnsupportedCombination("SHS without a compatible Jacobi structure has no bracket");
  const SymbolicJacobi j = symbolic_jacobi(sys);
  const auto& names = sys.coordinates();
  std::vector<Expr> df, dg;
  for (const auto& name : names) {
    df.push_back(differentiate(f, name));
    dg.push_back(differentiate(g, name));
  }
  Expr out = num(0.0);
  const int d = sys.dim();
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      const Expr& l = j.lambda[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
      if (l.is_zero()) continue;
      out = out + l * df[static_cast<std::size_t>(a)] * dg[static_cast<std::size_t>(b)];
    }
  for (int a = 0; a < d; ++a) {
    const Expr& e = j.e[static_cast<std::size_t>(a)];
    if (e.is_zero()) continue;
    out = out + f * e * dg[static_cast<std::size_t>(a)] - g * e * df[static_cast<std::size_t>(a)];
  }
  return out;
}

Trajectory integrate(const PhaseSystem& sys, FieldKind kind, const Vector& x0, double t0, double t1,
                     const IntegrationOptions& options) {
  if (!(options.step > 0.0)) throw InvalidDimension("integration step must be positive");
  if (x0.size() != sys.dim()) throw DimensionMismatch("initial state has the wrong length");
  if (!finite(x0)) throw NonFiniteState(t0, "initial state is not finite");
  if (!(t1 >= t0)) throw InvalidDimension("integration interval must satisfy t0 <= t1");
  const VectorField f = field(sys, kind);

  Trajectory traj;
  traj.kind = sys.kind();
  traj.field = kind;
  traj.hamiltonian = sys.hamiltonian();
  auto record = [&](double t, const Vector& x) {
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.energy.push_back(sys.energy(x));
    traj.energy_rate.push_back(sys.differential(x).dot(f(x)));
  };
  record(t0, x0);

  Vector x = x0;
  if (!options.adaptive) {
    const double span = t1 - t0;
    const long steps = std::max(1L, static_cast<long>(std::ceil(span / options.step - 1e-9)));
    const double h = span / static_cast<double>(steps);
    for (long k = 0; k < steps; ++k) {
      const double t = t0 + static_cast<double>(k) * h;
      const Vector k1 = f(x);
      const Vector k2 = f(x + 0.5 * h * k1);
      const Vector k3 = f(x + 0.5 * h * k2);
      const Vector k4 = f(x + h * k3);
      const Vector next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!finite(next)) throw NonFiniteState(t, "state became non-finite");
      x = next;
      record(t0 + static_cast<double>(k + 1) * h, x);
    }
    return traj;
  }

  // Dormand-Prince 5(4) with FSAL.
  static constexpr std::array<std::array<double, 6>, 6> a{{
      {1.0 / 5, 0, 0, 0, 0, 0},
      {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
      {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
      {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
      {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0},
      {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
  }};
  static constexpr std::array<double, 7> b5{35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0};
  static constexpr std::array<double, 7> b4{5179.0 / 57600, 0,          7571.0 / 16695, 393.0 / 640,
                                            -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};
  double t = t0;
  double h = std::min(options.step, t1 - t0);
  std::array<Vector, 7> k;
  k[0] = f(x);
  while (t < t1 && h > 0.0) {
    h = std::min(h, t1 - t);
    for (int s = 1; s < 7; ++s) {
      Vector y = x;
      for (int j = 0; j < s; ++j) y += h * a[static_cast<std::size_t>(s - 1)][static_cast<std::size_t>(j)] * k[static_cast<std::size_t>(j)];
      k[static_cast<std::size_t>(s)] = f(y);
    }
    Vector high = x, low = x;
    for (int s = 0; s < 7; ++s) {
      high += h * b5[static_cast<std::size_t>(s)] * k[static_cast<std::size_t>(s)];
      low += h * b4[static_cast<std::size_t>(s)] * k[static_cast<std::size_t>(s)];
    }
    if (!finite(high)) {
      if (h < 1e-14 * std::max(1.0, std::abs(t))) throw NonFiniteState(t, "state became non-finite");
      h *= 0.25;
      continue;
    }
    double err = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double scale = options.atol + options.rtol * std::max(std::abs(x(i)), std::abs(high(i)));
      err = std::max(err, std::abs(high(i) - low(i)) / scale);
    }
    if (err <= 1.0) {
      t = (t1 - (t + h) < 1e-14 * std::max(1.0, std::abs(t1))) ? t1 : t + h;
      x = high;
      k[0] = k[6];
      record(t, x);
    }
    const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    h *= factor;
    if (h < 1e-14 * std::max(1.0, std::abs(t)) && t < t1) throw NonFiniteState(t, "step size underflow");
  }
  return traj;
}

double EnergyRates::max_law_residual() const {
  double m = 0.0;
  for (double r : law_residual) m = std::max(m, std::abs(r));
  return m;
}

double EnergyRates::max_entropy_residual() const {
  double m = 0.0;
  for (double r : entropy_residual) m = std::max(m, std::abs(r));
  return m;
}

EnergyRates energy_rates(const PhaseSystem& sys, const Trajectory& traj) {
  if (traj.kind != sys.kind() || !structurally_equal(traj.hamiltonian, sys.hamiltonian()))
    throw MismatchedSystem("trajectory was produced by a different system");
  for (const auto& x : traj.states)
    if (x.size() != sys.dim()) throw MismatchedSystem("trajectory states have the wrong dimension");
  const VectorField f = field(sys, traj.field);
  const int n = sys.n();
  const Kind kind = sys.kind();
  const FieldKind fk = traj.field;
  EnergyRates out;
  out.law = "none";
  if (kind == Kind::Symplectic || (kind == Kind::Cosymplectic && fk == FieldKind::Hamiltonian) ||
      (kind == Kind::Contact && fk == FieldKind::Evolution))
    out.law = "dH/dt = 0";
  else if (kind == Kind::Cosymplectic && fk == FieldKind::Evolution) out.law = "dH/dt = dH/dt_partial";
  else if (kind == Kind::Contact && fk == FieldKind::Hamiltonian) out.law = "dH/dt = -H dH/dz";
  else if (kind == Kind::Cocontact && fk == FieldKind::Hamiltonian) out.law = "dH/dt = dH/dt_partial - H dH/dz";
  else if (kind == Kind::SHS && fk == FieldKind::Hamiltonian) out.law = "dH/dt = f H dH/dz";

  const CompiledExpression factor(sys.conformal_factor(), sys.coordinates(), sys.params());
  for (const auto& x : traj.states) {
    const Vector dh = sys.differential(x);
    const Vector v = f(x);
    const double rate = dh.dot(v);
    const double h = sys.energy(x);
    out.rate.push_back(rate);
    if (out.law != "none") {
      double law = 0.0;
      if (kind == Kind::Cosymplectic && fk == FieldKind::Evolution) law = dh(2 * n);
      if (kind == Kind::Contact && fk == FieldKind::Hamiltonian) law = -h * dh(2 * n);
      if (kind == Kind::Cocontact) law = dh(2 * n + 1) - h * dh(2 * n);
      if (kind == Kind::SHS) law = factor(std::span<const double>(x.data(), static_cast<std::size_t>(x.size()))) * h * dh(2 * n);
      out.law_residual.push_back(rate - law);
    }
    if (kind == Kind::Contact && fk == FieldKind::Evolution) {
      double pq = 0.0;
      for (int i = 0; i < n; ++i) pq += x(p_index(n, i)) * v(q_index(n, i));
      out.entropy_residual.push_back(v(2 * n) - pq);
    }
  }
  return out;
}

Matrix tangent_form(const PhaseSystem& sys, const Vector& x, const Vector& xdot) {
  const int d = sys.dim();
  if (x.size() != d || xdot.size() != d) throw DimensionMismatch("tangent point has the wrong length");
  const Binding b = sys.binding(x);
  const auto& flat = sys.flat_expressions();
  const Matrix f = eval_matrix(flat, b);
  // Omega_0 = -d lambda_0 with lambda_0 = (F(x) xdot) . dx
  //         = sum_a dx^a ^ (sum_k (d_k F xdot)_a dx^k + sum_b F_ab dxdot^b)
  Matrix out = Matrix::Zero(2 * d, 2 * d);
  for (int k = 0; k < d; ++k) {
    std::vector<std::vector<Expr>> dflat(flat.size());
    bool any = false;
    for (std::size_t a = 0; a < flat.size(); ++a)
      for (const auto& cell : flat[a]) {
        dflat[a].push_back(differentiate(cell, sys.coordinates()[static_cast<std::size_t>(k)]));
        any = any || !dflat[a].back().is_zero();
      }
    if (!any) continue;
    const Vector coeff = eval_matrix(dflat, b) * xdot;
    for (int a = 0; a < d; ++a) {
      out(a, k) += coeff(a);
      out(k, a) -= coeff(a);
    }
  }
  out.topRightCorner(d, d) += f;
  out.bottomLeftCorner(d, d) -= f.transpose();
  return out;
}

Matrix modified_tangent_form(const PhaseSystem& sys, FieldKind kind, const Vector& x, const Vector& xdot) {
  Matrix out = tangent_form(sys, x, xdot);
  const int d = sys.dim();
  const int n = sys.n();
  const Binding b = sys.binding(x);
  const LinearGeometry g = sys.geometry_at(x);
  const auto& dh = sys.partials();
  auto grad_of = [&](const Expr& e) {
    Vector v(d);
    for (int i = 0; i < d; ++i) v(i) = eval_in(differentiate(e, sys.coordinates()[static_cast<std::size_t>(i)]), b);
    return v;
  };
  // beta = d(s * alpha) = ds ^ alpha + s d(alpha); its pullback to TM sits in the base block.
  Matrix beta = Matrix::Zero(d, d);
  auto add_exact = [&](const Expr& s, const Vector& alpha, const Matrix& dalpha, double sign) {
    add_wedge(beta, grad_of(s), alpha, sign);
    if (dalpha.size() > 0) beta += sign * eval_in(s, b) * dalpha;
  };
  if (kind == FieldKind::Gradient || sys.kind() == Kind::Symplectic) return out;
  switch (sys.kind()) {
    case Kind::Cosymplectic:
      add_exact(dh[static_cast<std::size_t>(2 * n)], g.theta(), Matrix(), -1.0);
      break;
    case Kind::Contact: {
      const Expr& hz = dh[static_cast<std::size_t>(2 * n)];
      const Expr s = kind == FieldKind::Hamiltonian ? hz + sys.hamiltonian() : hz;
      add_exact(s, g.eta(), g.two_form(), -1.0);
      break;
    }
    case Kind::Cocontact:
      if (kind != FieldKind::Hamiltonian) throw UnsupportedCombination("cocontact has no evolution field");
      add_exact(dh[static_cast<std::size_t>(2 * n)] + sys.hamiltonian(), g.eta(), g.two_form(), -1.0);
      add_exact(num(1.0) - dh[static_cast<std::size_t>(2 * n + 1)], g.theta(), Matrix(), 1.0);
      break;
    case Kind::SHS:
      if (kind != FieldKind::Hamiltonian) throw UnsupportedCombination("SHS has no evolution field");
      require_shs_compatible(sys);
      add_exact(dh[static_cast<std::size_t>(2 * n)] + sys.conformal_factor() * sys.hamiltonian(), g.eta(),
                g.dlambda(), 1.0);
      break;
    case Kind::Symplectic: break;
  }
  out.topLeftCorner(d, d) += beta;
  return out;
}

Matrix field_jacobian(const VectorField& f, const Vector& x, double step) {
  if (!(step > 0.0)) throw InvalidDimension("finite-difference step must be positive");
  const int d = static_cast<int>(x.size());
  Matrix jac(f.dim(), d);
  for (int k = 0; k < d; ++k) {
    Vector up = x, down = x;
    up(k) += step;
    down(k) -= step;
    jac.col(k) = (f(up) - f(down)) / (2.0 * step);
  }
  return jac;
}

Matrix section_pullback(const Matrix& form, const Matrix& jacobian) {
  const auto d = jacobian.cols();
  Matrix tangent(2 * d, d);
  tangent << Matrix::Identity(d, d), jacobian;
  return tangent.transpose() * form * tangent;
}

double lift_residual(const PhaseSystem& sys, FieldKind kind, LiftTest test, const Vector& at, double fd_step) {
  if (!(fd_step > 0.0)) throw InvalidDimension("finite-difference step must be positive");
  if (at.size() != sys.dim()) throw DimensionMismatch("point has the wrong length");
  const int d = sys.dim();
  const int n = sys.n();
  const std::vector<Expr> comps = field_components(sys, kind);
  switch (test) {
    case LiftTest::GradientImage: {
      // Closedness of flat(X), differentiated symbolically.
      const Binding b = sys.binding(at);
      const auto& flat = sys.flat_expressions();
      std::vector<Expr> g(static_cast<std::size_t>(d), num(0.0));
      for (int a = 0; a < d; ++a)
        for (int c = 0; c < d; ++c) {
          const Expr& fa = flat[static_cast<std::size_t>(a)][static_cast<std::size_t>(c)];
          if (!fa.is_zero()) g[static_cast<std::size_t>(a)] = g[static_cast<std::size_t>(a)] + fa * comps[static_cast<std::size_t>(c)];
        }
      double worst = 0.0;
      for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
          const double dij = eval_in(differentiate(g[static_cast<std::size_t>(i)], sys.coordinates()[static_cast<std::size_t>(j)]), b);
          const double dji = eval_in(differentiate(g[static_cast<std::size_t>(j)], sys.coordinates()[static_cast<std::size_t>(i)]), b);
          worst = std::max(worst, std::abs(dij - dji));
        }
      return worst;
    }
    case LiftTest::ModifiedForm: {
      const VectorField f(comps, sys.coordinates(), sys.params());
      const Matrix form = modified_tangent_form(sys, kind, at, f(at));
      const Matrix pulled = section_pullback(form, field_jacobian(f, at, fd_step));
      return pulled.cwiseAbs().maxCoeff();
    }
    case LiftTest::LegendrianLift: {
      if (kind != FieldKind::Hamiltonian || (sys.kind() != Kind::Contact && sys.kind() != Kind::Cocontact))
        throw UnsupportedCombination("Legendrian lifts exist for contact and cocontact Hamiltonian fields");
      const VectorField f(comps, sys.coordinates(), sys.params());
      const Vector x = f(at);
      const Matrix jac = field_jacobian(f, at, fd_step);
      const int z = 2 * n;
      const double s = sys.differential(at)(z);  // R_z(H)
      // eta^c + s eta^v: d(xdot_z) - pdot_i dq^i - p_i d(qdot^i) + s (dz - p_i dq^i)
      Vector eta = jac.row(z).transpose();
      eta(z) += s;
      for (int i = 0; i < n; ++i) {
        const double p = at(p_index(n, i));
        eta -= p * jac.row(q_index(n, i)).transpose();
        eta(q_index(n, i)) -= x(p_index(n, i)) + s * p;
      }
      double worst = eta.cwiseAbs().maxCoeff();
      if (sys.kind() == Kind::Cocontact) {
        // + theta^c + e theta^v with e = R_t(H); theta-tilde = theta^c
        const int t = 2 * n + 1;
        const Vector theta = jac.row(t).transpose();
        Vector tilde = eta + theta;
        tilde(t) += sys.differential(at)(t);
        worst = std::max(tilde.cwiseAbs().maxCoeff(), theta.cwiseAbs().maxCoeff());
      }
      return worst;
    }
  }
  return 0.0;
}

}  // namespace geomech
