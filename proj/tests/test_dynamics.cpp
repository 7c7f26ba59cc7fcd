#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "geomech/dynamics.hpp"
#include "geomech/reduction.hpp"
#include "geomech/sampling.hpp"

using namespace geomech;

namespace {

constexpr Kind kAllKinds[] = {Kind::Symplectic, Kind::Cosymplectic, Kind::Contact, Kind::Cocontact, Kind::SHS};

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

double max_abs(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

Vector random_state(Rng& rng, const PhaseSystem& sys) { return sys.state(random_point(rng, sys.kind(), sys.n())); }

// Hamiltonians that exercise every coordinate of the chart.
Expression sample_hamiltonian(Kind kind, int n) {
  std::string text;
  for (int i = 1; i <= n; ++i) {
    const std::string q = "q" + std::to_string(i), p = "p" + std::to_string(i);
    text += "0.5*" + p + "^2 + 0.3*" + q + "^2 + 0.2*sin(" + q + ")*" + p + " + ";
  }
  text += "0.1*q1*p" + std::to_string(n);
  if (kind != Kind::Symplectic && kind != Kind::Cosymplectic) text += " + 0.25*z + 0.1*z^2*q1 + 0.05*exp(0.3*z)*p1";
  if (kind == Kind::Cosymplectic || kind == Kind::Cocontact) text += " + 0.4*t*q1 + 0.2*cos(t)*p1^2";
  return parse(text);
}

ShsCoefficients contact_like_shs(int n) {
  ShsCoefficients s;
  for (int i = 1; i <= n; ++i) {
    s.a.push_back(parse("-p" + std::to_string(i)));
    s.b.push_back(Expression::number(0.0));
  }
  return s;
}

std::vector<PhaseSystem> sample_systems(Rng& rng, int n) {
  std::vector<PhaseSystem> out;
  for (Kind kind : kAllKinds) out.emplace_back(kind, n, sample_hamiltonian(kind, n));
  const ShsCoefficients contact = contact_like_shs(n);
  out.emplace_back(Kind::SHS, n, sample_hamiltonian(Kind::SHS, n), Binding{}, &contact);
  const ShsCoefficients closed = random_closed_shs(rng, n);
  out.emplace_back(Kind::SHS, n, sample_hamiltonian(Kind::SHS, n), Binding{}, &closed);
  return out;
}

std::vector<FieldKind> fields_of(Kind kind) {
  if (kind == Kind::Cosymplectic || kind == Kind::Contact) return {FieldKind::Gradient, FieldKind::Hamiltonian, FieldKind::Evolution};
  return {FieldKind::Gradient, FieldKind::Hamiltonian};
}

// Polynomial of degree <= 2 with a few random terms.
Expression random_polynomial(Rng& rng, const std::vector<std::string>& names) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  Expression out = Expression::number(coef(rng));
  const int terms = random_int(rng, 1, 4);
  for (int k = 0; k < terms; ++k) {
    const auto& a = names[static_cast<std::size_t>(random_int(rng, 0, static_cast<int>(names.size()) - 1))];
    Expression term = Expression::number(coef(rng)) * Expression::name(a);
    if (random_int(rng, 0, 1) == 1) {
      const auto& b = names[static_cast<std::size_t>(random_int(rng, 0, static_cast<int>(names.size()) - 1))];
      term = term * Expression::name(b);
    }
    out = out + term;
  }
  return out;
}

// Form on TM written term by term: dx^a ^ dx^b with coefficient c.
void wedge(Matrix& m, int a, int b, double c) {
  m(a, b) += c;
  m(b, a) -= c;
}

// d(s alpha) restricted to the base block, with ds and d(alpha) supplied.
Matrix exact_form(const Vector& ds, double s, const Vector& alpha, const Matrix& dalpha) {
  Matrix out = ds * alpha.transpose() - alpha * ds.transpose();
  if (dalpha.size() > 0) out += s * dalpha;
  return out;
}

Vector symbolic_gradient(const PhaseSystem& sys, const Expression& e, const Vector& x) {
  const Binding b = sys.binding(x);
  Vector out(sys.dim());
  for (int i = 0; i < sys.dim(); ++i) out(i) = evaluate(differentiate(e, sys.coordinates()[static_cast<std::size_t>(i)]), b);
  return out;
}

}  // namespace

TEST_CASE("closed-form fields") {
  const PhaseSystem osc(Kind::Symplectic, 1, parse("(q1^2 + p1^2)/2"));
  CHECK(field(osc, FieldKind::Hamiltonian)(vec({0.3, -0.7})).isApprox(vec({-0.7, -0.3})));

  // m = 1.5, k = 2, g = 0.2: pdot = -k^2 m q - g p
  const PhaseSystem damped(Kind::Contact, 1, parse("p1^2/(2*m) + k^2*m*q1^2/2 + g*z"),
                           {{"m", 1.5}, {"k", 2.0}, {"g", 0.2}});
  const Vector x = vec({0.4, -0.9, 0.3});
  const Vector v = field(damped, FieldKind::Hamiltonian)(x);
  CHECK(v(0) == doctest::Approx(-0.9 / 1.5));
  CHECK(v(1) == doctest::Approx(-4.0 * 1.5 * 0.4 - 0.2 * -0.9));

  const PhaseSystem cosym(Kind::Cosymplectic, 1, sample_hamiltonian(Kind::Cosymplectic, 1));
  Rng rng(3);
  for (int i = 0; i < 10; ++i) CHECK(field(cosym, FieldKind::Evolution)(random_state(rng, cosym))(2) == 1.0);

  CHECK_THROWS_AS(field(osc, FieldKind::Evolution), UnsupportedCombination);
  CHECK_THROWS_AS(field(PhaseSystem(Kind::Cocontact, 1, parse("p1")), FieldKind::Evolution), UnsupportedCombination);
  CHECK_THROWS_AS(field(PhaseSystem(Kind::SHS, 1, parse("p1")), FieldKind::Evolution), UnsupportedCombination);
  CHECK_THROWS_AS(field_kind_from_string("flow"), UnsupportedCombination);
  CHECK(field_kind_from_string("evolution") == FieldKind::Evolution);

  // a = p1 q1^2 gives a non-constant factor whose gradient is not vertical.
  ShsCoefficients bad{{parse("p1*q1^2")}, {Expression::number(0.0)}};
  const PhaseSystem incompatible(Kind::SHS, 1, parse("p1^2 + z"), {}, &bad);
  CHECK_FALSE(incompatible.compatibility().compatible);
  CHECK_THROWS_AS(field(incompatible, FieldKind::Hamiltonian), JacobiIncompatible);
  CHECK_NOTHROW(field(incompatible, FieldKind::Gradient));

  CHECK_THROWS_AS(PhaseSystem(Kind::Contact, 0, parse("p1")), InvalidDimension);
  CHECK_THROWS_AS(field(PhaseSystem(Kind::Symplectic, 1, parse("p1*w")), FieldKind::Hamiltonian), MissingBinding);
}

TEST_CASE("partials and coordinates") {
  const PhaseSystem sys(Kind::Cocontact, 2, sample_hamiltonian(Kind::Cocontact, 2));
  CHECK(sys.coordinates() == std::vector<std::string>{"q1", "q2", "p1", "p2", "z", "t"});
  for (int i = 0; i < sys.dim(); ++i)
    CHECK(structurally_equal(sys.partial(i), differentiate(sys.hamiltonian(), sys.coordinates()[static_cast<std::size_t>(i)])));
  CHECK(PhaseSystem(Kind::SHS, 1, parse("z")).dim() == 3);
  CHECK(PhaseSystem(Kind::Cosymplectic, 1, parse("t")).dim() == 3);
  CHECK_THROWS_AS(sys.binding(vec({1.0, 2.0})), DimensionMismatch);

  const ShsCoefficients contact = contact_like_shs(1);
  const PhaseSystem shs(Kind::SHS, 1, parse("p1"), {}, &contact);
  CHECK(shs.compatibility().compatible);
  CHECK(evaluate(shs.conformal_factor(), {}) == 1.0);
}

TEST_CASE("coordinate formulas agree with the musical assembly") {
  Rng rng(11);
  for (int n = 1; n <= 3; ++n)
    for (const PhaseSystem& sys : sample_systems(rng, n))
      for (FieldKind fk : fields_of(sys.kind())) {
        const VectorField f = field(sys, fk);
        for (int s = 0; s < 20; ++s) {
          const Vector x = random_state(rng, sys);
          const Vector a = field_via_sharp(sys, fk, x);
          const Vector b = f(x);
          CHECK(max_abs(a - b) <= 1e-12 * std::max(1.0, max_abs(b)));
        }
      }
}

TEST_CASE("relations among fields") {
  Rng rng(12);
  for (int n = 1; n <= 2; ++n) {
    const PhaseSystem cosym(Kind::Cosymplectic, n, sample_hamiltonian(Kind::Cosymplectic, n));
    const PhaseSystem contact(Kind::Contact, n, sample_hamiltonian(Kind::Contact, n));
    for (int s = 0; s < 50; ++s) {
      {
        const Vector x = random_state(rng, cosym);
        const Vector r = cosym.geometry_at(x).reeb();
        const Vector grad = field(cosym, FieldKind::Gradient)(x);
        const Vector xh = field(cosym, FieldKind::Hamiltonian)(x);
        const double rh = cosym.differential(x).dot(r);
        CHECK(max_abs(xh - (grad - rh * r)) <= 1e-12);
        CHECK(max_abs(field(cosym, FieldKind::Evolution)(x) - (xh + r)) <= 1e-12);
      }
      {
        const Vector x = random_state(rng, contact);
        const Vector r = contact.geometry_at(x).reeb();
        const double h = contact.energy(x);
        const double rh = contact.differential(x).dot(r);
        const Vector grad = field(contact, FieldKind::Gradient)(x);
        const Vector xh = field(contact, FieldKind::Hamiltonian)(x);
        CHECK(max_abs(xh - (grad - (rh + h) * r)) <= 1e-12);
        CHECK(max_abs(field(contact, FieldKind::Evolution)(x) - (xh + h * r)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("SHS fields against cosymplectic and contact") {
  Rng rng(13);
  for (int n = 1; n <= 2; ++n) {
    // a = b = 0: the chart (q, p, z) is the cosymplectic chart (q, p, t).
    const Expression h = parse("0.5*p1^2 + q1^2*z + sin(z)*p" + std::to_string(n));
    const PhaseSystem shs(Kind::SHS, n, h);
    std::string renamed = "0.5*p1^2 + q1^2*t + sin(t)*p" + std::to_string(n);
    const PhaseSystem cosym(Kind::Cosymplectic, n, parse(renamed));
    const ShsCoefficients like_contact = contact_like_shs(n);
    const PhaseSystem shs_contact(Kind::SHS, n, h, {}, &like_contact);
    const PhaseSystem contact(Kind::Contact, n, h);
    for (int s = 0; s < 30; ++s) {
      const Vector x = random_state(rng, shs);
      CHECK(max_abs(field(shs, FieldKind::Gradient)(x) - field(cosym, FieldKind::Gradient)(x)) <= 1e-12);
      // Lambda of a stable Hamiltonian structure is opposite to the contact one.
      CHECK(max_abs(field(shs, FieldKind::Hamiltonian)(x) + field(cosym, FieldKind::Hamiltonian)(x)) <= 1e-12);
      CHECK(max_abs(field(shs_contact, FieldKind::Hamiltonian)(x) + field(contact, FieldKind::Hamiltonian)(x)) <= 1e-12);
    }
  }
}

TEST_CASE("musical roundtrip along trajectories") {
  Rng rng(14);
  for (const PhaseSystem& sys : sample_systems(rng, 2)) {
    const Vector x0 = random_state(rng, sys);
    for (FieldKind fk : {FieldKind::Gradient, FieldKind::Hamiltonian}) {
      IntegrationOptions opts;
      opts.step = 1e-2;
      const Trajectory traj = integrate(sys, fk, x0, 0.0, 0.5, opts);
      const VectorField f = field(sys, fk);
      for (std::size_t k = 0; k < traj.states.size(); k += 10) {
        const Vector& x = traj.states[k];
        const LinearGeometry g = sys.geometry_at(x);
        const Vector dh = sys.differential(x);
        const double h = sys.energy(x);
        Vector expected = dh;
        if (fk == FieldKind::Hamiltonian) {
          switch (sys.kind()) {
            case Kind::Symplectic: break;
            case Kind::Cosymplectic: expected = dh - dh.dot(g.reeb()) * g.theta(); break;
            case Kind::Contact: expected = dh - (dh.dot(g.reeb()) + h) * g.eta(); break;
            case Kind::Cocontact:
              expected = dh - (dh.dot(g.reeb()) + h) * g.eta() + (1.0 - dh.dot(g.reeb_t())) * g.theta();
              break;
            case Kind::SHS: {
              const double fh = evaluate(sys.conformal_factor(), sys.binding(x)) * h;
              expected = -dh + (dh.dot(g.reeb()) + fh) * g.eta();
              break;
            }
          }
        }
        CHECK(max_abs(g.flat(f(x)) - expected) <= 1e-10 * std::max(1.0, max_abs(expected)));
      }
    }
  }
}

TEST_CASE("brackets") {
  const PhaseSystem symp(Kind::Symplectic, 2, parse("p1"));
  Rng rng(15);
  for (int i = 0; i < 10; ++i) CHECK(bracket(symp, parse("q1"), parse("p1"), random_point(rng, Kind::Symplectic, 2)) == 1.0);
  CHECK(bracket(symp, parse("q1"), parse("p2"), random_point(rng, Kind::Symplectic, 2)) == 0.0);

  const PhaseSystem contact(Kind::Contact, 1, parse("p1"));
  CHECK(bracket(contact, parse("z"), parse("q1"), {{"q1", 0.0}, {"p1", 0.0}, {"z", 1.0}}) == 0.0);
  // Away from q1 = 0 only the g df/dz term survives.
  CHECK(bracket(contact, parse("z"), parse("q1"), {{"q1", 0.4}, {"p1", 0.0}, {"z", 1.0}}) == doctest::Approx(0.4));
  CHECK(bracket(contact, parse("z"), parse("q1"), {{"q1", 0.4}, {"p1", 0.5}, {"z", 1.0}}) == doctest::Approx(0.4));
  CHECK_THROWS_AS(bracket(contact, parse("z"), parse("q1"), {{"q1", 0.4}}), MissingCoordinate);

  // Cosymplectic brackets never see t-derivatives.
  const PhaseSystem cosym(Kind::Cosymplectic, 1, parse("p1"));
  for (int i = 0; i < 10; ++i) {
    const Binding at = random_point(rng, Kind::Cosymplectic, 1);
    CHECK(bracket(cosym, parse("q1*t"), parse("p1 + t^2"), at) == doctest::Approx(at.at("t")));
    CHECK(bracket(cosym, parse("t"), parse("q1*p1"), at) == 0.0);
  }

  ShsCoefficients bad{{parse("p1*q1^2")}, {Expression::number(0.0)}};
  CHECK_THROWS_AS(bracket(PhaseSystem(Kind::SHS, 1, parse("p1"), {}, &bad), parse("q1"), parse("p1"), {}),
                  UnsupportedCombination);
}

TEST_CASE("contact bracket in coordinates") {
  Rng rng(22);
  for (int n = 1; n <= 2; ++n) {
    const PhaseSystem sys(Kind::Contact, n, parse("p1"));
    for (int trial = 0; trial < 100; ++trial) {
      const Expression f = random_polynomial(rng, sys.coordinates());
      const Expression g = random_polynomial(rng, sys.coordinates());
      const Binding at = random_point(rng, Kind::Contact, n);
      auto d = [&](const Expression& e, const std::string& v) { return evaluate(differentiate(e, v), at); };
      double expected = evaluate(g, at) * d(f, "z") - evaluate(f, at) * d(g, "z");
      for (int i = 1; i <= n; ++i) {
        const std::string q = "q" + std::to_string(i), p = "p" + std::to_string(i);
        expected += d(f, p) * d(g, q) - d(f, q) * d(g, p) + at.at(p) * (d(f, p) * d(g, "z") - d(g, p) * d(f, "z"));
      }
      CHECK(std::abs(bracket(sys, f, g, at) - expected) <= 1e-12 * std::max(1.0, std::abs(expected)));
    }
  }
}

TEST_CASE("bracket axioms on random polynomials") {
  Rng rng(16);
  for (const PhaseSystem& sys : sample_systems(rng, 2)) {
    const auto& names = sys.coordinates();
    const bool poisson = sys.kind() == Kind::Symplectic || sys.kind() == Kind::Cosymplectic ||
                         (sys.kind() == Kind::SHS && evaluate(sys.conformal_factor(), {}) == 0.0);
    for (int trial = 0; trial < 200; ++trial) {
      const Expression f = random_polynomial(rng, names);
      const Expression g = random_polynomial(rng, names);
      const Expression h = random_polynomial(rng, names);
      const Binding at = random_point(rng, sys.kind(), sys.n());

      const double fg = bracket(sys, f, g, at);
      CHECK(std::abs(fg + bracket(sys, g, f, at)) <= 1e-12);
      // Numeric assembly from Lambda and E matches the closed form.
      CHECK(std::abs(fg - evaluate(bracket_expression(sys, f, g), at)) <= 1e-12 * std::max(1.0, std::abs(fg)));

      const double a = bracket(sys, f, bracket_expression(sys, g, h), at);
      const double b = bracket(sys, g, bracket_expression(sys, h, f), at);
      const double c = bracket(sys, h, bracket_expression(sys, f, g), at);
      CHECK(std::abs(a + b + c) <= 1e-8 * std::max({1.0, std::abs(a), std::abs(b), std::abs(c)}));

      if (poisson) {
        const double lhs = bracket(sys, f, g * h, at);
        const double rhs = fg * evaluate(h, at) + evaluate(g, at) * bracket(sys, f, h, at);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
      }
    }
  }
}

TEST_CASE("integration of the harmonic oscillator") {
  const PhaseSystem osc(Kind::Symplectic, 1, parse("(q1^2 + p1^2)/2"));
  const Vector x0 = vec({1.0, 0.0});
  const double period = 2.0 * std::acos(-1.0);
  const Trajectory traj = integrate(osc, FieldKind::Hamiltonian, x0, 0.0, period);
  CHECK(traj.times.size() == 6285);
  CHECK(traj.times.back() == doctest::Approx(period));
  CHECK(max_abs(traj.states.back() - x0) <= 1e-6);
  double drift = 0.0;
  for (double e : traj.energy) drift = std::max(drift, std::abs(e - 0.5));
  CHECK(drift <= 1e-8);
  for (std::size_t k = 1; k < traj.times.size(); ++k) REQUIRE(traj.times[k] > traj.times[k - 1]);

  CHECK_THROWS_AS(integrate(osc, FieldKind::Hamiltonian, x0, 0.0, 1.0, {.step = 0.0}), InvalidDimension);
  CHECK_THROWS_AS(integrate(osc, FieldKind::Hamiltonian, vec({NAN, 0.0}), 0.0, 1.0), NonFiniteState);
}

TEST_CASE("damped oscillator against the matrix exponential") {
  const PhaseSystem damped(Kind::Contact, 1, parse("p1^2/2 + q1^2/2 + 0.2*z"));
  Eigen::Matrix2d a;
  a << 0.0, 1.0, -1.0, -0.2;
  auto exact_q = [&](double t) {
    const Eigen::Matrix2d m = (a * t).exp();
    return m(0, 0);
  };
  const double wd = std::sqrt(0.99);
  CHECK(exact_q(3.0) == doctest::Approx(std::exp(-0.3) * (std::cos(wd * 3.0) + 0.1 / wd * std::sin(wd * 3.0))));

  const Vector x0 = vec({1.0, 0.0, 0.0});
  const Trajectory traj = integrate(damped, FieldKind::Hamiltonian, x0, 0.0, 10.0);
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.times.size(); ++k)
    worst = std::max(worst, std::abs(traj.states[k](0) - exact_q(traj.times[k])));
  CHECK(worst <= 1e-6);

  IntegrationOptions adaptive;
  adaptive.adaptive = true;
  adaptive.step = 0.1;
  const Trajectory dp = integrate(damped, FieldKind::Hamiltonian, x0, 0.0, 10.0, adaptive);
  CHECK(dp.times.back() == 10.0);
  CHECK(dp.times.size() < traj.times.size());
  double adaptive_err = 0.0;
  for (std::size_t k = 0; k < dp.times.size(); ++k)
    adaptive_err = std::max(adaptive_err, std::abs(dp.states[k](0) - exact_q(dp.times[k])));
  CHECK(adaptive_err <= 1e-6);

  // Fourth order: halving the step divides the endpoint error by about 16.
  auto endpoint_error = [&](double h) {
    IntegrationOptions o;
    o.step = h;
    return std::abs(integrate(damped, FieldKind::Hamiltonian, x0, 0.0, 10.0, o).states.back()(0) - exact_q(10.0));
  };
  const double ratio = endpoint_error(0.1) / endpoint_error(0.05);
  CHECK(ratio >= 12.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("blow-up reports the last finite time") {
  const PhaseSystem sys(Kind::Symplectic, 1, parse("p1^2/2 - q1^3/3"));
  try {
    integrate(sys, FieldKind::Hamiltonian, vec({1.0, 1.0}), 0.0, 50.0, {.step = 1e-2});
    FAIL("expected NonFiniteState");
  } catch (const NonFiniteState& err) {
    CHECK(err.last_good_time() > 0.5);
    CHECK(err.last_good_time() < 5.0);
  }
}

TEST_CASE("evolution of time and energy laws") {
  const PhaseSystem cosym(Kind::Cosymplectic, 1, parse("p1^2/2 + q1^2*(1 + 0.5*t)"));
  const Trajectory e = integrate(cosym, FieldKind::Evolution, vec({0.5, 0.1, 2.0}), 0.0, 3.0);
  for (std::size_t k = 0; k < e.times.size(); ++k) CHECK(e.states[k](2) == doctest::Approx(2.0 + e.times[k]).epsilon(1e-12));
  const EnergyRates er = energy_rates(cosym, e);
  CHECK(er.law == "dH/dt = dH/dt_partial");
  CHECK(er.max_law_residual() <= 1e-12);

  const PhaseSystem damped(Kind::Contact, 1, parse("p1^2/2 + q1^2/2 + 0.2*z"));
  const Trajectory xh = integrate(damped, FieldKind::Hamiltonian, vec({1.0, 0.0, 0.0}), 0.0, 10.0);
  const EnergyRates dr = energy_rates(damped, xh);
  CHECK(dr.law == "dH/dt = -H dH/dz");
  CHECK(dr.max_law_residual() <= 1e-7);
  CHECK(dr.entropy_residual.empty());

  Rng rng(17);
  for (int n = 1; n <= 2; ++n) {
    const PhaseSystem contact(Kind::Contact, n, sample_hamiltonian(Kind::Contact, n));
    for (int s = 0; s < 5; ++s) {
      const Trajectory ev = integrate(contact, FieldKind::Evolution, random_state(rng, contact), 0.0, 1.0);
      const EnergyRates r = energy_rates(contact, ev);
      double worst = 0.0;
      for (double v : r.rate) worst = std::max(worst, std::abs(v));
      CHECK(worst <= 1e-7);
      CHECK(r.max_entropy_residual() <= 1e-12);
    }
  }

  for (const PhaseSystem& sys : sample_systems(rng, 2)) {
    const Trajectory traj = integrate(sys, FieldKind::Hamiltonian, random_state(rng, sys), 0.0, 0.5);
    const EnergyRates r = energy_rates(sys, traj);
    CHECK(r.law != "none");
    CHECK(r.max_law_residual() <= 1e-10);
    if (sys.kind() != Kind::Symplectic) {
      const Trajectory grad = integrate(sys, FieldKind::Gradient, traj.states.front(), 0.0, 0.1);
      CHECK(energy_rates(sys, grad).law == "none");
    }
  }

  const PhaseSystem osc(Kind::Symplectic, 1, parse("(q1^2 + p1^2)/2"));
  const Trajectory period = integrate(osc, FieldKind::Hamiltonian, vec({1.0, 0.0}), 0.0, 2.0 * std::acos(-1.0));
  CHECK(energy_rates(osc, period).max_law_residual() <= 1e-12);
  CHECK_THROWS_AS(energy_rates(damped, period), MismatchedSystem);
  CHECK_THROWS_AS(energy_rates(PhaseSystem(Kind::Symplectic, 1, parse("q1^2")), period), MismatchedSystem);
}

TEST_CASE("contact form is rescaled along the Hamiltonian flow") {
  // L_X eta = -R(H) eta
  Rng rng(18);
  for (int n = 1; n <= 2; ++n) {
    const PhaseSystem sys(Kind::Contact, n, sample_hamiltonian(Kind::Contact, n));
    const VectorField f = field(sys, FieldKind::Hamiltonian);
    for (int s = 0; s < 20; ++s) {
      const Vector x = random_state(rng, sys);
      const LinearGeometry g = sys.geometry_at(x);
      const Matrix jac = field_jacobian(f, x, 1e-5);
      const Vector v = f(x);
      // (L_X eta)_a = X^b d_b eta_a + eta_b d_a X^b, and only eta_q = -p varies.
      Vector lie = jac.transpose() * g.eta();
      for (int i = 0; i < n; ++i) lie(q_index(n, i)) -= v(p_index(n, i));
      const double rh = sys.differential(x).dot(g.reeb());
      CHECK(max_abs(lie + rh * g.eta()) <= 1e-8);
    }
  }
}

TEST_CASE("tangent forms match the coordinate expressions") {
  Rng rng(19);
  const PhaseSystem contact(Kind::Contact, 1, parse("p1"));
  const PhaseSystem cosym(Kind::Cosymplectic, 1, parse("p1"));
  for (int s = 0; s < 10; ++s) {
    const Vector x = random_state(rng, contact);
    const Vector xd = random_vector(rng, 3);
    const double p = x(1), qd = xd(0), zd = xd(2);
    // coordinates (q, p, z, qdot, pdot, zdot)
    Matrix expected = Matrix::Zero(6, 6);
    wedge(expected, 0, 3, p * p);
    wedge(expected, 0, 1, 2.0 * p * qd - zd);
    wedge(expected, 0, 4, -1.0);
    wedge(expected, 0, 5, -p);
    wedge(expected, 1, 3, 1.0);
    wedge(expected, 2, 5, 1.0);
    wedge(expected, 2, 3, -p);
    wedge(expected, 2, 1, -qd);
    CHECK(max_abs((tangent_form(contact, x, xd) - expected).reshaped()) <= 1e-14);

    Matrix co = Matrix::Zero(6, 6);
    wedge(co, 0, 4, -1.0);
    wedge(co, 3, 1, -1.0);
    wedge(co, 5, 2, -1.0);
    CHECK(max_abs((tangent_form(cosym, random_state(rng, cosym), xd) - co).reshaped()) <= 1e-14);
  }
}

TEST_CASE("fields as Lagrangian sections") {
  Rng rng(20);
  for (const PhaseSystem& sys : sample_systems(rng, 2)) {
    for (int s = 0; s < 5; ++s) {
      const Vector x = random_state(rng, sys);
      CHECK(lift_residual(sys, FieldKind::Gradient, LiftTest::GradientImage, x) <= 1e-12);
      CHECK(lift_residual(sys, FieldKind::Gradient, LiftTest::ModifiedForm, x) <= 1e-6);
      CHECK(lift_residual(sys, FieldKind::Hamiltonian, LiftTest::ModifiedForm, x) <= 1e-6);
      if (sys.kind() == Kind::Cosymplectic || sys.kind() == Kind::Contact)
        CHECK(lift_residual(sys, FieldKind::Evolution, LiftTest::ModifiedForm, x) <= 1e-6);
      if (sys.kind() == Kind::Symplectic)
        CHECK(lift_residual(sys, FieldKind::Hamiltonian, LiftTest::GradientImage, x) <= 1e-12);
      if (sys.kind() == Kind::Contact || sys.kind() == Kind::Cocontact) {
        CHECK(lift_residual(sys, FieldKind::Hamiltonian, LiftTest::LegendrianLift, x) <= 1e-6);
        // Unmodified, the Hamiltonian section is not Lagrangian.
        CHECK(lift_residual(sys, FieldKind::Hamiltonian, LiftTest::GradientImage, x) > 1e-3);
      }
    }
  }
  const PhaseSystem osc(Kind::Symplectic, 1, parse("p1^2"));
  CHECK_THROWS_AS(lift_residual(osc, FieldKind::Hamiltonian, LiftTest::LegendrianLift, vec({0.0, 1.0})),
                  UnsupportedCombination);
  CHECK_THROWS_AS(lift_residual(osc, FieldKind::Hamiltonian, LiftTest::ModifiedForm, vec({0.0, 1.0}), 0.0),
                  InvalidDimension);
  CHECK(lift_test_from_string("legendrian_lift") == LiftTest::LegendrianLift);
}

TEST_CASE("cosymplectic correction sign") {
  // With a time-dependent Hamiltonian only one sign of dR(H) ^ theta makes X_H Lagrangian.
  const PhaseSystem sys(Kind::Cosymplectic, 1, parse("p1^2/2 + q1^2*t + sin(t)*p1"));
  const VectorField f = field(sys, FieldKind::Hamiltonian);
  Rng rng(21);
  for (int s = 0; s < 10; ++s) {
    const Vector x = random_state(rng, sys);
    const Matrix jac = field_jacobian(f, x, 1e-5);
    Matrix flipped = tangent_form(sys, x, f(x));
    flipped.topLeftCorner(3, 3) += exact_form(symbolic_gradient(sys, sys.partial(2), x), 0.0, sys.geometry_at(x).theta(), Matrix());
    CHECK(max_abs(section_pullback(modified_tangent_form(sys, FieldKind::Hamiltonian, x, f(x)), jac).reshaped()) <= 1e-6);
    CHECK(max_abs(section_pullback(flipped, jac).reshaped()) > 1e-3);
  }
}

TEST_CASE("cocontact lift needs the time rate") {
  // The section X_H x R_z(H) x 0 is Legendrian only when H does not depend on t.
  Rng rng(23);
  const PhaseSystem autonomous(Kind::Cocontact, 1, parse("p1^2/2 + q1^2/2 + 0.3*z*p1"));
  const PhaseSystem driven(Kind::Cocontact, 1, parse("p1^2/2 + q1^2/2 + 0.3*z*p1 + sin(t)*q1"));
  for (int s = 0; s < 10; ++s) {
    const Vector x = random_state(rng, driven);
    CHECK(lift_residual(autonomous, FieldKind::Hamiltonian, LiftTest::LegendrianLift, x) <= 1e-6);
    CHECK(lift_residual(driven, FieldKind::Hamiltonian, LiftTest::LegendrianLift, x) <= 1e-6);
    // eta^c + s eta^v + theta^c pulls back to -R_t(H) dt.
    const VectorField f = field(driven, FieldKind::Hamiltonian);
    const Matrix jac = field_jacobian(f, x, 1e-5);
    const Vector v = f(x);
    const double p = x(1), rz = driven.differential(x)(2);
    Vector eta = jac.row(2).transpose() - p * jac.row(0).transpose() + jac.row(3).transpose();
    eta(0) -= v(1) + rz * p;
    eta(2) += rz;
    CHECK(eta(3) == doctest::Approx(-driven.differential(x)(3)).epsilon(1e-6));
    CHECK(eta.head(3).cwiseAbs().maxCoeff() <= 1e-6);
  }
}
