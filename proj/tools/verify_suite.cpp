#include "verify_suite.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numbers>
#include <thread>
#include <unsupported/Eigen/MatrixFunctions>

#include "geomech/dynamics.hpp"
#include "geomech/error.hpp"
#include "geomech/lagrangian.hpp"
#include "geomech/reduction.hpp"

namespace geomech::verify {
namespace {

constexpr Kind kAllKinds[] = {Kind::Symplectic, Kind::Cosymplectic, Kind::Contact, Kind::Cocontact, Kind::SHS};

struct Worst {
  double value = 0.0;
  void operator()(double v) { value = std::max(value, std::isnan(v) ? INFINITY : v); }
};

Outcome upper(double residual, double tolerance, bool extra_ok = true, std::string detail = {}) {
  return {residual, tolerance, Bound::Upper, extra_ok, std::move(detail)};
}

double max_abs(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

Vector random_state(Rng& rng, const PhaseSystem& sys) { return sys.state(random_point(rng, sys.kind(), sys.n())); }

// Touches every chart coordinate, with z and t terms where the chart has them.
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

ShsCoefficients constant_shs(int n, bool contact_like) {
  ShsCoefficients s;
  for (int i = 1; i <= n; ++i) {
    s.a.push_back(contact_like ? parse("-p" + std::to_string(i)) : Expression::number(0.0));
    s.b.push_back(Expression::number(0.0));
  }
  return s;
}

PhaseSystem sample_system(Rng& rng, Kind kind, int n) {
  if (kind != Kind::SHS) return PhaseSystem(kind, n, sample_hamiltonian(kind, n));
  const ShsCoefficients closed = random_closed_shs(rng, n);
  return PhaseSystem(kind, n, sample_hamiltonian(kind, n), {}, &closed);
}

Expression random_polynomial(Rng& rng, const std::vector<std::string>& names) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  auto pick = [&] { return names[static_cast<std::size_t>(random_int(rng, 0, static_cast<int>(names.size()) - 1))]; };
  Expression out = Expression::number(coef(rng));
  const int terms = random_int(rng, 1, 4);
  for (int k = 0; k < terms; ++k) {
    Expression term = Expression::number(coef(rng)) * Expression::name(pick());
    if (random_int(rng, 0, 1) == 1) term = term * Expression::name(pick());
    out = out + term;
  }
  return out;
}

// ---------------------------------------------------------------- dynamics

Outcome damped_oscillator(Rng&) {
  const PhaseSystem sys(Kind::Contact, 1, parse("p1^2/(2*m) + k^2*m*q1^2/2 + g*z"), {{"m", 1.0}, {"k", 1.0}, {"g", 0.2}});
  const Trajectory traj = integrate(sys, FieldKind::Hamiltonian, vec({1.0, 0.0, 0.0}), 0.0, 10.0, {.step = 1e-3});
  Eigen::Matrix2d a;
  a << 0.0, 1.0, -1.0, -0.2;
  Worst worst;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const Eigen::Matrix2d flow = (a * traj.times[k]).exp();
    worst(std::abs(traj.states[k](0) - flow(0, 0)));
  }
  const double h_end = traj.energy.back();
  return upper(worst.value, 1e-6, std::abs(h_end) < std::abs(traj.energy.front()),
               "samples=" + std::to_string(traj.times.size()));
}

Outcome contact_dissipation(Rng& rng) {
  Worst worst;
  const PhaseSystem damped(Kind::Contact, 1, parse("p1^2/2 + q1^2/2 + 0.2*z"));
  const EnergyRates base = energy_rates(damped, integrate(damped, FieldKind::Hamiltonian, vec({1.0, 0.0, 0.0}), 0.0, 10.0));
  worst(base.max_law_residual());
  for (int n = 1; n <= 2; ++n) {
    const PhaseSystem sys(Kind::Contact, n, sample_hamiltonian(Kind::Contact, n));
    for (int s = 0; s < 5; ++s)
      worst(energy_rates(sys, integrate(sys, FieldKind::Hamiltonian, random_state(rng, sys), 0.0, 1.0)).max_law_residual());
  }
  return upper(worst.value, 1e-7, base.law == "dH/dt = -H dH/dz", "law=" + base.law);
}

Outcome contact_evolution(Rng& rng) {
  Worst worst;
  for (int n = 1; n <= 2; ++n) {
    const PhaseSystem sys(Kind::Contact, n, sample_hamiltonian(Kind::Contact, n));
    for (int s = 0; s < 5; ++s) {
      const EnergyRates r = energy_rates(sys, integrate(sys, FieldKind::Evolution, random_state(rng, sys), 0.0, 1.0));
      for (double v : r.rate) worst(std::abs(v));
    }
  }
  return upper(worst.value, 1e-7);
}

Outcome symplectic_period(Rng&) {
  const PhaseSystem osc(Kind::Symplectic, 1, parse("(q1^2 + p1^2)/2"));
  const Trajectory traj = integrate(osc, FieldKind::Hamiltonian, vec({1.0, 0.0}), 0.0, 2.0 * std::numbers::pi);
  Worst drift;
  for (double e : traj.energy) drift(std::abs(e - traj.energy.front()));
  return upper(drift.value, 1e-8);
}

Outcome cosymplectic_time(Rng& rng) {
  Worst worst;
  for (int n = 1; n <= 2; ++n) {
    const PhaseSystem sys(Kind::Cosymplectic, n, sample_hamiltonian(Kind::Cosymplectic, n));
    const VectorField f = field(sys, FieldKind::Evolution);
    const int t = *t_index(Kind::Cosymplectic, n);
    for (int s = 0; s < 5; ++s) {
      const Vector x0 = random_state(rng, sys);
      worst(std::abs(f(x0)(t) - 1.0));
      const Trajectory traj = integrate(sys, FieldKind::Evolution, x0, 0.0, 2.0);
      for (std::size_t k = 0; k < traj.times.size(); ++k) worst(std::abs(traj.states[k](t) - x0(t) - traj.times[k]));
    }
  }
  return upper(worst.value, 1e-12);
}

// ---------------------------------------------------------------- complements

struct ComplementTrial {
  const LinearGeometry g;
  Subspace a, b, pa, pb;
};

ComplementTrial complement_trial(Rng& rng, Kind kind) {
  const int n = random_int(rng, 1, 3);
  LinearGeometry g = random_geometry(rng, kind, n);
  const int d = g.dim();
  Subspace a = random_subspace(rng, d, random_int(rng, 0, d));
  Subspace b = random_subspace(rng, d, random_int(rng, 0, d));
  Subspace pa = lambda_orthogonal(g, a);
  Subspace pb = lambda_orthogonal(g, b);
  return {std::move(g), std::move(a), std::move(b), std::move(pa), std::move(pb)};
}

Outcome complements(Rng& rng, Kind kind) {
  Worst worst;
  int dim_errors = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const ComplementTrial c = complement_trial(rng, kind);
    const LinearGeometry& g = c.g;
    const int d = g.dim();
    worst(span_distance(lambda_orthogonal(g, intersect(c.a, c.b)), sum(c.pa, c.pb)));
    worst(containment_residual(intersect(c.pa, c.pb), lambda_orthogonal(g, sum(c.a, c.b))));
    switch (kind) {
      case Kind::Symplectic:
        worst(span_distance(lambda_orthogonal(g, sum(c.a, c.b)), intersect(c.pa, c.pb)));
        worst(span_distance(lambda_orthogonal(g, c.pa), c.a));
        if (c.pa.dim() != d - c.a.dim()) ++dim_errors;
        break;
      case Kind::Cosymplectic:
      case Kind::SHS: {
        const Subspace h = g.horizontal();
        worst(span_distance(c.pa, form_orthogonal(g.two_form(), intersect(c.a, h), h)));
        if (kind == Kind::Cosymplectic) worst(span_distance(lambda_orthogonal(g, c.pa), intersect(c.a, h)));
        if (c.pa.dim() != 2 * g.n() - intersect(c.a, h).dim()) ++dim_errors;
        break;
      }
      case Kind::Contact: {
        const Subspace full = Subspace::full(d);
        worst(containment_residual(c.pa, intersect(form_orthogonal(g.two_form(), c.a, full), g.horizontal())));
        const Subspace rv = random_subspace_between(rng, Subspace::span(g.reeb()), full, random_int(rng, 1, d));
        worst(span_distance(lambda_orthogonal(g, rv), intersect(form_orthogonal(g.two_form(), rv, full), g.horizontal())));
        const Subspace hz = random_subspace_of(rng, g.horizontal(), random_int(rng, 0, d - 1));
        worst(span_distance(lambda_orthogonal(g, hz), intersect(form_orthogonal(g.two_form(), hz, full), g.horizontal())));
        break;
      }
      case Kind::Cocontact: {
        const Subspace htz = g.horizontal();
        if (htz.dim() != 2 * g.n()) ++dim_errors;
        worst(span_distance(c.pa, form_orthogonal(g.two_form(), intersect(c.a, htz), htz)));
        if (c.pa.dim() != 2 * g.n() - intersect(c.a, htz).dim()) ++dim_errors;
        break;
      }
    }
  }
  return upper(worst.value, 1e-8, dim_errors == 0, "dimension_mismatches=" + std::to_string(dim_errors));
}

// The equality form of the cosymplectic sum rule, on generic pairs.
Outcome cosymplectic_sum_rule(Rng& rng) {
  Worst worst;
  int violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const ComplementTrial c = complement_trial(rng, Kind::Cosymplectic);
    const double gap = span_distance(lambda_orthogonal(c.g, sum(c.a, c.b)), intersect(c.pa, c.pb));
    worst(gap);
    if (gap > 1e-8) ++violations;
  }
  return upper(worst.value, 1e-8, true, "violations=" + std::to_string(violations) + "/200");
}

Outcome lagrangian_dimensions(Rng& rng) {
  int errors = 0;
  Worst worst;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = random_int(rng, 1, 3);
    const LinearGeometry g = random_geometry(rng, Kind::Cosymplectic, n);
    const Matrix s = random_symmetric(rng, n);
    Matrix basis = Matrix::Zero(2 * n + 1, n);
    basis.topRows(n) = Matrix::Identity(n, n);
    basis.middleRows(n, n) = s;
    const Subspace lag = Subspace::span(basis);
    const Subspace widened = sum(lag, Subspace::span(g.reeb()));
    for (const Subspace& l : {lag, widened}) {
      const ClassificationReport r = classify_subspace(g, l);
      if (!r.lagrangian || r.complement_dim != n) ++errors;
    }
    worst(containment_residual(g.horizontal(), lambda_orthogonal(g, widened)));

    const LinearGeometry symp = random_geometry(rng, Kind::Symplectic, n);
    const Subspace ls = random_lagrangian(rng, symp, false);
    if (ls.dim() != n || !classify_subspace(symp, ls).lagrangian) ++errors;
    worst(span_distance(lambda_orthogonal(symp, ls), ls));
  }
  return upper(worst.value, 1e-8, errors == 0, "dimension_mismatches=" + std::to_string(errors));
}

// ---------------------------------------------------------------- reduction

LinearGeometry case_geometry(Rng& rng, Kind kind, int n) {
  if (kind != Kind::SHS) return random_geometry(rng, kind, n);
  const ShsCoefficients shs = random_closed_shs(rng, n);
  return LinearGeometry::standard(kind, n, random_point(rng, kind, n), &shs);
}

int brute_quotient_dim(const LinearGeometry& g, const Subspace& w) {
  const Matrix perp_cols = g.jacobi_pair().lambda.transpose() * annihilator(w).basis();
  Matrix joined(g.dim(), w.dim() + perp_cols.cols());
  joined << w.basis(), perp_cols;
  const int inside = w.dim() + numerical_rank(perp_cols) - numerical_rank(joined);
  return w.dim() - inside;
}

Outcome reduction_cell(Rng& rng, Kind kind, ReductionCase rc) {
  Worst independence;
  int failures = 0;
  std::string first;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = random_int(rng, 1, 3);
    const LinearGeometry g = case_geometry(rng, kind, n);
    const auto [lo, hi] = coisotropic_dim_range(g, rc);
    const int k = random_int(rng, lo, hi);
    const Subspace w = random_coisotropic(rng, g, rc, k);
    const ReductionReport r = linear_reduce(g, w);
    bool ok = w.dim() == k && r.verticality_case == rc && r.quotient.dim() == r.expected_dim &&
              r.quotient.dim() == brute_quotient_dim(g, w) &&
              r.expected_dim == expected_quotient_dim(kind, n, rc, k) && r.passed();
    if (r.quotient.dim() > 0) ok = ok && r.reduced_structure && r.reduced_structure->kind() == reduced_kind(kind, rc);
    if (!ok && failures++ == 0) first = "n=" + std::to_string(n) + " k=" + std::to_string(k);
    independence(representative_independence(g, w, rng));
  }
  return upper(independence.value, 1e-9, failures == 0,
               "failed_cases=" + std::to_string(failures) + (first.empty() ? "" : " first: " + first));
}

Outcome projection_cell(Rng& rng, Kind kind, ReductionCase rc) {
  int failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = random_int(rng, 1, 3);
    const LinearGeometry g = case_geometry(rng, kind, n);
    const auto [lo, hi] = coisotropic_dim_range(g, rc);
    const Subspace w = random_coisotropic(rng, g, rc, random_int(rng, lo, hi));
    const Subspace l = random_lagrangian(rng, g, trial % 2 == 0);
    const ProjectionReport p = project_through_reduction(g, l, w);
    if (!p.lagrangian || p.image.dim() != p.expected_dim) ++failures;
  }
  return upper(failures, 0.0, true, "pairs=100");
}

// The printed SHS definition reduces to "the complement is horizontal"; count how often it
// accepts subspaces that the complement-based predicate rejects.
Outcome shs_lagrangian_predicates(Rng& rng) {
  int rejected = 0, literal_only = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = random_int(rng, 1, 3);
    const LinearGeometry g = case_geometry(rng, Kind::SHS, n);
    if (!classify_subspace(g, random_lagrangian(rng, g, trial % 2 == 0)).lagrangian) ++rejected;
    const Subspace other = random_subspace(rng, g.dim(), random_int(rng, 1, g.dim()));
    const ClassificationReport r = classify_subspace(g, other);
    if (r.lagrangian_literal && !r.lagrangian) ++literal_only;
  }
  return upper(rejected, 0.0, true, "literal_predicate_accepts_non_lagrangian=" + std::to_string(literal_only) + "/100");
}

// ---------------------------------------------------------------- complex projective space

Outcome complex_projective(Rng& rng, int n, int samples) {
  const CpReport r = cp_example(n, samples, rng);
  return upper(r.max_angle, 1e-8, r.passed && r.reduced_dim == 2 * n,
               "reduced_dim=" + std::to_string(r.reduced_dim) + " samples=" + std::to_string(r.samples));
}

// ---------------------------------------------------------------- lifts

Outcome gradient_image(Rng& rng) {
  Worst worst;
  for (Kind kind : kAllKinds)
    for (int n = 1; n <= 2; ++n) {
      const PhaseSystem sys = sample_system(rng, kind, n);
      for (int s = 0; s < 10; ++s) {
        const Vector x = random_state(rng, sys);
        worst(lift_residual(sys, FieldKind::Gradient, LiftTest::GradientImage, x));
        if (kind == Kind::Symplectic) worst(lift_residual(sys, FieldKind::Hamiltonian, LiftTest::GradientImage, x));
      }
    }
  return upper(worst.value, 1e-12);
}

Outcome modified_form(Rng& rng) {
  Worst worst;
  for (Kind kind : {Kind::Cosymplectic, Kind::Contact, Kind::Cocontact, Kind::SHS})
    for (int n = 1; n <= 2; ++n) {
      const PhaseSystem sys = sample_system(rng, kind, n);
      for (int s = 0; s < 10; ++s) {
        const Vector x = random_state(rng, sys);
        worst(lift_residual(sys, FieldKind::Hamiltonian, LiftTest::ModifiedForm, x, 1e-5));
        if (kind == Kind::Cosymplectic || kind == Kind::Contact)
          worst(lift_residual(sys, FieldKind::Evolution, LiftTest::ModifiedForm, x, 1e-5));
      }
    }
  return upper(worst.value, 1e-6);
}

Outcome legendrian_lift(Rng& rng, Kind kind) {
  Worst worst;
  for (int n = 1; n <= 2; ++n) {
    const PhaseSystem sys(kind, n, sample_hamiltonian(kind, n));
    for (int s = 0; s < 20; ++s)
      worst(lift_residual(sys, FieldKind::Hamiltonian, LiftTest::LegendrianLift, random_state(rng, sys), 1e-5));
  }
  return upper(worst.value, 1e-6);
}

// ---------------------------------------------------------------- brackets

Outcome jacobi_identity(Rng& rng, Kind kind) {
  const PhaseSystem sys = sample_system(rng, kind, 2);
  Worst worst;
  for (int trial = 0; trial < 200; ++trial) {
    const Expression f = random_polynomial(rng, sys.coordinates());
    const Expression g = random_polynomial(rng, sys.coordinates());
    const Expression h = random_polynomial(rng, sys.coordinates());
    const Binding at = random_point(rng, kind, 2);
    const double a = bracket(sys, f, bracket_expression(sys, g, h), at);
    const double b = bracket(sys, g, bracket_expression(sys, h, f), at);
    const double c = bracket(sys, h, bracket_expression(sys, f, g), at);
    worst(std::abs(a + b + c) / std::max({1.0, std::abs(a), std::abs(b), std::abs(c)}));
  }
  return upper(worst.value, 1e-8);
}

Outcome contact_bracket_closed_form(Rng& rng) {
  Worst worst;
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
      worst(std::abs(bracket(sys, f, g, at) - expected) / std::max(1.0, std::abs(expected)));
    }
  }
  return upper(worst.value, 1e-12);
}

// ---------------------------------------------------------------- Herglotz

double damped_solution(double t, double gamma) {
  const double w = std::sqrt(1.0 - gamma * gamma / 4.0);
  return std::exp(-gamma * t / 2.0) * (std::cos(w * t) + gamma / (2.0 * w) * std::sin(w * t));
}

PathGrid damped_path(double gamma, int nodes, double amplitude = 0.0) {
  return PathGrid::sample(0.0, 5.0, nodes, [&](double t) {
    return Vector::Constant(1, damped_solution(t, gamma) + amplitude * std::sin(2.0 * std::numbers::pi * t));
  });
}

LagrangianSystem damped_lagrangian(double gamma) {
  return LagrangianSystem(1, parse("qdot1^2/2 - q1^2/2 - g*z"), {{"g", gamma}});
}

Outcome herglotz_conservative(Rng& rng) {
  const LagrangianSystem sys = damped_lagrangian(0.0);
  std::uniform_real_distribution<double> amp(-0.5, 0.5);
  Worst worst;
  for (int s = 0; s < 5; ++s) {
    const PathGrid path = damped_path(0.2, 400, amp(rng));
    const ResidualSeries h = herglotz_residual(sys, path);
    const ResidualSeries e = euler_lagrange_residual(sys, path);
    for (std::size_t k = 0; k < h.residual.size(); ++k) worst(max_abs(h.residual[k] - e.residual[k]));
  }
  return upper(worst.value, 1e-12);
}

Outcome herglotz_damped(Rng&) {
  const LagrangianSystem sys = damped_lagrangian(0.2);
  const double fine = herglotz_residual(sys, damped_path(0.2, 400)).max();
  const double ratio = herglotz_residual(sys, damped_path(0.2, 200)).max() / fine;
  return upper(fine, 1e-4, ratio >= 3.5 && ratio <= 4.5, "refinement_ratio=" + std::to_string(ratio));
}

Outcome herglotz_criticality(Rng&) {
  const LagrangianSystem sys = damped_lagrangian(0.2);
  const double solution = action_gradient(sys, damped_path(0.2, 400)).cwiseAbs().maxCoeff();
  const double perturbed = action_gradient(sys, damped_path(0.2, 400, 0.5)).cwiseAbs().maxCoeff();
  return upper(solution, 1e-3, perturbed >= 1e-1, "perturbed=" + std::to_string(perturbed));
}

// ---------------------------------------------------------------- SHS compatibility

std::vector<Binding> shs_points(Rng& rng, int n, int count) {
  std::vector<Binding> points;
  for (int i = 0; i < count; ++i) points.push_back(random_point(rng, Kind::SHS, n));
  return points;
}

Outcome shs_factor(Rng& rng, bool contact_like) {
  const double target = contact_like ? 1.0 : 0.0;
  Worst worst;
  bool compatible = true;
  for (int n = 1; n <= 3; ++n) {
    const std::vector<Binding> points = shs_points(rng, n, 20);
    const ShsCompatibility c = shs_compatibility(n, constant_shs(n, contact_like), points);
    compatible = compatible && c.compatible;
    worst(c.residual);
    for (const Binding& p : points) worst(std::abs(evaluate(c.factor, p) - target));
  }
  return upper(worst.value, 1e-12, compatible);
}

Outcome shs_incompatible(Rng& rng) {
  double smallest = INFINITY;
  bool rejected = true;
  // With one degree of freedom every two-form is a multiple of omega, so start at n = 2.
  for (int n = 2; n <= 3; ++n) {
    const ShsCompatibility c = shs_compatibility(n, random_shs(rng, n), shs_points(rng, n, 20));
    rejected = rejected && !c.compatible;
    smallest = std::min(smallest, c.residual);
  }
  return {smallest, 1e-6, Bound::Lower, rejected, rejected ? "rejected" : "accepted"};
}

// ---------------------------------------------------------------- involutivity

// Largest ratio r(1e-4) / r(1e-3) over the points.
Outcome involutivity(const ConstraintManifold& manifold, const std::vector<Binding>& points) {
  Worst ratio, fine_level;
  for (const Binding& p : points) {
    const double coarse = involutivity_residual(manifold, p, 1e-3);
    const double fine = involutivity_residual(manifold, p, 1e-4);
    ratio(coarse > 0.0 ? fine / coarse : (fine > 0.0 ? INFINITY : 0.0));
    fine_level(fine);
  }
  return upper(ratio.value, 0.2, fine_level.value <= 1e-3, "max_fine_residual=" + std::to_string(fine_level.value));
}

Outcome involutivity_sphere(Rng& rng) {
  std::vector<Binding> points;
  for (int i = 0; i < 20; ++i) points.push_back(random_sphere_point(rng, 2));
  return involutivity(sphere(2), points);
}

Outcome involutivity_vertical(Rng& rng) {
  ConstraintManifold m;
  m.kind = Kind::Cosymplectic;
  m.n = 2;
  m.constraints = {parse("q1^2 + p1^2 + q2*p2 - 1")};
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::vector<Binding> points;
  for (int i = 0; i < 20; ++i) {
    const double q2 = u(rng), p2 = u(rng), t = u(rng), phi = angle(rng);
    const double r = std::sqrt(1.0 - q2 * p2);
    points.push_back({{"q1", r * std::cos(phi)}, {"p1", r * std::sin(phi)}, {"q2", q2}, {"p2", p2}, {"t", t}});
  }
  return involutivity(m, points);
}

// ---------------------------------------------------------------- catalog

std::string slug(ReductionCase c) {
  std::string s = to_string(c);
  std::replace(s.begin(), s.end(), '-', '_');
  std::replace(s.begin(), s.end(), ' ', '_');
  return s;
}

std::vector<CheckDef> build_catalog() {
  std::vector<CheckDef> out;
  auto add = [&](std::string id, std::string reference, int criterion, std::function<Outcome(Rng&)> run) {
    out.push_back({std::move(id), std::move(reference), criterion, std::move(run)});
  };

  add("dynamics.damped_oscillator", "contact Hamiltonian field of the damped oscillator", 1, damped_oscillator);
  add("dynamics.contact_dissipation", "dH/dt = -H R(H) along contact Hamiltonian flows", 2, contact_dissipation);
  add("dynamics.contact_evolution", "H is conserved by the contact evolution field", 2, contact_evolution);
  add("dynamics.symplectic_period", "H is conserved by symplectic Hamiltonian flows", 2, symplectic_period);
  add("dynamics.cosymplectic_time", "t = lambda + const along the cosymplectic evolution field", 2, cosymplectic_time);

  for (Kind kind : kAllKinds)
    add("complements." + to_string(kind), "orthogonal complement identities, " + to_string(kind), 3,
        [kind](Rng& rng) { return complements(rng, kind); });
  add("complements.cosymplectic_sum_rule", "complement of a sum equals the intersection of complements, cosymplectic", 3,
      cosymplectic_sum_rule);
  add("complements.lagrangian_dimensions", "Lagrangian subspaces have n-dimensional complements", 3,
      lagrangian_dimensions);

  const std::pair<Kind, ReductionCase> cells[] = {
      {Kind::Symplectic, ReductionCase::Symplectic},
      {Kind::Cosymplectic, ReductionCase::Vertical},
      {Kind::Cosymplectic, ReductionCase::Horizontal},
      {Kind::Contact, ReductionCase::Vertical},
      {Kind::Contact, ReductionCase::Horizontal},
      {Kind::Cocontact, ReductionCase::TzVertical},
      {Kind::Cocontact, ReductionCase::TVerticalZHorizontal},
      {Kind::Cocontact, ReductionCase::ZVerticalTHorizontal},
      {Kind::Cocontact, ReductionCase::TzHorizontal},
      {Kind::SHS, ReductionCase::Vertical},
      {Kind::SHS, ReductionCase::Horizontal},
  };
  for (const auto& [kind, rc] : cells) {
    const std::string cell = to_string(kind) + "." + slug(rc);
    add("reduction." + cell, "coisotropic reduction, " + to_string(kind) + " " + to_string(rc) + " case", 4,
        [kind, rc](Rng& rng) { return reduction_cell(rng, kind, rc); });
    add("projection." + cell, "Lagrangian projection, " + to_string(kind) + " " + to_string(rc) + " case", 5,
        [kind, rc](Rng& rng) { return projection_cell(rng, kind, rc); });
  }

  add("projection.shs_lagrangian_definition", "SHS Lagrangian predicate, complement-based versus literal", 0,
      shs_lagrangian_predicates);

  add("cp.n1", "S^3 reduces to CP^1", 6, [](Rng& rng) { return complex_projective(rng, 1, 100); });
  add("cp.n2", "S^5 reduces to CP^2", 6, [](Rng& rng) { return complex_projective(rng, 2, 50); });

  add("lifts.gradient_image", "gradient fields are Lagrangian sections", 7, gradient_image);
  add("lifts.modified_form", "Hamiltonian fields are Lagrangian for the corrected tangent forms", 7, modified_form);
  add("lifts.legendrian_contact", "contact Hamiltonian fields lift to Legendrian sections", 7,
      [](Rng& rng) { return legendrian_lift(rng, Kind::Contact); });
  add("lifts.legendrian_cocontact", "cocontact Hamiltonian fields lift to Legendrian sections", 7,
      [](Rng& rng) { return legendrian_lift(rng, Kind::Cocontact); });

  for (Kind kind : kAllKinds)
    add("brackets.jacobi." + to_string(kind), "Jacobi identity of the bracket, " + to_string(kind), 8,
        [kind](Rng& rng) { return jacobi_identity(rng, kind); });
  add("brackets.contact_closed_form", "contact bracket in Darboux coordinates", 8, contact_bracket_closed_form);

  add("herglotz.conservative_limit", "Herglotz equations reduce to Euler-Lagrange without z", 9, herglotz_conservative);
  add("herglotz.damped_residual", "damped oscillator solves the Herglotz equations", 9, herglotz_damped);
  add("herglotz.criticality", "solutions are critical points of the Herglotz action", 9, herglotz_criticality);

  add("shs.cosymplectic_factor", "cosymplectic structure as SHS has f = 0", 10, [](Rng& rng) { return shs_factor(rng, false); });
  add("shs.contact_factor", "contact structure as SHS has f = 1", 10, [](Rng& rng) { return shs_factor(rng, true); });
  add("shs.incompatible_rejected", "d lambda = f omega fails for a generic pair", 10, shs_incompatible);

  add("involutivity.sphere", "orthogonal distribution of S^3 is involutive", 11, involutivity_sphere);
  add("involutivity.cosymplectic_vertical", "orthogonal distribution of a vertical cosymplectic constraint is involutive",
      11, involutivity_vertical);

  std::sort(out.begin(), out.end(), [](const CheckDef& a, const CheckDef& b) { return a.id < b.id; });
  return out;
}

}  // namespace

std::string to_string(Status status) {
  switch (status) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::Error: return "error";
  }
  return "error";
}

const std::vector<CheckDef>& catalog() {
  static const std::vector<CheckDef> checks = build_catalog();
  return checks;
}

std::vector<const CheckDef*> select(std::string_view suite) {
  std::vector<const CheckDef*> out;
  for (const CheckDef& c : catalog()) {
    const std::string_view id = c.id;
    if (suite == "all" || id == suite || (id.starts_with(suite) && id.size() > suite.size() && id[suite.size()] == '.'))
      out.push_back(&c);
  }
  return out;
}

std::vector<const CheckDef*> select(int criterion) {
  std::vector<const CheckDef*> out;
  for (const CheckDef& c : catalog())
    if (c.criterion == criterion) out.push_back(&c);
  return out;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t check_seed(std::uint64_t base, std::string_view id) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char ch : id) hash = (hash ^ static_cast<unsigned char>(ch)) * 0x100000001b3ULL;
  std::uint64_t state = base ^ hash;
  return splitmix64(state);
}

CheckResult run_check(const CheckDef& check, std::uint64_t base_seed) {
  CheckResult r;
  r.id = check.id;
  r.reference = check.reference;
  r.criterion = check.criterion;
  r.seed = check_seed(base_seed, check.id);
  const auto start = std::chrono::steady_clock::now();
  try {
    Rng rng(r.seed);
    r.outcome = check.run(rng);
    const Outcome& o = r.outcome;
    const bool within = std::isfinite(o.residual) &&
                        (o.bound == Bound::Upper ? o.residual <= o.tolerance : o.residual >= o.tolerance);
    r.status = within && o.extra_ok ? Status::Pass : Status::Fail;
  } catch (const Error& e) {
    r.status = Status::Error;
    r.error = e.code() + ": " + e.what();
  } catch (const std::exception& e) {
    r.status = Status::Error;
    r.error = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<CheckResult> run_checks(const std::vector<const CheckDef*>& checks, std::uint64_t base_seed,
                                    unsigned threads) {
  std::vector<CheckResult> results(checks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < checks.size(); i = next++) results[i] = run_check(*checks[i], base_seed);
  };
  const unsigned count = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(std::max<std::size_t>(1, checks.size())));
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < count; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  std::sort(results.begin(), results.end(), [](const CheckResult& a, const CheckResult& b) { return a.id < b.id; });
  return results;
}

}  // namespace geomech::verify
