#include <cmath>
#include <random>

#include "doctest.h"
#include "geomech/expr.hpp"

using namespace geomech;

namespace {

// Random polynomial/trig tree over q1, p1, z; kept away from domain edges.
Expression random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 7);
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  static const char* names[] = {"q1", "p1", "z"};
  switch (pick(rng)) {
    case 0: return Expression::number(std::round(coeff(rng) * 100.0) / 100.0);
    case 1: return Expression::name(names[rng() % 3]);
    case 2: return random_expr(rng, depth - 1) + random_expr(rng, depth - 1);
    case 3: return random_expr(rng, depth - 1) - random_expr(rng, depth - 1);
    case 4: return random_expr(rng, depth - 1) * random_expr(rng, depth - 1);
    case 5: return pow(random_expr(rng, depth - 1), Expression::number(static_cast<double>(rng() % 3 + 1)));
    case 6: return apply(Op::Sin, random_expr(rng, depth - 1));
    default: return apply(Op::Cos, random_expr(rng, depth - 1));
  }
}

}  // namespace

TEST_CASE("parse and evaluate") {
  CHECK(evaluate(parse("q1^2 + p1^2"), {{"q1", 1}, {"p1", 2}}) == 5.0);
  CHECK(evaluate(parse("p1^2/(2*m)"), {{"p1", 2}, {"m", 1}}) == 2.0);
  CHECK(evaluate(parse("exp(0)"), {}) == 1.0);
  const Binding origin{{"q1", 0}, {"p1", 0}, {"z", 0}, {"m", 1}, {"k", 1}, {"g", 0.2}};
  CHECK(evaluate(parse("p1^2/(2*m) + k^2*m*q1^2/2 + g*z"), origin) == 0.0);
  CHECK(evaluate(parse("-2^2"), {}) == -4.0);
  CHECK(evaluate(parse("2^-1"), {}) == 0.5);
  CHECK(evaluate(parse("  1.5e1 - 3 * 2 "), {}) == 9.0);
  CHECK(evaluate(parse("neg(q1)"), {{"q1", 3}}) == -3.0);
}

TEST_CASE("syntax errors carry offsets") {
  try {
    parse("sin(");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.offset() == 4);
  }
  CHECK_THROWS_AS(parse(""), SyntaxError);
  CHECK_THROWS_AS(parse("q1 +"), SyntaxError);
  CHECK_THROWS_AS(parse("(q1"), SyntaxError);
  CHECK_THROWS_AS(parse("q1 $ 2"), SyntaxError);
  CHECK_THROWS_AS(parse("tanh(q1)"), UnknownFunction);
}

TEST_CASE("evaluation errors") {
  CHECK_THROWS_AS(evaluate(parse("q1/p1"), {{"q1", 1}, {"p1", 0}}), DomainError);
  CHECK_THROWS_AS(evaluate(parse("ln(q1)"), {{"q1", 0}}), DomainError);
  CHECK_THROWS_AS(evaluate(parse("sqrt(q1)"), {{"q1", -1}}), DomainError);
  CHECK_THROWS_AS(evaluate(parse("q1^0.5"), {{"q1", -1}}), DomainError);
  CHECK(evaluate(parse("q1^3"), {{"q1", -2}}) == -8.0);
  try {
    evaluate(parse("q1 + w"), {{"q1", 1}});
    FAIL("expected MissingBinding");
  } catch (const MissingBinding& e) {
    CHECK(e.name() == "w");
  }
  // Extra names are ignored.
  CHECK(evaluate(parse("q1"), {{"q1", 1}, {"unused", 2}}) == 1.0);
}

TEST_CASE("symbolic derivatives") {
  CHECK(evaluate(differentiate(parse("sin(q1)*p1"), "q1"), {{"q1", 0}, {"p1", 2}}) == 2.0);
  const Expression dz = differentiate(parse("g*z"), "z");
  CHECK(to_string(dz) == "g");
  CHECK(evaluate(dz, {{"g", 0.1}}) == 0.1);
  CHECK(evaluate(differentiate(parse("q1^2+p1^2"), "p1"), {{"p1", 3}}) == 6.0);
  CHECK(differentiate(parse("q1*p1"), "z").is_zero());
  CHECK(evaluate(differentiate(parse("q1^p1"), "p1"), {{"q1", 2}, {"p1", 3}}) ==
        doctest::Approx(8.0 * std::log(2.0)).epsilon(1e-14));
  for (const char* text : {"sqrt(q1)", "ln(q1)", "exp(2*q1)", "1/q1", "cos(q1)"}) {
    const Expression e = parse(text);
    const Expression d = differentiate(e, "q1");
    for (const auto& name : free_names(d)) CHECK(free_names(e).count(name) == 1);
  }
}

TEST_CASE("derivative matches central difference on random expressions") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> point(-1.5, 1.5);
  const double h = 1e-6;
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    const Expression e = random_expr(rng, 4);
    const std::string var = std::vector<std::string>{"q1", "p1", "z"}[rng() % 3];
    Binding b{{"q1", point(rng)}, {"p1", point(rng)}, {"z", point(rng)}};
    const double exact = evaluate(differentiate(e, var), b);
    const double x0 = b[var];
    b[var] = x0 + h;
    const double up = evaluate(e, b);
    b[var] = x0 - h;
    const double down = evaluate(e, b);
    const double fd = (up - down) / (2 * h);
    // Relative with a unit floor: cancellation in the difference sets the noise level.
    const double scale = std::max({1.0, std::abs(exact), std::abs(up) + std::abs(down)});
    CHECK(std::abs(exact - fd) <= 1e-6 * scale);
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("differentiation is linear") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> point(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Expression e1 = random_expr(rng, 3);
    const Expression e2 = random_expr(rng, 3);
    const double a = point(rng);
    const Binding b{{"q1", point(rng)}, {"p1", point(rng)}, {"z", point(rng)}};
    const double lhs = evaluate(differentiate(Expression::number(a) * e1 + e2, "q1"), b);
    const double rhs = a * evaluate(differentiate(e1, "q1"), b) + evaluate(differentiate(e2, "q1"), b);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("print and parse round-trip") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 300; ++i) {
    const Expression e = parse(to_string(random_expr(rng, 4)));
    CHECK(structurally_equal(parse(to_string(e)), e));
  }
  for (const char* text : {"-q1^2", "2^-1", "p1^2/(2*m) + k^2*m*q1^2/2 + g*z", "neg(-3)", "1e-7*sin(q1)"}) {
    const Expression e = parse(text);
    CHECK(structurally_equal(parse(to_string(e)), e));
  }
}

TEST_CASE("evaluation is deterministic and compiled form agrees") {
  const Expression e = parse("sin(q1)*exp(p1) - z^3/(1+q1^2)");
  const Binding b{{"q1", 0.3}, {"p1", -0.7}, {"z", 1.1}};
  const double first = evaluate(e, b);
  CHECK(evaluate(e, b) == first);
  const CompiledExpression c(e, {"q1", "p1"}, {{"z", 1.1}});
  const double values[] = {0.3, -0.7};
  CHECK(c(values) == first);
  CHECK_THROWS_AS(CompiledExpression(e, {"q1"}, {}), MissingBinding);
  const CompiledExpression bad(parse("1/q1"), {"q1"}, {});
  const double zero[] = {0.0};
  CHECK_THROWS_AS(bad(zero), DomainError);
}
