#include "doctest.h"
#include "geomech/reduction.hpp"

using namespace geomech;

namespace {

Vector e(int d, int i) { return Vector::Unit(d, i); }

Subspace span_of(int d, std::initializer_list<int> axes) {
  std::vector<Vector> v;
  for (int i : axes) v.push_back(e(d, i));
  return subspace_from_vectors(d, v);
}

struct CaseSpec {
  Kind kind;
  ReductionCase c;
};

constexpr CaseSpec kCases[] = {
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

LinearGeometry case_geometry(Rng& rng, Kind kind, int n) {
  if (kind == Kind::SHS) {
    const ShsCoefficients shs = random_closed_shs(rng, n);
    return LinearGeometry::standard(kind, n, random_point(rng, kind, n), &shs);
  }
  return random_geometry(rng, kind, n);
}

// Brute-force quotient dimension: dim W - dim (W cap W^perp), from explicit rank computations.
int brute_quotient_dim(const LinearGeometry& g, const Subspace& w) {
  const Matrix lam = g.jacobi_pair().lambda;
  const Subspace ann = annihilator(w);
  const Matrix perp_cols = lam.transpose() * ann.basis();
  Matrix joined(g.dim(), w.dim() + perp_cols.cols());
  joined << w.basis(), perp_cols;
  const int perp_dim = numerical_rank(perp_cols);
  const int inside = w.dim() + perp_dim - numerical_rank(joined);
  return w.dim() - inside;
}

}  // namespace

TEST_CASE("tangent spaces of constraint manifolds") {
  const ConstraintManifold s3 = sphere(2);
  const Subspace t = tangent_space_at(s3, {{"q1", 1.0}, {"q2", 0.0}, {"p1", 0.0}, {"p2", 0.0}});
  CHECK(same_span(t, span_of(4, {1, 2, 3})));

  ConstraintManifold level;
  level.kind = Kind::Cosymplectic;
  level.n = 1;
  level.constraints = {parse("t - 0")};
  CHECK(same_span(tangent_space_at(level, {{"q1", 0.0}, {"p1", 0.0}, {"t", 0.0}}), span_of(3, {0, 1})));

  CHECK_THROWS_AS(tangent_space_at(s3, {{"q1", 1.1}, {"q2", 0.0}, {"p1", 0.0}, {"p2", 0.0}}), NotOnManifold);

  ConstraintManifold twice = s3;
  twice.constraints.push_back(twice.constraints.front());
  CHECK_THROWS_AS(tangent_space_at(twice, {{"q1", 1.0}, {"q2", 0.0}, {"p1", 0.0}, {"p2", 0.0}}),
                  DegenerateConstraints);

  ConstraintManifold scaled;
  scaled.kind = Kind::Symplectic;
  scaled.n = 1;
  scaled.constraints = {parse("q1 - r")};
  scaled.params = {{"r", 0.5}};
  CHECK(same_span(tangent_space_at(scaled, {{"q1", 0.5}, {"p1", 3.0}}), span_of(2, {1})));
}

TEST_CASE("linear reduction examples") {
  const LinearGeometry symp = LinearGeometry::standard(Kind::Symplectic, 2, {});
  const ReductionReport r = linear_reduce(symp, span_of(4, {0, 2, 1}));
  CHECK(same_span(r.orthogonal, span_of(4, {1})));
  CHECK(r.quotient.dim() == 2);
  CHECK(r.expected_dim == 2);
  REQUIRE(r.reduced_structure);
  CHECK(r.reduced_structure->kind() == Kind::Symplectic);
  CHECK(r.passed());

  const LinearGeometry cosym = LinearGeometry::standard(Kind::Cosymplectic, 1, {});
  const ReductionReport full = linear_reduce(cosym, Subspace::full(3));
  CHECK(full.verticality_case == ReductionCase::Vertical);
  CHECK(full.expected_dim == 3);
  CHECK(full.quotient.dim() == 3);
  CHECK(full.quotient.kernel.dim() == 0);
  CHECK(full.passed());

  const LinearGeometry contact = LinearGeometry::standard(Kind::Contact, 1, {{"p1", 0.4}});
  const ReductionReport whole = linear_reduce(contact, Subspace::full(3));
  CHECK(whole.verticality_case == ReductionCase::Vertical);
  CHECK(whole.quotient.dim() == 3);
  REQUIRE(whole.reduced_structure);
  CHECK(whole.reduced_structure->kind() == Kind::Contact);
  CHECK(whole.passed());

  const LinearGeometry cocontact = LinearGeometry::standard(Kind::Cocontact, 1, {{"p1", 0.0}});
  const ReductionReport trivial = linear_reduce(cocontact, span_of(4, {0}));
  CHECK(trivial.verticality_case == ReductionCase::TzHorizontal);
  CHECK(trivial.quotient.dim() == 0);
  CHECK(trivial.passed());

  CHECK_THROWS_AS(linear_reduce(symp, span_of(4, {0})), NotCoisotropic);
  // span{q1, p1, q2 + t, p2} is coisotropic but neither vertical nor horizontal.
  const LinearGeometry cosym2 = LinearGeometry::standard(Kind::Cosymplectic, 2, {});
  const Subspace tilted = subspace_from_vectors(5, {e(5, 0), e(5, 2), e(5, 1) + e(5, 4), e(5, 3)});
  CHECK_THROWS_AS(linear_reduce(cosym2, tilted), CaseUnsupported);
}

TEST_CASE("horizontal coisotropic subspaces that no submanifold can realise") {
  // The whole contact distribution is coisotropic and horizontal, yet d(eta) does not vanish on it.
  const LinearGeometry contact = LinearGeometry::standard(Kind::Contact, 1, {{"p1", 0.0}});
  const ReductionReport r = linear_reduce(contact, contact.horizontal());
  CHECK(r.verticality_case == ReductionCase::Horizontal);
  REQUIRE(r.find("integrable_horizontal"));
  CHECK_FALSE(r.find("integrable_horizontal")->passed);
  CHECK_FALSE(r.find("dimension")->passed);
  CHECK(r.quotient.dim() == 2);
}

TEST_CASE("quotient dimensions follow the closed forms in every case") {
  Rng rng(2024);
  for (const auto& spec : kCases) {
    for (int n = 1; n <= 3; ++n) {
      for (int trial = 0; trial < 15; ++trial) {
        const LinearGeometry g = case_geometry(rng, spec.kind, n);
        const auto [lo, hi] = coisotropic_dim_range(g, spec.c);
        const int k = random_int(rng, lo, hi);
        const Subspace w = random_coisotropic(rng, g, spec.c, k);
        REQUIRE(w.dim() == k);
        const ReductionReport r = linear_reduce(g, w);
        INFO(to_string(spec.kind), " ", to_string(spec.c), " n=", n, " k=", k);
        CHECK(r.verticality_case == spec.c);
        CHECK(r.quotient.dim() == r.expected_dim);
        CHECK(r.quotient.dim() == brute_quotient_dim(g, w));
        for (const auto& check : r.checks) {
          INFO(check.name, " residual ", check.residual);
          CHECK(check.passed);
        }
        if (r.quotient.dim() > 0) {
          REQUIRE(r.reduced_structure);
          CHECK(r.reduced_structure->kind() == reduced_kind(spec.kind, spec.c));
        }
        CHECK(representative_independence(g, w, rng) <= 1e-9);
      }
    }
  }
}

TEST_CASE("closed-form dimensions on hand-checked values") {
  CHECK(expected_quotient_dim(Kind::Symplectic, 2, ReductionCase::Symplectic, 3) == 2);
  CHECK(expected_quotient_dim(Kind::Cosymplectic, 1, ReductionCase::Vertical, 3) == 3);
  CHECK(expected_quotient_dim(Kind::Cosymplectic, 2, ReductionCase::Horizontal, 3) == 2);
  CHECK(expected_quotient_dim(Kind::Contact, 2, ReductionCase::Vertical, 4) == 3);
  CHECK(expected_quotient_dim(Kind::Contact, 2, ReductionCase::Horizontal, 2) == 0);
  CHECK(expected_quotient_dim(Kind::Cocontact, 2, ReductionCase::TzVertical, 6) == 6);
  CHECK(expected_quotient_dim(Kind::Cocontact, 2, ReductionCase::TVerticalZHorizontal, 3) == 1);
  CHECK(expected_quotient_dim(Kind::Cocontact, 2, ReductionCase::ZVerticalTHorizontal, 5) == 5);
  CHECK(expected_quotient_dim(Kind::Cocontact, 2, ReductionCase::TzHorizontal, 2) == 0);
  CHECK_THROWS_AS(expected_quotient_dim(Kind::Symplectic, 1, ReductionCase::Vertical, 2), CaseUnsupported);
}

TEST_CASE("projection examples") {
  const LinearGeometry symp = LinearGeometry::standard(Kind::Symplectic, 2, {});
  const ProjectionReport p = project_through_reduction(symp, span_of(4, {0, 1}), span_of(4, {0, 2, 1}));
  CHECK(same_span(p.intersection, span_of(4, {0, 1})));
  CHECK(p.image.dim() == 1);
  // [dq1] in quotient coordinates
  const Vector coords = p.reduction.quotient.projection * e(4, 0);
  CHECK(same_span(p.image, Subspace::span(coords)));
  CHECK(p.lagrangian);

  const LinearGeometry contact = LinearGeometry::standard(Kind::Contact, 1, {{"p1", 0.3}});
  Vector leg = e(3, 0);
  leg(2) = 0.3;  // horizontal lift of d/dq
  const ProjectionReport c = project_through_reduction(contact, Subspace::span(leg), Subspace::full(3));
  CHECK(c.image.dim() == 1);
  CHECK(c.lagrangian);
  CHECK(c.expected_dim == 1);

  CHECK_THROWS_AS(project_through_reduction(symp, span_of(4, {0}), Subspace::full(4)), NotLagrangian);
  CHECK_THROWS_AS(project_through_reduction(symp, span_of(4, {0, 1}), span_of(4, {0})), NotCoisotropic);
}

TEST_CASE("projection of Lagrangians through every case") {
  Rng rng(77);
  for (const auto& spec : kCases) {
    for (int trial = 0; trial < 100; ++trial) {
      const int n = random_int(rng, 1, 3);
      const LinearGeometry g = case_geometry(rng, spec.kind, n);
      const auto [lo, hi] = coisotropic_dim_range(g, spec.c);
      const Subspace w = random_coisotropic(rng, g, spec.c, random_int(rng, lo, hi));
      const Subspace l = random_lagrangian(rng, g, trial % 2 == 0);
      REQUIRE(classify_subspace(g, l).lagrangian);
      const ProjectionReport p = project_through_reduction(g, l, w);
      INFO(to_string(spec.kind), " ", to_string(spec.c), " n=", n, " dim W=", w.dim());
      CHECK(p.lagrangian);
      CHECK(p.image.dim() == p.expected_dim);
    }
  }
}

TEST_CASE("Lagrangians containing the orthogonal complement project to half dimension") {
  Rng rng(5);
  const LinearGeometry g = LinearGeometry::standard(Kind::Symplectic, 3, {});
  for (int trial = 0; trial < 100; ++trial) {
    const Subspace w = random_coisotropic(rng, g, ReductionCase::Symplectic, random_int(rng, 3, 6));
    const Subspace perp = lambda_orthogonal(g, w);
    const Subspace l = extend_isotropic(rng, g.two_form(), w, perp, 3);
    const ProjectionReport p = project_through_reduction(g, l, w);
    CHECK(2 * p.image.dim() == p.reduction.quotient.dim());
    CHECK(p.lagrangian);
  }
}

TEST_CASE("involutivity of the orthogonal distribution") {
  Rng rng(9);
  const ConstraintManifold s3 = sphere(2);
  for (int i = 0; i < 20; ++i) {
    const Binding point = random_sphere_point(rng, 2);
    CHECK(involutivity_residual(s3, point, 1e-4) <= 1e-5);
  }

  ConstraintManifold cyl;
  cyl.kind = Kind::Cosymplectic;
  cyl.n = 2;
  cyl.constraints = {parse("q1^2 + p1^2 + q2*p2 - 1")};
  const Binding point{{"q1", 0.6}, {"p1", 0.8}, {"q2", 0.3}, {"p2", 0.0}, {"t", 0.2}};
  const double coarse = involutivity_residual(cyl, point, 1e-3);
  const double fine = involutivity_residual(cyl, point, 1e-4);
  CHECK(coarse <= 10.0 * 1e-3);
  CHECK(fine <= 10.0 * 1e-4);
  CHECK(fine <= 0.2 * coarse + 1e-12);

  ConstraintManifold slice;
  slice.kind = Kind::Cosymplectic;
  slice.n = 1;
  slice.constraints = {parse("t")};
  CHECK(involutivity_residual(slice, {{"q1", 0.1}, {"p1", 0.2}, {"t", 0.0}}) <= 1e-14);

  ConstraintManifold bent = slice;
  bent.constraints = {parse("t - q1^2")};
  CHECK_THROWS_AS(involutivity_residual(bent, {{"q1", 0.0}, {"p1", 0.0}, {"t", 0.0}}), RankJump);
}

TEST_CASE("complex projective space from the odd sphere") {
  Rng rng(11);
  const CpReport one = cp_example(1, 100, rng);
  CHECK(one.passed);
  CHECK(one.reduced_dim == 2);
  const CpReport two = cp_example(2, 50, rng);
  CHECK(two.passed);
  CHECK(two.reduced_dim == 4);
  CHECK(cp_generator(2, {{"q1", 1.0}, {"q2", 0.0}, {"p1", 0.0}, {"p2", 0.0}}).isApprox(-e(4, 2)));
  CHECK_THROWS_AS(cp_example(0, 1, rng), InvalidDimension);
}
