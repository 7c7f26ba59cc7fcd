#include "doctest.h"
#include "geomech/linear_core.hpp"
#include "geomech/sampling.hpp"

using namespace geomech;

namespace {

Vector unit(int d, int i) { return Vector::Unit(d, i); }

Subspace span_of(int d, std::initializer_list<int> axes) {
  std::vector<Vector> v;
  for (int i : axes) v.push_back(unit(d, i));
  return subspace_from_vectors(d, v);
}

}  // namespace

TEST_CASE("subspace_from_vectors ranks") {
  Vector e1 = unit(4, 0);
  CHECK(subspace_from_vectors(4, {e1, 2.0 * e1}).dim() == 1);
  CHECK(subspace_from_vectors(2, {}).dim() == 0);
  CHECK(span_of(4, {0, 1, 2}).dim() == 3);
  CHECK_THROWS_AS(subspace_from_vectors(4, {Vector::Ones(3)}), DimensionMismatch);
  const Subspace s = subspace_from_vectors(4, {Vector::Ones(4), e1});
  CHECK((s.basis().transpose() * s.basis() - Matrix::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("intersections and sums") {
  CHECK(same_span(intersect(span_of(4, {0, 1}), span_of(4, {1, 2})), span_of(4, {1})));
  const Subspace a = span_of(4, {0, 3});
  CHECK(same_span(intersect(a, a), a));
  CHECK(intersect(span_of(4, {0}), span_of(4, {1})).dim() == 0);
  CHECK(same_span(sum(span_of(4, {0}), span_of(4, {1})), span_of(4, {0, 1})));
  CHECK(same_span(sum(a, Subspace(4)), a));
  CHECK_THROWS_AS(intersect(span_of(3, {0}), span_of(4, {0})), DimensionMismatch);
}

TEST_CASE("Grassmann dimension identity on random pairs") {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const int ka = random_int(rng, 0, 8);
    const int kb = random_int(rng, 0, 8);
    // Force a shared piece half the time so intersections are nontrivial.
    Subspace a = random_subspace(rng, 8, ka);
    Subspace b = random_subspace(rng, 8, kb);
    if (i % 2 == 0 && ka > 0 && kb > 0) {
      const Subspace shared = random_subspace_of(rng, a, std::min(ka, kb) / 2 + 1);
      b = sum(shared, random_subspace(rng, 8, std::max(0, kb - shared.dim())));
    }
    CHECK(sum(a, b).dim() + intersect(a, b).dim() == a.dim() + b.dim());
  }
}

TEST_CASE("annihilators") {
  const Subspace q = span_of(2, {0});
  CHECK(same_span(annihilator(q), span_of(2, {1})));
  CHECK(annihilator(Subspace::full(5)).dim() == 0);
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const int d = random_int(rng, 1, 9);
    const Subspace a = random_subspace(rng, d, random_int(rng, 0, d));
    const Subspace ann = annihilator(a);
    CHECK(ann.dim() == d - a.dim());
    if (a.dim() > 0 && ann.dim() > 0) CHECK((ann.basis().transpose() * a.basis()).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(span_distance(annihilator(ann), a) <= 1e-9);
  }
}

TEST_CASE("quotients") {
  QuotientBasis q = quotient(span_of(4, {0, 1}), span_of(4, {0}));
  CHECK(q.dim() == 1);
  CHECK(same_span(Subspace::span(q.representatives), span_of(4, {1})));
  CHECK(quotient(span_of(4, {0, 1}), span_of(4, {0, 1})).dim() == 0);
  CHECK(quotient(span_of(4, {0, 1, 2}), span_of(4, {2})).dim() == 2);
  CHECK_THROWS_AS(quotient(span_of(4, {0}), span_of(4, {1})), NotASubspace);

  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const Subspace total = random_subspace(rng, 7, random_int(rng, 1, 7));
    const Subspace ker = random_subspace_of(rng, total, random_int(rng, 0, total.dim()));
    for (const QuotientBasis& qb :
         {quotient(total, ker),
          quotient(total, ker, quotient(total, ker).representatives + ker.basis() * random_matrix(rng, ker.dim(), total.dim() - ker.dim()))}) {
      CHECK(qb.dim() == total.dim() - ker.dim());
      if (ker.dim() > 0 && qb.dim() > 0) CHECK((qb.projection * ker.basis()).norm() <= 1e-9);
      CHECK((qb.projection * qb.representatives - Matrix::Identity(qb.dim(), qb.dim())).norm() <= 1e-9);
    }
  }
}

TEST_CASE("principal angles") {
  const Subspace a = span_of(3, {0});
  Vector v(3);
  v << 1.0, 1e-9, 0.0;
  const Subspace b = subspace_from_vectors(3, {v});
  CHECK(principal_angles(a, b)(0) == doctest::Approx(1e-9).epsilon(1e-6));
  CHECK(span_distance(a, span_of(3, {0, 1})) == doctest::Approx(1.5707963267948966));
  CHECK(contains(span_of(3, {0, 1}), a));
  CHECK_FALSE(contains(a, span_of(3, {0, 1})));
}
