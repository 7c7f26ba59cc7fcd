#include "geomech/sampling.hpp"

namespace geomech {

Vector random_vector(Rng& rng, int size, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(size);
  for (int i = 0; i < size; ++i) v(i) = normal(rng);
  return v;
}

Matrix random_matrix(Rng& rng, int rows, int cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

Matrix random_symmetric(Rng& rng, int size) {
  const Matrix m = random_matrix(rng, size, size);
  return 0.5 * (m + m.transpose());
}

Subspace random_subspace(Rng& rng, int ambient_dim, int dim) {
  return random_subspace_of(rng, Subspace::full(ambient_dim), dim);
}

Subspace random_subspace_of(Rng& rng, const Subspace& inside, int dim) {
  if (dim > inside.dim()) throw InvalidDimension("requested subspace larger than its container");
  return Subspace::span(inside.basis() * random_matrix(rng, inside.dim(), dim));
}

Subspace random_subspace_between(Rng& rng, const Subspace& through, const Subspace& inside, int dim) {
  if (!contains(inside, through) || dim < through.dim() || dim > inside.dim())
    throw InvalidDimension("no subspace of the requested dimension between the given spaces");
  const QuotientBasis q = quotient(inside, through);
  const Subspace extra = Subspace::span(q.representatives * random_matrix(rng, q.dim(), dim - through.dim()));
  return sum(through, extra);
}

int random_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }


Binding random_point(Rng& rng, Kind kind, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Binding b;
  for (const auto& name : coordinate_names(kind, n)) b[name] = u(rng);
  return b;
}

ShsCoefficients random_shs(Rng& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ShsCoefficients shs;
  auto affine = [&] {
    Expression e = Expression::number(u(rng));
    for (int i = 1; i <= n; ++i) {
      e = e + Expression::number(u(rng)) * Expression::name("q" + std::to_string(i));
      e = e + Expression::number(u(rng)) * Expression::name("p" + std::to_string(i));
    }
    return e;
  };
  for (int i = 0; i < n; ++i) {
    shs.a.push_back(affine());
    shs.b.push_back(affine());
  }
  return shs;
}

LinearGeometry random_geometry(Rng& rng, Kind kind, int n) {
  const Binding point = random_point(rng, kind, n);
  if (kind == Kind::SHS) {
    const ShsCoefficients shs = random_shs(rng, n);
    return LinearGeometry::standard(kind, n, point, &shs);
  }
  return LinearGeometry::standard(kind, n, point);
}

}  // namespace geomech
