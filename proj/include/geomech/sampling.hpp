#pragma once

#include <random>

#include "geomech/geometry.hpp"
#include "geomech/linear_core.hpp"

namespace geomech {

using Rng = std::mt19937_64;

Vector random_vector(Rng& rng, int size, double scale = 1.0);
Matrix random_matrix(Rng& rng, int rows, int cols);
Matrix random_symmetric(Rng& rng, int size);
// Uniformly oriented k-dimensional subspace of R^d.
Subspace random_subspace(Rng& rng, int ambient_dim, int dim);
// Random k-dimensional subspace of a given subspace.
Subspace random_subspace_of(Rng& rng, const Subspace& inside, int dim);
// Random subspace of `inside` containing `through`, of total dimension dim.
Subspace random_subspace_between(Rng& rng, const Subspace& through, const Subspace& inside, int dim);
int random_int(Rng& rng, int lo, int hi);  // inclusive

// Chart point with coordinates in [-1, 1] for every chart name.
Binding random_point(Rng& rng, Kind kind, int n);
// Random affine SHS coefficients a_i, b^i in (q, p).
ShsCoefficients random_shs(Rng& rng, int n);
// Structure of the given kind at a random point (SHS uses random_shs).
LinearGeometry random_geometry(Rng& rng, Kind kind, int n);

}  // namespace geomech
