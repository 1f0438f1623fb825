#pragma once

#include "sddm/common.hpp"
#include "sddm/core.hpp"
#include "sddm/graph.hpp"

namespace sddm::testhelp {

// Connected weighted graph turned into an admissible n-by-n system, grounded
// either by deleting the last node of an (n+1)-node graph or by a diagonal
// shift (coin flip).
inline Matrix random_sddm(int n, Rng& rng) {
  if (n >= 2 && rng.uniform() < 0.5) {
    const int extra = static_cast<int>(rng.uniform_int(0, n + 1));
    WeightedGraph g = make_random_connected(n + 1, extra, 0.5, 2.0, rng);
    return laplacian_matrix(g).topLeftCorner(n, n);
  }
  const int extra = static_cast<int>(rng.uniform_int(0, n));
  WeightedGraph g = make_random_connected(n, extra, 0.5, 2.0, rng);
  Matrix L = laplacian_matrix(g);
  L.diagonal().array() += rng.uniform(0.1, 2.0);
  return L;
}

inline Matrix random_spd(int n, Rng& rng) {
  Matrix B(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) B(i, j) = rng.normal();
  }
  Matrix X = B.transpose() * B;
  X.diagonal().array() += 0.1;
  return X;
}

inline Vector random_vector(int n, Rng& rng) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

}  // namespace sddm::testhelp
