#pragma once

// Scalar reference values obtained by exhaustive enumeration over classical
// commutative instances.  Everything here is plain double arithmetic with no
// dependence on the library under test, so these numbers can anchor the
// empirical-constant checks independently.

#include <algorithm>
#include <cmath>

namespace oracles {

// Depth-3 dyadic transforms: atoms are 3-bit words with uniform weight, coin
// r_k reads bit k, and x = sum_k xi_{k-1} r_k over all predictable sign
// choices xi_{k-1} in {+-1} (a function of the first k - 1 coins).  Returns
// the largest ||x||_4 / ||(sum dx_k^2)^{1/2}||_4 over the 2^7 transforms.
// Every transform attains (7/3)^{1/4} ~ 1.23603: the differences are again
// independent signs, so E x^4 = 21 while the square function is constant 3.
inline double bg4_transform_ratio() {
  double best = 0.0;
  for (int pattern = 0; pattern < 128; ++pattern) {
    const int s0 = (pattern & 1) ? -1 : 1;
    int s1[2], s2[4];
    for (int i = 0; i < 2; ++i) s1[i] = (pattern >> (1 + i)) & 1 ? -1 : 1;
    for (int i = 0; i < 4; ++i) s2[i] = (pattern >> (3 + i)) & 1 ? -1 : 1;
    double fourth = 0.0;
    double square_fourth = 0.0;
    for (int atom = 0; atom < 8; ++atom) {
      const int b1 = (atom >> 2) & 1;
      const int b2 = (atom >> 1) & 1;
      const int b3 = atom & 1;
      const double r1 = b1 ? -1.0 : 1.0;
      const double r2 = b2 ? -1.0 : 1.0;
      const double r3 = b3 ? -1.0 : 1.0;
      const double d1 = s0 * r1;
      const double d2 = s1[b1] * r2;
      const double d3 = s2[b1 * 2 + b2] * r3;
      const double x = d1 + d2 + d3;
      const double s_sq = d1 * d1 + d2 * d2 + d3 * d3;
      fourth += x * x * x * x / 8.0;
      square_fourth += s_sq * s_sq / 8.0;
    }
    const double ratio =
        std::pow(fourth, 0.25) / std::pow(square_fourth, 0.25);
    best = std::max(best, ratio);
  }
  return best;
}

// Closed form the enumeration must reproduce.
inline double bg4_transform_ratio_closed_form() {
  return std::pow(7.0 / 3.0, 0.25);
}

}  // namespace oracles
