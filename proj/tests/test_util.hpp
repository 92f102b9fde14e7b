#pragma once

#include <initializer_list>

#include "ncsd/types.hpp"

namespace ncsd::test {

inline Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  const Index n = static_cast<Index>(rows.size());
  const Index m = n == 0 ? 0 : static_cast<Index>(rows.begin()->size());
  Matrix out(n, m);
  Index i = 0;
  for (const auto& row : rows) {
    Index j = 0;
    for (double x : row) out(i, j++) = x;
    ++i;
  }
  return out;
}

// |x| in one dimension as a max of two affine pieces.
inline Matrix abs_slopes() { return mat({{1}, {-1}}); }

}  // namespace ncsd::test
