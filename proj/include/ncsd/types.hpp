#pragma once

#include <Eigen/Dense>

namespace ncsd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace ncsd
