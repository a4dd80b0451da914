#pragma once

#include <Eigen/Dense>

#include <cmath>

#include "arc/types.hpp"

namespace arc {

// dist(q, x) = 1 - q.x; lies in [0, 2] for unit-norm inputs (up to float rounding,
// which can dip a hair below 0 for near-identical vectors).
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine_distance(const Eigen::MatrixBase<DerivedA>& a,
                                          const Eigen::MatrixBase<DerivedB>& b) {
    return typename DerivedA::Scalar(1) - a.dot(b);
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& v) {
    return v.allFinite();
}

template <typename Derived>
bool is_unit_norm(const Eigen::MatrixBase<Derived>& v, double tol = 1e-4) {
    const double n = v.template cast<double>().norm();
    return n >= 1.0 - tol && n <= 1.0 + tol;
}

// Scales v to unit L2 norm; returns false (v untouched) for a degenerate
// near-zero vector.
template <typename Derived>
bool try_unit_normalize(Eigen::MatrixBase<Derived>& v) {
    using Scalar = typename Derived::Scalar;
    const Scalar n = v.norm();
    if (!(n > Scalar(0)) || !std::isfinite(static_cast<double>(n))) {
        return false;
    }
    v /= n;
    return true;
}

}  // namespace arc
