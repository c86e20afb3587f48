#pragma once

#include "mixdiss/lti.hpp"

#include <Eigen/Core>

#include <random>

namespace mixdiss::testing {

/// 3 / ((s + 1)(s + 2)) in controllable canonical form.
inline StateSpace example_g() {
    Eigen::MatrixXd a(2, 2);
    a << 0.0, 1.0, -2.0, -3.0;
    return StateSpace(a, Eigen::Vector2d(0.0, 1.0), Eigen::RowVector2d(3.0, 0.0), 0.0);
}

inline double unif(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace mixdiss::testing
