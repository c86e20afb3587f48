#pragma once

/**
 * @file interconnect.hpp
 * @brief Stability test and gain bound for the feedback loop
 *
 *   u1 = w1 - y2,   u2 = y1 + w2
 *
 * of two mixed-dissipative subsystems. With M = [0 -1; 1 0] the loop is stable when
 * subsystem 1 is finite-gain mixed (eps1 <= 0), eps2 < 0, and the three scalar pencils
 *
 *   M'Theta1 M + p1 Pi2,   M'Pi1 M + p2 Theta2,   M'Theta1 M + p3 Theta2
 *
 * are negative definite for some p1, p2, p3 >= 0.
 */

#include "mixdiss/mat_core.hpp"
#include "mixdiss/supply.hpp"

#include <json.hpp>

#include <array>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace mixdiss {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// {p >= 0 : A + p B < 0}; hi may be +inf.
struct PencilInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool empty = true;
    /// lo = 0 and A itself is negative definite.
    bool lo_attained = false;

    bool contains(double p) const { return !empty && (p > lo || (lo_attained && p == lo)) && p < hi; }
    /// Midpoint, or lo + max(1, lo) for an unbounded interval. NaN when empty.
    double witness() const;
};

PencilInterval pencil_negdef_interval(const SymMat2& a, const SymMat2& b);

struct InterconnectionVerdict {
    bool hypotheses_ok = false;
    std::vector<std::string> failed_hypotheses;
    /// Pencils (M'Theta1 M, Pi2), (M'Pi1 M, Theta2), (M'Theta1 M, Theta2).
    std::array<PencilInterval, 3> intervals;
    std::array<double, 3> witnesses{};
    bool stable = false;
    std::optional<double> gain_bound;
};

InterconnectionVerdict check_theorem2(const SupplySpec& spec1, const SupplySpec& spec2);

/// Supply rates of the piecewise-linear example: Theta = [[alpha, delta/2], [delta/2, -1]],
/// Pi = diag(1, -1), eps = 0.
SupplySpec pwl_supply(double alpha, double delta);

/// Supremum of alpha in [0, 1 - delta) for which check_theorem2(pwl_supply(alpha, delta), spec2)
/// is stable, to 1e-6. Returns 0 when even alpha = 0 fails.
/// @throws PreconditionFailure unless 0 <= delta < 1.
double alpha_threshold(double delta, const SupplySpec& spec2);

/// Constants of one homotopy branch. y-block X(tau) < 0, cross block Y(tau), w-block Z(tau):
/// margin = min_tau lambda_min(-X), cross = max ||Y||_2, wblock = max ||Z||_2.
struct BranchConstants {
    std::string name;
    double margin = 0.0;
    double cross = 0.0;
    double wblock = 0.0;
    /// sqrt((2 cross)^2 + 2 margin wblock) / margin
    double bound = 0.0;
    /// the same with the cross term counted once: sqrt(cross^2 + 2 margin wblock) / margin
    double bound_single_cross = 0.0;
    /// the construction is not spelled out in the source argument
    bool reconstruction = false;
    /// multipliers of the y-block at tau = 0 and tau = 1
    std::vector<std::pair<std::string, double>> multipliers;
};

struct HomotopyGainBound {
    std::vector<double> tau_grid;
    std::vector<BranchConstants> branches;
    double gamma_cl = 0.0;
};

/// Gain from (w1, w2) to (y1, y2) for every loop gain tau in [0, 1] on a uniform grid.
/// @throws PreconditionFailure when the verdict is not stable or tau_steps < 11,
///         BranchInfeasible when a branch loses definiteness at some tau.
HomotopyGainBound homotopy_gain_bound(const SupplySpec& spec1,
                                      const SupplySpec& spec2,
                                      const std::array<double, 3>& witnesses,
                                      int tau_steps = 101);

nlohmann::json to_json(const PencilInterval& iv);
nlohmann::json to_json(const InterconnectionVerdict& v);
nlohmann::json to_json(const HomotopyGainBound& b);

}  // namespace mixdiss
