#pragma once

/**
 * @file supply.hpp
 * @brief Quadratic supply rates on input-output pairs xi = [u, y].
 *
 * A mixed-dissipative system satisfies <xi, Theta xi> >= 0, or both
 * <xi, Psi_eps xi> >= 0 and <xi, Pi xi> >= 0, on every trajectory (or both
 * alternatives). Integrals over [0, inf) are approximated on finite horizons
 * whose terminal state has decayed; see TrajectoryDecay.
 */

#include "mixdiss/mat_core.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <string>
#include <vector>

namespace mixdiss {

/// Psi_eps = [[2 eps, 1], [1, 0]].
constexpr SymMat2 psi(double epsilon) { return {2.0 * epsilon, 1.0, 0.0}; }

struct SupplySpec {
    SymMat2 theta;
    SymMat2 pi;
    double epsilon = 0.0;

    SymMat2 psi() const { return mixdiss::psi(epsilon); }
};

/// Theta11 >= 0, Theta22 < 0, Pi11 >= 0, Pi22 < 0.
bool is_finite_gain_mixed(const SupplySpec& spec);

/// Sampled trajectory. Row i of x / xdot is the state / derivative at t[i].
struct Trajectory {
    std::vector<double> t;
    std::vector<double> u;
    std::vector<double> y;
    Eigen::MatrixXd x;
    Eigen::MatrixXd xdot;

    std::size_t samples() const { return t.size(); }
    Eigen::Index states() const { return x.cols(); }

    /// Throws DimensionMismatch / DegenerateGrid when the invariants fail.
    void validate() const;
};

/// Composite trapezoidal rule for a sampled scalar signal.
double trapezoid(const std::vector<double>& t, const std::vector<double>& f);

/// int_0^T xi^T S xi dt, trapezoidal on the sample grid.
double quad_integral(const Trajectory& traj, const SymMat2& s);

/// ||u||^2 over the trajectory horizon.
double input_energy(const Trajectory& traj);

/// Decay proxy for T -> inf: |x(T)| <= rel * max_t |x(t)|.
struct TrajectoryDecay {
    double terminal_norm;
    double max_norm;
    bool decayed;
};

inline constexpr double kDefaultDecayRel = 1e-6;

TrajectoryDecay check_decay(const Trajectory& traj, double rel = kDefaultDecayRel);

/// Throws TruncationUnsound if the trajectory has not decayed.
void require_decay(const Trajectory& traj, double rel = kDefaultDecayRel);

enum class Branch { Theta, PiPsi, Both, Neither };

const char* to_string(Branch b);

struct Classification {
    Branch branch;
    double theta_integral;
    double pi_integral;
    double psi_integral;
    double tol;

    bool contains_theta() const { return branch == Branch::Theta || branch == Branch::Both; }
    bool contains_pi_psi() const { return branch == Branch::PiPsi || branch == Branch::Both; }
};

/// 1e-6 * (1 + ||u||^2).
double default_classification_tol(const Trajectory& traj);

/// Which alternative of the mixed-dissipativity definition the trajectory meets.
/// A negative tol selects default_classification_tol.
/// @throws TruncationUnsound when the terminal state has not decayed.
Classification classify_trajectory(const Trajectory& traj,
                                   const SupplySpec& spec,
                                   double tol = -1.0,
                                   double decay_rel = kDefaultDecayRel);

/// CSV with header t,u,y,x0..x{n-1},xdot0..xdot{n-1}; 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& is);

void write_trajectory_csv(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_csv(const std::string& path);

}  // namespace mixdiss
