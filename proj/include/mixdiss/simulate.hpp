#pragma once

/**
 * @file simulate.hpp
 * @brief Fixed-step RK4 simulation of the piecewise-linear example
 *
 *   xdot = -x + u,   y = phi(x) = x (x >= 0), -alpha x (x < 0)
 *
 * of LTI systems, and of their feedback loop u1 = w1 - y2, u2 = y1 + w2.
 * Every run starts from x(0) = 0.
 */

#include "mixdiss/lti.hpp"
#include "mixdiss/supply.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace mixdiss {

double phi(double x, double alpha);

struct PwlSystem {
    double alpha = 0.3;
    /// @throws PreconditionFailure unless alpha in (0, 1)
    void validate() const;
};

/// Storage functions S1 = x^2/eps_s1, S2 = alpha x^2, S3 = int_0^x phi.
struct StorageConfig {
    double eps_s1 = 0.5;
    double delta = 0.0;
    double k = 0.0;

    /// k = (1 - alpha^2) / (1 + alpha).
    static StorageConfig make(double alpha, double eps_s1, double delta);
    /// @throws ConfigMismatch unless k matches alpha, 0 <= delta < k and eps_s1 in (0, 1).
    void validate(double alpha) const;
};

/// Deterministic test input on [0, horizon]; each kind vanishes (or has decayed) before the horizon.
class InputSignal {
public:
    enum class Kind { ExpDecay, WindowedSine, RandomBandlimited, PiecewiseConst };

    /// amplitude * sign * exp(-rate t)
    static InputSignal exp_decay(double sign, double rate, double amplitude = 1.0, double horizon = 40.0);
    /// amplitude * sin(omega t) under a Tukey window of length `window` (10% tapers), zero after.
    static InputSignal windowed_sine(double omega, double window, double amplitude = 1.0, double horizon = 40.0);
    /// Eight random sinusoids below `cutoff` rad/s under a Hann window on [0, horizon/2].
    static InputSignal random_bandlimited(std::uint64_t seed, double cutoff, double amplitude = 1.0, double horizon = 40.0);
    /// Random levels in [-1, 1] on 1 s segments over [0, horizon/2], zero after; each
    /// level change is a 0.1 s raised-cosine ramp so the signal stays continuous.
    static InputSignal piecewise_const(std::uint64_t seed, double amplitude = 1.0, double horizon = 40.0);
    static InputSignal zero(double horizon = 40.0);

    static InputSignal from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    double operator()(double t) const;

    Kind kind() const { return kind_; }
    double horizon() const { return horizon_; }
    double amplitude() const { return amplitude_; }
    std::uint64_t seed() const { return seed_; }
    std::string label() const;

private:
    Kind kind_ = Kind::ExpDecay;
    double horizon_ = 40.0;
    double amplitude_ = 1.0;
    double p1_ = 0.0;  // sign | omega | cutoff
    double p2_ = 0.0;  // rate | window
    std::uint64_t seed_ = 0;
    std::vector<double> freq_, phase_, weight_;  // random components / levels
};

const char* to_string(InputSignal::Kind k);

inline constexpr double kMaxStep = 0.1;
inline constexpr double kDefaultStep = 1e-3;

/// @throws StepTooLarge when step > 0.1, PreconditionFailure when step <= 0 or horizon/step > 1e7.
Trajectory simulate_pwl(const PwlSystem& sys, const InputSignal& input, double step = kDefaultStep);
Trajectory simulate_lti(const StateSpace& sys, const InputSignal& input, double step = kDefaultStep);

struct FeedbackRun {
    Trajectory sys1;
    Trajectory sys2;
    std::vector<double> w1;
    std::vector<double> w2;
};

/// The output of the piecewise-linear system depends on its state only, so the loop
/// is explicit for any D of sys2.
FeedbackRun simulate_feedback(const PwlSystem& sys1,
                              const StateSpace& sys2,
                              const InputSignal& w1,
                              const InputSignal& w2,
                              double step = kDefaultStep);

/// Per-sample RHS - LHS of the three storage inequalities (the third is an identity).
struct StorageMargins {
    std::vector<double> s1, s2, s3;
    double scale = 1.0;  ///< 1 + max over samples of u^2, y^2, x^2, xdot^2
    double min_s1 = 0.0, min_s2 = 0.0, min_s3 = 0.0, max_abs_s3 = 0.0;
    /// every margin >= -1e-9 * scale
    bool ok() const;
};

StorageMargins check_storage_inequalities(const Trajectory& traj, const PwlSystem& sys, const StorageConfig& cfg);

/// U = k phi x - delta phi (xdot + x), V = -phi x.
struct DichotomyResult {
    double int_u = 0.0;
    double int_v = 0.0;
    double int_phi_x = 0.0;
    double int_uy = 0.0;
    double tol = 0.0;  ///< 1e-6 (1 + ||u||^2)
    bool dichotomy_ok = false;
    /// int V >= 0 forces int U <= (k - delta) int phi x <= 0; vacuous when int V < 0.
    bool chain_ok = false;
};

/// @throws TruncationUnsound when the trajectory has not decayed.
DichotomyResult check_dichotomy(const Trajectory& traj, const PwlSystem& sys, const StorageConfig& cfg);

/// max over runs of ||(y1, y2)|| / ||(w1, w2)||.
/// @throws PreconditionFailure on an empty batch or a zero input.
double empirical_gain(const std::vector<FeedbackRun>& runs);
/// ||y|| / ||u|| of a single open-loop run.
double empirical_gain(const Trajectory& traj);

/// A simulation campaign as read from a JSON config:
/// {"system": {...}, "feedback": {...}?, "inputs": [...], "step", "horizon",
///  "checks": [...], "storage": {"eps_s1", "delta"}, "spec": {...}?, "write_csv": bool}
struct CampaignResult {
    nlohmann::json summary;
    std::vector<std::pair<std::string, Trajectory>> trajectories;
    bool all_passed = true;
};

/// @throws ParseError on a malformed config or an empty input suite.
CampaignResult run_campaign(const nlohmann::json& config);

}  // namespace mixdiss
