#include "common.hpp"

#include "mixdiss/errors.hpp"
#include "mixdiss/interconnect.hpp"
#include "mixdiss/json_io.hpp"
#include "mixdiss/simulate.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace mixdiss;
using testing::example_g;

namespace {

std::vector<InputSignal> suite(double horizon = 40.0) {
    std::vector<InputSignal> s;
    for (double sign : {1.0, -1.0}) {
        for (double rate : {0.5, 1.0, 3.0}) s.push_back(InputSignal::exp_decay(sign, rate, 1.0, horizon));
    }
    for (double w : {0.3, 1.0, 2.5}) s.push_back(InputSignal::windowed_sine(w, horizon / 2, 1.0, horizon));
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        s.push_back(InputSignal::random_bandlimited(seed, 2.0, 1.0, horizon));
        s.push_back(InputSignal::piecewise_const(seed, 1.0, horizon));
    }
    return s;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b, std::size_t stride_b = 1) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size() && i * stride_b < b.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i * stride_b]));
    }
    return m;
}

double peak_state(const Trajectory& tr) { return tr.x.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("phi") {
    CHECK(phi(2.0, 0.3) == 2.0);
    CHECK(phi(-1.0, 0.3) == doctest::Approx(0.3));
    CHECK(phi(0.0, 0.7) == 0.0);
    CHECK(phi(-0.0, 0.7) == 0.0);
}

TEST_CASE("piecewise-linear system matches closed forms") {
    const PwlSystem sys{0.3};
    const Trajectory pos = simulate_pwl(sys, InputSignal::exp_decay(1.0, 1.0), 1e-3);
    const Trajectory neg = simulate_pwl(sys, InputSignal::exp_decay(-1.0, 1.0), 1e-3);
    double ex = 0.0;
    double ey = 0.0;
    for (std::size_t i = 0; i < pos.samples(); ++i) {
        const double t = pos.t[i];
        ex = std::max(ex, std::abs(pos.x(static_cast<Eigen::Index>(i), 0) - t * std::exp(-t)));
        ey = std::max(ey, std::abs(neg.y[i] - 0.3 * t * std::exp(-t)));
    }
    CHECK(ex < 1e-8);
    CHECK(ey < 1e-8);
    CHECK(pos.t.front() == 0.0);
    CHECK(pos.t.back() == doctest::Approx(40.0));

    const Trajectory z = simulate_pwl(sys, InputSignal::zero(), 1e-2);
    CHECK(z.x.cwiseAbs().maxCoeff() == 0.0);
    CHECK(*std::max_element(z.y.begin(), z.y.end()) == 0.0);
}

TEST_CASE("RK4 shows fourth-order convergence") {
    auto err = [](double h) {
        const Trajectory tr = simulate_pwl({0.3}, InputSignal::exp_decay(1.0, 1.0, 1.0, 10.0), h);
        double e = 0.0;
        for (std::size_t i = 0; i < tr.samples(); ++i) {
            e = std::max(e, std::abs(tr.x(static_cast<Eigen::Index>(i), 0) - tr.t[i] * std::exp(-tr.t[i])));
        }
        return e;
    };
    const double order = std::log2(err(0.1) / err(0.05));
    CHECK(order >= 3.9);
}

TEST_CASE("step refinement agrees across sign changes of the state") {
    const InputSignal u = InputSignal::windowed_sine(1.3, 20.0);
    const Trajectory coarse = simulate_pwl({0.3}, u, 1e-3);
    const Trajectory fine = simulate_pwl({0.3}, u, 5e-4);
    CHECK(max_abs_diff(coarse.y, fine.y, 2) < 1e-8);
}

TEST_CASE("step guards") {
    CHECK_THROWS_AS(simulate_pwl({0.3}, InputSignal::zero(), 0.2), StepTooLarge);
    CHECK_THROWS_AS(simulate_lti(example_g(), InputSignal::zero(), 0.11), StepTooLarge);
    CHECK_THROWS_AS(simulate_pwl({0.3}, InputSignal::zero(), 0.0), PreconditionFailure);
    CHECK_THROWS_AS(simulate_pwl({0.3}, InputSignal::zero(1e6), 1e-3), PreconditionFailure);
    CHECK_THROWS_AS(simulate_pwl({1.5}, InputSignal::zero(), 1e-2), PreconditionFailure);
}

TEST_CASE("LTI simulation against the convolution with the impulse response") {
    // 3(e^-t - e^-2t) convolved with r e^{-r t}.
    const double r = 20.0;
    const Trajectory tr = simulate_lti(example_g(), InputSignal::exp_decay(1.0, r, r, 20.0), 1e-3);
    double e = 0.0;
    for (std::size_t i = 0; i < tr.samples(); ++i) {
        const double t = tr.t[i];
        const double y = 3.0 * r * ((std::exp(-r * t) - std::exp(-t)) / (1.0 - r) -
                                    (std::exp(-r * t) - std::exp(-2.0 * t)) / (2.0 - r));
        e = std::max(e, std::abs(tr.y[i] - y));
    }
    CHECK(e < 1e-5);

    const Trajectory z = simulate_lti(example_g(), InputSignal::zero(), 1e-2);
    CHECK(z.x.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("steady sinusoid has amplitude |G(j1)|") {
    const Trajectory tr = simulate_lti(example_g(), InputSignal::windowed_sine(1.0, 40.0, 1.0, 40.0), 1e-3);
    double peak = 0.0;
    for (std::size_t i = 0; i < tr.samples(); ++i) {
        if (tr.t[i] > 15.0 && tr.t[i] < 30.0) peak = std::max(peak, std::abs(tr.y[i]));
    }
    CHECK(peak == doctest::Approx(3.0 / std::sqrt(10.0)).epsilon(1e-4));
}

TEST_CASE("feedback loop") {
    const FeedbackRun run = simulate_feedback({0.3}, example_g(), InputSignal::exp_decay(1.0, 1.0, 1.0, 60.0),
                                              InputSignal::zero(60.0), 1e-3);
    CHECK(run.sys1.samples() == run.sys2.samples());
    CHECK(peak_state(run.sys1) < 10.0);
    CHECK(check_decay(run.sys1).decayed);
    CHECK(check_decay(run.sys2).decayed);
    // u1 = w1 - y2 and u2 = y1 + w2 on every sample
    for (std::size_t i = 0; i < run.sys1.samples(); i += 97) {
        CHECK(run.sys1.u[i] == doctest::Approx(run.w1[i] - run.sys2.y[i]));
        CHECK(run.sys2.u[i] == doctest::Approx(run.sys1.y[i] + run.w2[i]));
    }
    const double g = empirical_gain(std::vector<FeedbackRun>{run});
    CHECK(std::isfinite(g));
    CHECK(g > 0);

    const FeedbackRun zero = simulate_feedback({0.3}, example_g(), InputSignal::zero(), InputSignal::zero(), 1e-2);
    CHECK(peak_state(zero.sys1) == 0.0);
    CHECK(peak_state(zero.sys2) == 0.0);
    CHECK_THROWS_AS(empirical_gain(std::vector<FeedbackRun>{zero}), PreconditionFailure);
    CHECK_THROWS_AS(empirical_gain(std::vector<FeedbackRun>{}), PreconditionFailure);
}

TEST_CASE("closed loop stays bounded below the threshold") {
    for (double alpha : {0.1, 0.2, 0.3, 0.4}) {
        for (const InputSignal& w : suite(200.0)) {
            const FeedbackRun run = simulate_feedback({alpha}, example_g(), w, InputSignal::zero(200.0), 1e-2);
            CHECK(peak_state(run.sys1) < 20.0);
            CHECK(peak_state(run.sys2) < 20.0);
            CHECK(check_decay(run.sys1).decayed);
        }
    }
}

TEST_CASE("empirical closed-loop gain stays under the homotopy bound") {
    const SupplySpec s1 = pwl_supply(0.3, 0.05);
    const SupplySpec s2{SymMat2::diag(0.49, -1.0), SymMat2::diag(2.2801, -1.0), -0.001};
    const double bound = homotopy_gain_bound(s1, s2, check_theorem2(s1, s2).witnesses).gamma_cl;
    std::vector<FeedbackRun> runs;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        runs.push_back(simulate_feedback({0.3}, example_g(), InputSignal::random_bandlimited(seed, 2.0, 1.0, 100.0),
                                         InputSignal::random_bandlimited(seed + 100, 2.0, 0.5, 100.0), 1e-2));
    }
    CHECK(empirical_gain(runs) <= bound);
}

TEST_CASE("storage inequalities hold pointwise") {
    for (double alpha : {0.1, 0.3, 0.6}) {
        const double k = (1 - alpha * alpha) / (1 + alpha);
        for (double delta : {0.0, k / 4, k / 2}) {
            const StorageConfig cfg = StorageConfig::make(alpha, 0.5, delta);
            CHECK(cfg.k == doctest::Approx(k));
            for (const InputSignal& u : suite()) {
                const StorageMargins m = check_storage_inequalities(simulate_pwl({alpha}, u, 1e-2), {alpha}, cfg);
                CHECK(m.ok());
                CHECK(m.max_abs_s3 <= 1e-12 * m.scale);
            }
        }
    }
    const StorageMargins z =
        check_storage_inequalities(simulate_pwl({0.3}, InputSignal::zero(), 1e-2), {0.3}, StorageConfig::make(0.3, 0.5, 0.05));
    CHECK(z.min_s1 == 0.0);
    CHECK(z.min_s2 == 0.0);
    CHECK(z.max_abs_s3 == 0.0);
}

TEST_CASE("storage configuration is validated") {
    CHECK_THROWS_AS(StorageConfig::make(0.3, 0.5, 0.7).validate(0.3), ConfigMismatch);
    CHECK_THROWS_AS(StorageConfig::make(0.3, 1.0, 0.0).validate(0.3), ConfigMismatch);
    CHECK_THROWS_AS(StorageConfig::make(0.3, 0.5, -0.01).validate(0.3), ConfigMismatch);
    StorageConfig wrong_k = StorageConfig::make(0.3, 0.5, 0.0);
    wrong_k.k = 0.5;
    CHECK_THROWS_AS(wrong_k.validate(0.3), ConfigMismatch);
    const Trajectory tr = simulate_pwl({0.3}, InputSignal::zero(), 1e-2);
    CHECK_THROWS_AS(check_storage_inequalities(tr, {0.3}, wrong_k), ConfigMismatch);
}

TEST_CASE("U/V dichotomy") {
    const PwlSystem sys{0.3};
    const StorageConfig cfg = StorageConfig::make(0.3, 0.5, 0.05);

    const DichotomyResult pos = check_dichotomy(simulate_pwl(sys, InputSignal::exp_decay(1.0, 1.0)), sys, cfg);
    CHECK(pos.int_v == doctest::Approx(-0.25).epsilon(1e-6));  // -int (t e^-t)^2
    CHECK(pos.dichotomy_ok);

    const DichotomyResult neg = check_dichotomy(simulate_pwl(sys, InputSignal::exp_decay(-1.0, 1.0)), sys, cfg);
    CHECK(neg.int_v == doctest::Approx(0.3 * 0.25).epsilon(1e-6));
    CHECK(neg.int_u <= neg.tol);
    CHECK(neg.dichotomy_ok);
    CHECK(neg.chain_ok);

    const DichotomyResult z = check_dichotomy(simulate_pwl(sys, InputSignal::zero(), 1e-2), sys, cfg);
    CHECK(z.int_u == 0.0);
    CHECK(z.int_v == 0.0);
    CHECK(z.dichotomy_ok);

    for (const InputSignal& u : suite()) {
        const DichotomyResult d = check_dichotomy(simulate_pwl(sys, u, 1e-2), sys, cfg);
        CHECK(d.dichotomy_ok);
        CHECK(d.chain_ok);
    }

    const Trajectory unfinished = simulate_pwl(sys, InputSignal::windowed_sine(1.0, 40.0), 1e-2);
    CHECK_THROWS_AS(check_dichotomy(unfinished, sys, cfg), TruncationUnsound);
}

TEST_CASE("every sampled input meets one branch of the supply definition") {
    const SupplySpec spec = pwl_supply(0.3, 0.05);
    int runs = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        for (const InputSignal& u : {InputSignal::random_bandlimited(seed, 3.0), InputSignal::piecewise_const(seed)}) {
            CHECK(classify_trajectory(simulate_pwl({0.3}, u, 1e-2), spec).branch != Branch::Neither);
            ++runs;
        }
    }
    for (const InputSignal& u : suite()) {
        CHECK(classify_trajectory(simulate_pwl({0.3}, u, 1e-2), spec).branch != Branch::Neither);
        ++runs;
    }
    CHECK(runs >= 100);
}

TEST_CASE("open-loop empirical gain on the negative branch") {
    const Trajectory tr = simulate_pwl({0.3}, InputSignal::exp_decay(-1.0, 1.0));
    CHECK(empirical_gain(tr) == doctest::Approx(0.3 * 0.5 * std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("seeded inputs are deterministic") {
    const InputSignal a = InputSignal::random_bandlimited(42, 2.0);
    const InputSignal b = InputSignal::random_bandlimited(42, 2.0);
    const InputSignal c = InputSignal::random_bandlimited(43, 2.0);
    bool differs = false;
    for (double t = 0.0; t < 40.0; t += 0.37) {
        CHECK(a(t) == b(t));
        differs = differs || a(t) != c(t);
        CHECK(InputSignal::piecewise_const(7)(t) == InputSignal::piecewise_const(7)(t));
    }
    CHECK(differs);
    CHECK(a(39.9) == 0.0);
    CHECK(InputSignal::piecewise_const(7)(30.0) == 0.0);

    for (const InputSignal& s : suite()) {
        const InputSignal back = InputSignal::from_json(s.to_json());
        CHECK(back.label() == s.label());
        for (double t = 0.0; t < 40.0; t += 1.3) CHECK(back(t) == s(t));
    }
}

TEST_CASE("campaign runner") {
    const nlohmann::json cfg = {
        {"system", {{"kind", "PWL"}, {"alpha", 0.3}}},
        {"inputs", {{{"kind", "EXP_DECAY"}, {"sign", -1.0}}, {{"kind", "PIECEWISE_CONST"}, {"seed", 1}, {"seed_count", 3}}}},
        {"step", 0.01},
        {"checks", {"storage", "dichotomy", "classification"}},
        {"storage", {{"eps_s1", 0.5}, {"delta", 0.05}}},
        {"spec", to_json(pwl_supply(0.3, 0.05))},
    };
    const CampaignResult r = run_campaign(cfg);
    CHECK(r.all_passed);
    CHECK(r.summary["runs"].size() == 4);

    nlohmann::json empty = cfg;
    empty["inputs"] = nlohmann::json::array();
    CHECK_THROWS_AS(run_campaign(empty), ParseError);

    nlohmann::json unknown = cfg;
    unknown["checks"] = {"telepathy"};
    CHECK_THROWS_AS(run_campaign(unknown), ParseError);

    nlohmann::json late_delta = cfg;
    late_delta["storage"]["delta"] = 0.9;
    CHECK_THROWS_AS(run_campaign(late_delta), ConfigMismatch);
}
