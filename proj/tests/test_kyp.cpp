#include "common.hpp"

#include "mixdiss/errors.hpp"
#include "mixdiss/kyp.hpp"
#include "mixdiss/simulate.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>

using namespace mixdiss;
using testing::example_g;

namespace {

double lambda_max(const SymMatN& s) { return eign(s).back(); }

KypProblem g_problem(const SymMat2& theta, FreqBand band) { return {example_g(), theta, band}; }

// Independent reading of F(P, Q) straight from the quadratic form, used to
// cross-check the basis assembly.
double quadratic_form(const KypProblem& prob, const SymMatN& p, const SymMatN& q,
                      const Eigen::VectorXd& x, double u) {
    const StateSpace& s = prob.sys;
    const Eigen::VectorXd xd = s.A * x + s.B * u;
    const double y = s.C.dot(x) + s.D * u;
    const double sign = prob.band.kind == BandKind::High ? -1.0 : 1.0;
    const double w2 = prob.band.omega_bar * prob.band.omega_bar;
    const double vdot = 2.0 * x.dot(p.dense() * xd);
    const double w = xd.dot(q.dense() * xd) - w2 * x.dot(q.dense() * x);
    const Eigen::Vector2d xi(u, y);
    return vdot - sign * w - xi.dot(prob.theta.dense() * xi);
}

}  // namespace

TEST_CASE("LMI map has the right shape and parameter count") {
    const KypProblem prob = g_problem(psi(-0.005), FreqBand::low(1.4));
    const KypLmi lmi = build_kyp_lmi(prob);
    CHECK(lmi.lmi_dim() == 3);
    CHECK(lmi.free_parameters() == 6);
    CHECK(lmi.basis().size() == 6);
    CHECK(lmi.band_sign() == 1);
    CHECK(build_kyp_lmi(g_problem(psi(-0.005), FreqBand::high(1.4))).band_sign() == -1);
}

TEST_CASE("LMI map agrees with the dissipation inequality as a quadratic form") {
    std::mt19937_64 rng(7);
    for (const FreqBand band : {FreqBand::low(1.1), FreqBand::high(2.3)}) {
        const KypProblem prob = g_problem(SymMat2{0.3, -0.4, -1.2}, band);
        const KypLmi lmi = build_kyp_lmi(prob);
        for (int trial = 0; trial < 20; ++trial) {
            Eigen::VectorXd v(6);
            for (Eigen::Index i = 0; i < 6; ++i) v(i) = testing::unif(rng, -2, 2);
            const auto [p, q] = lmi.unpack(v);
            const SymMatN f = lmi.evaluate(v);
            Eigen::Vector3d z(testing::unif(rng, -1, 1), testing::unif(rng, -1, 1), testing::unif(rng, -1, 1));
            const double lhs = z.dot(f.dense() * z);
            const double rhs = quadratic_form(prob, p, q, z.head<2>(), z(2));
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
        }
    }
}

TEST_CASE("pure gain reduces to a scalar sign condition") {
    const SymMat2 theta{1.0, 0.0, -0.5};
    const KypProblem prob{StateSpace::gain(1.2), theta, FreqBand::low(1.0)};
    const KypLmi lmi = build_kyp_lmi(prob);
    CHECK(lmi.lmi_dim() == 1);
    CHECK(lmi.free_parameters() == 0);
    CHECK(lmi.constant()(0, 0) == doctest::Approx(-(1.0 - 0.5 * 1.44)));
    CHECK(solve_kyp(prob).status == KypStatus::Feasible);

    const KypProblem bad{StateSpace::gain(2.0), theta, FreqBand::low(1.0)};
    CHECK(solve_kyp(bad).status == KypStatus::Unknown);
}

TEST_CASE("zero Theta and zero edge give a negative semidefinite Q block") {
    const KypProblem prob = g_problem(SymMat2{0.0, 0.0, 0.0}, FreqBand::low(0.0));
    const KypLmi lmi = build_kyp_lmi(prob);
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd r(2, 2);
        r << testing::unif(rng, -1, 1), testing::unif(rng, -1, 1), testing::unif(rng, -1, 1),
            testing::unif(rng, -1, 1);
        const SymMatN q(r * r.transpose());
        CHECK(lambda_max(lmi.evaluate(SymMatN(2), q)) <= 1e-12);
    }
}

TEST_CASE("solve_kyp on the running example") {
    SUBCASE("gain 1.6 below 1.4 is feasible") {
        const KypProblem prob = g_problem(SymMat2::diag(1.6 * 1.6, -1.0), FreqBand::low(1.4));
        const KypResult r = solve_kyp(prob);
        REQUIRE(r.status == KypStatus::Feasible);
        REQUIRE(r.certificate);
        CHECK(r.certificate->problem_hash == prob.hash());
    }
    SUBCASE("gain 0.7 below 1.4 is not") {
        const KypProblem prob = g_problem(SymMat2::diag(0.49, -1.0), FreqBand::low(1.4));
        CHECK(solve_kyp(prob).status == KypStatus::Unknown);
        CHECK_FALSE(fdi_check(prob).holds);
    }
    SUBCASE("gain sqrt(0.51) above 1.43 is feasible") {
        const KypProblem prob = g_problem(SymMat2::diag(0.51, -1.0), FreqBand::high(1.43));
        CHECK(fdi_check(prob).holds);
        CHECK(solve_kyp(prob).status == KypStatus::Feasible);
    }
}

TEST_CASE("certificates re-verify by eigenvalues") {
    const KypProblem prob = g_problem(psi(-0.0018), FreqBand::low(1.4));
    const KypResult r = solve_kyp(prob);
    REQUIRE(r.status == KypStatus::Feasible);
    const KypCertificate& c = *r.certificate;
    const KypLmi lmi = build_kyp_lmi(prob);
    CHECK(lambda_max(lmi.evaluate(c.P, c.Q)) <= -r.sigma / 2);
    CHECK(eign(c.Q).front() >= r.sigma / 2);
    CHECK(c.margin == doctest::Approx(certificate_margin(prob, c.P, c.Q)));
    CHECK(c.margin > 0);
}

TEST_CASE("fdi_check examples") {
    const FdiResult low = fdi_check(g_problem(psi(0.0), FreqBand::low(1.4)));
    CHECK(low.holds);
    CHECK(low.omega == doctest::Approx(1.4).epsilon(1e-6));
    CHECK(low.min_value == doctest::Approx(2 * 3 * (2 - 1.96) / (2.96 * 5.96)).epsilon(1e-6));

    const FdiResult past = fdi_check(g_problem(psi(0.0), FreqBand::low(1.5)));
    CHECK_FALSE(past.holds);
    CHECK(past.omega > std::sqrt(2.0));
    CHECK(past.omega <= 1.5);

    CHECK(fdi_check(g_problem(SymMat2::diag(4.0, -1.0), FreqBand::full())).holds);

    KypProblem unstable = g_problem(psi(0.0), FreqBand::low(1.0));
    unstable.sys.A(1, 1) = 3.0;
    CHECK_THROWS_AS(fdi_check(unstable), NotHurwitz);
}

TEST_CASE("time-domain premise follows the input frequency") {
    const StateSpace g = example_g();
    const SymMatN q = SymMatN::identity(2);

    const Trajectory slow = simulate_lti(g, InputSignal::windowed_sine(0.5, 20.0), 1e-2);
    const TdCheck a = td_check(slow, psi(0.0), q, 1.4);
    CHECK(a.premise_holds);
    CHECK(a.conclusion_holds);

    const Trajectory fast = simulate_lti(g, InputSignal::windowed_sine(3.0, 20.0), 1e-2);
    CHECK_FALSE(td_check(fast, psi(0.0), q, 1.4).premise_holds);
    CHECK(td_check(fast, psi(0.0), q, 1.4, BandKind::High).premise_holds);

    const Trajectory zero = simulate_lti(g, InputSignal::zero(), 1e-2);
    const TdCheck z = td_check(zero, psi(0.0), q, 1.4);
    CHECK(z.premise_holds);
    CHECK(z.conclusion_holds);
    CHECK(z.x_energy == 0.0);
    CHECK(z.xdot_energy == 0.0);
}

TEST_CASE("td_check rejects trajectories that have not decayed") {
    const Trajectory tr = simulate_lti(example_g(), InputSignal::windowed_sine(0.5, 40.0), 1e-2);
    CHECK_THROWS_AS(td_check(tr, psi(0.0), SymMatN::identity(2), 1.4), TruncationUnsound);
}

TEST_CASE("feasible certificate implies the conclusion whenever its premise holds") {
    const KypProblem prob = g_problem(psi(-0.0018), FreqBand::low(1.4));
    const KypResult r = solve_kyp(prob);
    REQUIRE(r.certificate);
    int premises = 0;
    for (double w0 : {0.2, 0.5, 0.9, 1.2, 1.35, 2.0, 4.0}) {
        const Trajectory tr = simulate_lti(prob.sys, InputSignal::windowed_sine(w0, 20.0), 1e-2);
        const TdCheck c = td_check(tr, prob.theta, r.certificate->Q, 1.4, BandKind::Low, 1e-5);
        if (c.premise_holds) {
            ++premises;
            CHECK(c.conclusion_holds);
        }
    }
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const Trajectory tr = simulate_lti(prob.sys, InputSignal::random_bandlimited(seed, 1.0), 1e-2);
        const TdCheck c = td_check(tr, prob.theta, r.certificate->Q, 1.4, BandKind::Low, 1e-5);
        if (c.premise_holds) {
            ++premises;
            CHECK(c.conclusion_holds);
        }
    }
    CHECK(premises > 0);
}

TEST_CASE("solve_kyp never contradicts the frequency-domain oracle") {
    std::mt19937_64 rng(99);
    int fdi_true = 0;
    int feasible = 0;
    for (int k = 0; k < 30; ++k) {
        const Eigen::Index n = 1 + k % 3;
        StateSpace sys;
        do {
            Eigen::MatrixXd a(n, n);
            for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = testing::unif(rng, -2, 2);
            a -= testing::unif(rng, 1, 2) * Eigen::MatrixXd::Identity(n, n);
            Eigen::VectorXd b(n);
            Eigen::RowVectorXd c(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                b(i) = testing::unif(rng, -1, 1);
                c(i) = testing::unif(rng, -1, 1);
            }
            sys = StateSpace(a, b, c, k % 4 == 0 ? testing::unif(rng, -0.5, 0.5) : 0.0);
        } while (!is_hurwitz(sys));
        const SymMat2 theta{testing::unif(rng, 0, 3), testing::unif(rng, -1, 1), testing::unif(rng, -2, -0.1)};
        const double w = testing::unif(rng, 0.1, 2.1);
        const KypProblem prob{sys, theta, k % 2 ? FreqBand::low(w) : FreqBand::high(w)};
        const bool fdi = fdi_check(prob).holds;
        const KypResult r = solve_kyp(prob);
        fdi_true += fdi;
        if (r.status == KypStatus::Feasible) {
            ++feasible;
            CHECK(fdi);
            CHECK(r.certificate->margin >= r.sigma / 2);
        }
    }
    CHECK(fdi_true > 0);
    CHECK(feasible > 0);
}

TEST_CASE("certificate JSON round trip") {
    const KypProblem prob = g_problem(SymMat2::diag(1.6 * 1.6, -1.0), FreqBand::low(1.4));
    const KypCertificate c = *solve_kyp(prob).certificate;
    const nlohmann::json j = to_json(c);
    CHECK(j.contains("P"));
    CHECK(j.contains("Q"));
    CHECK(j["P"].size() == 4);
    const KypCertificate back = certificate_from_json(j);
    CHECK(back.P.dense() == c.P.dense());
    CHECK(back.Q.dense() == c.Q.dense());
    CHECK(back.margin == c.margin);
    CHECK(back.problem_hash == c.problem_hash);
    CHECK(hash_hex(prob.hash()).size() == 16);
}
