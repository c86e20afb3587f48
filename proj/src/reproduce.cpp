#include "mixdiss/cli.hpp"

#include "mixdiss/errors.hpp"
#include "mixdiss/extract.hpp"
#include "mixdiss/interconnect.hpp"
#include "mixdiss/json_io.hpp"
#include "mixdiss/simulate.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace mixdiss {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

StateSpace example_g() {
    Eigen::MatrixXd a(2, 2);
    a << 0.0, 1.0, -2.0, -3.0;
    return StateSpace(a, Eigen::Vector2d(0.0, 1.0), Eigen::RowVector2d(3.0, 0.0), 0.0);
}

SupplySpec example_spec2() { return {SymMat2::diag(0.49, -1.0), SymMat2::diag(2.2801, -1.0), -0.001}; }

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

ReproRow row(std::string name, double computed, double reference, double tol, bool pass, std::string note = {}) {
    return {std::move(name), computed, reference, tol, pass, std::move(note)};
}

std::vector<InputSignal> pwl_suite(int per_alpha_seeds, std::uint64_t offset) {
    std::vector<InputSignal> v{InputSignal::exp_decay(1.0, 1.0, 1.0, 60.0), InputSignal::exp_decay(-1.0, 1.0, 1.0, 60.0),
                               InputSignal::windowed_sine(1.0, 20.0, 1.0, 60.0)};
    for (int s = 0; s < per_alpha_seeds; ++s) {
        const auto seed = offset + static_cast<std::uint64_t>(s);
        v.push_back(s % 2 ? InputSignal::piecewise_const(seed, 1.0, 60.0)
                          : InputSignal::random_bandlimited(seed, 2.0, 1.0, 60.0));
    }
    return v;
}

}  // namespace

KypProblem random_kyp_problem(std::uint64_t seed, int index) {
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(index + 1));
    const int n = 1 + index % 3;
    Eigen::MatrixXd a;
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    do {
        a = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return uniform(rng, -2.0, 2.0); });
        a -= uniform(rng, 1.0, 2.0) * Eigen::MatrixXd::Identity(n, n);
    } while (!is_hurwitz(StateSpace(a, ones, ones.transpose(), 0.0)));
    const Eigen::VectorXd b = Eigen::VectorXd::NullaryExpr(n, [&] { return uniform(rng, -1.0, 1.0); });
    const Eigen::RowVectorXd c = Eigen::RowVectorXd::NullaryExpr(n, [&] { return uniform(rng, -1.0, 1.0); });
    const double d = index % 4 == 0 ? uniform(rng, -0.5, 0.5) : 0.0;
    const SymMat2 theta{uniform(rng, 0.0, 3.0), uniform(rng, -1.0, 1.0), uniform(rng, -2.0, -0.1)};
    const double w = uniform(rng, 0.1, 2.1);
    return {StateSpace(a, b, c, d), theta, index % 2 ? FreqBand::low(w) : FreqBand::high(w)};
}

KypBattery run_kyp_battery(std::uint64_t seed, int count, const KypOptions& opts) {
    KypBattery b;
    for (int i = 0; i < count; ++i) {
        const KypProblem p = random_kyp_problem(seed, i);
        const FdiResult f = fdi_check(p);
        const KypResult r = solve_kyp(p, opts);
        const bool feasible = r.status == KypStatus::Feasible;
        ++b.problems;
        b.fdi_true += f.holds;
        b.feasible += feasible;
        b.false_positives += feasible && !f.holds;
        b.unknown_fdi_true += f.holds && !feasible;
        if (feasible && certificate_margin(p, r.certificate->P, r.certificate->Q) >= 0.5 * r.sigma) ++b.reverified;
    }
    b.unknown_rate = b.fdi_true ? static_cast<double>(b.unknown_fdi_true) / b.fdi_true : 0.0;
    return b;
}

std::vector<ReproRow> reproduce_rows() {
    const double nan = std::nan("");
    const double root2 = std::sqrt(2.0);
    const StateSpace g = example_g();
    const SupplySpec spec2 = example_spec2();
    std::vector<ReproRow> rows;

    const double gamma2 = band_sup_gain(g, FreqBand::low(root2));
    rows.push_back(row("sup|G| on w <= sqrt(2)", gamma2, 1.51, 1e-3, std::abs(gamma2 - 1.5) <= 1e-3 && gamma2 <= 1.51,
                       "1.51 is a rounded-up certificate of the supremum 1.5"));
    const double mu2 = band_sup_gain(g, FreqBand::high(root2));
    rows.push_back(row("sup|G| on w >= sqrt(2)", mu2, 0.7, 1e-3, std::abs(mu2 - std::sqrt(0.5)) <= 1e-3,
                       "the published 0.7 sits 1% below the supremum 1/sqrt(2)"));
    const double wc = choose_crossover(g, 1e-8);
    rows.push_back(row("realness crossover", wc, nan, 1e-4, std::abs(wc - root2) <= 1e-4, "Re G(jw) = 0 at w = sqrt(2)"));

    const double a0 = alpha_threshold(0.0, spec2);
    const double a05 = alpha_threshold(0.05, spec2);
    const double a10 = alpha_threshold(0.1, spec2);
    rows.push_back(row("alpha threshold, delta = 0", a0, 0.43, 1e-3, std::abs(a0 - 1.0 / 2.2801) <= 1e-3 && a0 >= 0.43,
                       "the published value rounds down"));
    rows.push_back(row("alpha threshold decreases in delta", a10, nan, 0.0, a0 > a05 && a05 > a10,
                       "delta 0, 0.05, 0.1: " + fmt(a0) + ", " + fmt(a05) + ", " + fmt(a10)));
    const double product = 1.0 * gamma2;
    rows.push_back(row("gamma1 gamma2", product, 1.51, 1e-3, product > 1.0 && std::abs(product - 1.5) <= 1e-3,
                       "> 1, so the small-gain theorem is silent"));

    const InterconnectionVerdict v3 = check_theorem2(pwl_supply(0.3, 0.05), spec2);
    rows.push_back(row("loop verdict, alpha = 0.3", v3.stable ? 1.0 : 0.0, nan, 0.0, v3.stable, "three nonempty pencils"));
    const InterconnectionVerdict v5 = check_theorem2(pwl_supply(0.5, 0.0), spec2);
    rows.push_back(row("loop verdict, alpha = 0.5", v5.stable ? 1.0 : 0.0, nan, 0.0, !v5.stable && v5.intervals[0].empty,
                       "first pencil empty above the threshold"));

    // Certified parameters of G around wbar = 1.4.
    const MixedLtiReport rep = extract_mixed_lti(g, 1.4, 5e-3, ExtractMethod::Both);
    for (const auto* q : {&rep.mu, &rep.gamma, &rep.epsilon}) {
        const char* name = q == &rep.mu ? "mu" : q == &rep.gamma ? "gamma" : "epsilon";
        rows.push_back(row(std::string("KYP certificate for ") + name + " at wbar = 1.4", q->value, nan, 0.0,
                           q->method == ExtractMethod::Both, "band value " + fmt(q->computed) + " + margin 0.005"));
    }

    // Time-domain reading of the certificates on simulated trajectories of G.
    std::vector<InputSignal> lti_inputs;
    for (double w : {0.2, 0.5, 0.8, 1.0, 1.2, 1.6, 2.0, 3.0, 5.0, 8.0}) lti_inputs.push_back(InputSignal::windowed_sine(w, 30.0, 1.0, 60.0));
    for (double r : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        lti_inputs.push_back(InputSignal::exp_decay(1.0, r, 1.0, 60.0));
        lti_inputs.push_back(InputSignal::exp_decay(-1.0, r, 1.0, 60.0));
    }
    for (std::uint64_t s = 0; s < 20; ++s) {
        lti_inputs.push_back(InputSignal::random_bandlimited(s, 1.0, 1.0, 60.0));
        lti_inputs.push_back(InputSignal::random_bandlimited(100 + s, 6.0, 1.0, 60.0));
    }
    int premises = 0;
    int violations = 0;
    for (const auto& in : lti_inputs) {
        const Trajectory tr = simulate_lti(g, in, 1e-3);
        const std::pair<const CertifiedQuantity*, SymMat2> certs[] = {
            {&rep.mu, rep.theta()}, {&rep.gamma, rep.pi()}, {&rep.epsilon, psi(rep.epsilon.value)}};
        for (const auto& [q, theta] : certs) {
            if (!q->certificate) continue;
            const BandKind kind = q == &rep.mu ? BandKind::High : BandKind::Low;
            const TdCheck c = td_check(tr, theta, q->certificate->Q, 1.4, kind, 1e-5);
            if (c.premise_holds) {
                ++premises;
                violations += !c.conclusion_holds;
            }
        }
    }
    rows.push_back(row("certificate premise => conclusion violations", violations, nan, 0.0, violations == 0,
                       std::to_string(lti_inputs.size()) + " trajectories, " + std::to_string(premises) +
                           " certificate/trajectory pairs with the premise"));

    // The piecewise-linear example against its own supply rates.
    int runs = 0;
    int neither = 0;
    int dich_fail = 0;
    int storage_fail = 0;
    double worst_storage = kInf;
    std::uint64_t offset = 0;
    for (double alpha : {0.1, 0.3, 0.4}) {
        const double k = (1.0 - alpha * alpha) / (1.0 + alpha);
        for (const auto& in : pwl_suite(34, offset)) {
            const Trajectory tr = simulate_pwl({alpha}, in, 5e-3);
            ++runs;
            for (double delta : {0.0, 0.25 * k, 0.5 * k}) {
                const StorageConfig cfg = StorageConfig::make(alpha, 0.5, delta);
                const StorageMargins m = check_storage_inequalities(tr, {alpha}, cfg);
                storage_fail += !m.ok();
                worst_storage = std::min({worst_storage, m.min_s1 / m.scale, m.min_s2 / m.scale, m.min_s3 / m.scale});
                const DichotomyResult d = check_dichotomy(tr, {alpha}, cfg);
                dich_fail += !(d.dichotomy_ok && d.chain_ok);
                neither += classify_trajectory(tr, pwl_supply(alpha, delta)).branch == Branch::Neither;
            }
        }
        offset += 1000;
    }
    const std::string cover = std::to_string(runs) + " inputs x 3 values of delta, alpha in {0.1, 0.3, 0.4}";
    rows.push_back(row("classification NEITHER count", neither, nan, 0.0, neither == 0, cover));
    rows.push_back(row("storage inequality minimum relative margin", worst_storage, nan, 1e-9, storage_fail == 0, cover));
    rows.push_back(row("U/V dichotomy failures", dich_fail, nan, 0.0, dich_fail == 0, cover));

    // Closed loop at alpha = 0.3.
    const SupplySpec spec1 = pwl_supply(0.3, 0.05);
    const HomotopyGainBound hb = homotopy_gain_bound(spec1, spec2, v3.witnesses, 101);
    std::vector<FeedbackRun> loop;
    for (const auto& in : pwl_suite(20, 5000)) {
        loop.push_back(simulate_feedback({0.3}, g, in, InputSignal::zero(200.0), 5e-3));
    }
    bool bounded = true;
    for (const auto& r : loop) bounded = bounded && check_decay(r.sys1).decayed && check_decay(r.sys2).decayed;
    const double emp = empirical_gain(loop);
    rows.push_back(row("closed-loop empirical gain", emp, nan, 0.0, bounded && emp <= hb.gamma_cl,
                       "homotopy bound gamma_cl = " + fmt(hb.gamma_cl)));

    const KypBattery b = run_kyp_battery(2024, 200);
    rows.push_back(row("KYP feasible while the FDI fails", b.false_positives, nan, 0.0, b.false_positives == 0,
                       std::to_string(b.problems) + " random problems, " + std::to_string(b.fdi_true) + " satisfy the FDI"));
    rows.push_back(row("KYP UNKNOWN rate among FDI-true problems", b.unknown_rate, nan, 0.2, b.unknown_rate < 0.2,
                       std::to_string(b.unknown_fdi_true) + " of " + std::to_string(b.fdi_true)));
    rows.push_back(row("certificates re-verified", b.feasible ? static_cast<double>(b.reverified) / b.feasible : 1.0, nan,
                       0.0, b.reverified == b.feasible, std::to_string(b.reverified) + " of " + std::to_string(b.feasible)));
    return rows;
}

}  // namespace mixdiss
