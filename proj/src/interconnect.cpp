#include "mixdiss/interconnect.hpp"

#include "mixdiss/errors.hpp"
#include "mixdiss/json_io.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>

namespace mixdiss {

double PencilInterval::witness() const {
    if (empty) return std::nan("");
    if (std::isinf(hi)) return lo + std::max(1.0, lo);
    return 0.5 * (lo + hi);
}

namespace {

// Positive real roots of c0 + c1 p + c2 p^2, Newton-polished.
std::vector<double> positive_roots(double c0, double c1, double c2) {
    std::vector<double> r;
    const double scale = std::abs(c0) + std::abs(c1) + std::abs(c2);
    if (scale == 0.0) return r;
    if (std::abs(c2) <= 1e-15 * scale) {
        if (c1 != 0.0) r.push_back(-c0 / c1);
    } else {
        const double disc = c1 * c1 - 4.0 * c2 * c0;
        if (disc >= 0.0) {
            const double q = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
            if (q != 0.0) {
                r.push_back(q / c2);
                r.push_back(c0 / q);
            } else {
                r.push_back(0.0);
            }
        }
    }
    std::vector<double> out;
    for (double p : r) {
        for (int i = 0; i < 3; ++i) {
            const double f = c0 + p * (c1 + p * c2);
            const double df = c1 + 2.0 * c2 * p;
            if (df == 0.0) break;
            p -= f / df;
        }
        if (std::isfinite(p) && p > 0.0) out.push_back(p);
    }
    return out;
}

}  // namespace

PencilInterval pencil_negdef_interval(const SymMat2& a, const SymMat2& b) {
    std::vector<double> cuts{0.0};
    if (b.trace() != 0.0) {
        const double p = -a.trace() / b.trace();
        if (p > 0.0) cuts.push_back(p);
    }
    const double c1 = a.a11 * b.a22 + a.a22 * b.a11 - 2.0 * a.a12 * b.a12;
    for (double p : positive_roots(a.det(), c1, b.det())) cuts.push_back(p);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const auto feasible = [&](double p) { return is_negdef(a + p * b); };
    // The feasible set is convex, so at most one run of consecutive segments qualifies.
    PencilInterval iv;
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        const double l = cuts[i];
        const double h = i + 1 < cuts.size() ? cuts[i + 1] : kInf;
        const double mid = std::isinf(h) ? l + std::max(1.0, l) : 0.5 * (l + h);
        if (!feasible(mid)) {
            if (!iv.empty) break;
            continue;
        }
        if (iv.empty) {
            iv.empty = false;
            iv.lo = l;
        }
        iv.hi = h;
    }
    iv.lo_attained = !iv.empty && iv.lo == 0.0 && feasible(0.0);
    return iv;
}

InterconnectionVerdict check_theorem2(const SupplySpec& spec1, const SupplySpec& spec2) {
    InterconnectionVerdict v;
    if (!(spec1.epsilon <= 0.0)) v.failed_hypotheses.push_back("eps1 <= 0");
    if (!(spec2.epsilon < 0.0)) v.failed_hypotheses.push_back("eps2 < 0");
    if (!is_finite_gain_mixed(spec1)) v.failed_hypotheses.push_back("subsystem 1 finite-gain mixed");
    v.hypotheses_ok = v.failed_hypotheses.empty();

    v.intervals = {pencil_negdef_interval(m_congruence(spec1.theta), spec2.pi),
                   pencil_negdef_interval(m_congruence(spec1.pi), spec2.theta),
                   pencil_negdef_interval(m_congruence(spec1.theta), spec2.theta)};
    bool all = true;
    for (std::size_t i = 0; i < 3; ++i) {
        v.witnesses[i] = v.intervals[i].witness();
        all = all && !v.intervals[i].empty;
    }
    v.stable = v.hypotheses_ok && all;
    return v;
}

SupplySpec pwl_supply(double alpha, double delta) {
    return {{alpha, 0.5 * delta, -1.0}, SymMat2::diag(1.0, -1.0), 0.0};
}

double alpha_threshold(double delta, const SupplySpec& spec2) {
    if (!(delta >= 0.0 && delta < 1.0)) {
        throw PreconditionFailure("delta must lie in [0, 1)");
    }
    const auto ok = [&](double a) { return check_theorem2(pwl_supply(a, delta), spec2).stable; };
    double lo = 0.0;
    double hi = 1.0 - delta;
    if (!ok(lo)) return 0.0;
    if (ok(std::nextafter(hi, 0.0))) return hi;
    while (hi - lo > 1e-7) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? lo : hi) = mid;
    }
    return lo;
}

namespace {

using Mat2 = Eigen::Matrix2d;

Mat2 m_tau(double tau) { return (Mat2() << 0.0, -tau, 1.0, 0.0).finished(); }
const Mat2 kN1 = (Mat2() << 1.0, 0.0, 0.0, 0.0).finished();
const Mat2 kN2 = (Mat2() << 0.0, 1.0, 0.0, 0.0).finished();

struct Blocks {
    SymMat2 x;  // y-block
    Mat2 y;     // cross block
    SymMat2 z;  // w-block
};

// Sum of the two loop inequalities weighted by W1 (subsystem 1) and W2 (subsystem 2):
// [u1; y1] = M_tau y + N1 w,  [u2; y2] = y + N2 w.
Blocks assemble(double tau, const SymMat2& w1, const SymMat2& w2) {
    const Mat2 m = m_tau(tau);
    const Mat2 a = w1.dense();
    const Mat2 b = w2.dense();
    return {SymMat2::from_dense(m.transpose() * a * m + b),
            m.transpose() * a * kN1 + b * kN2,
            SymMat2::from_dense(kN1.transpose() * a * kN1 + kN2.transpose() * b * kN2)};
}

using Weights = std::function<std::pair<SymMat2, SymMat2>(double)>;

// Constants of a branch over the grid; nullopt with the failing tau when X(tau) is not < 0.
std::optional<BranchConstants> sweep(const std::vector<double>& grid, const Weights& weights, double* failed_tau) {
    BranchConstants c;
    c.margin = kInf;
    for (double tau : grid) {
        const auto [w1, w2] = weights(tau);
        const Blocks bl = assemble(tau, w1, w2);
        const double m = -eig2(bl.x).lambda_max;
        if (!(m > 0.0)) {
            if (failed_tau) *failed_tau = tau;
            return std::nullopt;
        }
        c.margin = std::min(c.margin, m);
        c.cross = std::max(c.cross, spectral_norm(bl.y));
        c.wblock = std::max(c.wblock, spectral_norm(bl.z.dense()));
    }
    // Re-verification with the spectral margin halved.
    for (double tau : grid) {
        const auto [w1, w2] = weights(tau);
        if (!is_negdef(assemble(tau, w1, w2).x, 0.5 * c.margin)) {
            if (failed_tau) *failed_tau = tau;
            return std::nullopt;
        }
    }
    const double e = c.margin;
    c.bound = std::sqrt(4.0 * c.cross * c.cross + 2.0 * e * c.wblock) / e;
    c.bound_single_cross = std::sqrt(c.cross * c.cross + 2.0 * e * c.wblock) / e;
    return c;
}

// tau = 0 multiplier of W2 when W1 is fixed and W2 = p(tau) S2:
// X(0) = [[s1_22, 0], [0, 0]] + p S2 must be < 0.
double start_multiplier(const SymMat2& s1, const SymMat2& s2, double p_end) {
    double p = s2.a11 > 0.0 ? std::min(p_end, -s1.a22 / (2.0 * s2.a11)) / 2.0 : p_end / 2.0;
    for (int i = 0; i < 200 && p > 0.0; ++i, p *= 0.5) {
        if (is_negdef(assemble(0.0, s1, p * s2).x)) return p;
    }
    throw BranchInfeasible(0.0, "tau = 0 multiplier");
}

BranchConstants scalar_branch(const std::string& name,
                              const std::vector<double>& grid,
                              const SymMat2& s1,
                              const SymMat2& s2,
                              double p_end,
                              bool reconstruction) {
    double p0 = 0.0;
    try {
        p0 = start_multiplier(s1, s2, p_end);
    } catch (const BranchInfeasible&) {
        throw BranchInfeasible(0.0, name);
    }
    double failed = 0.0;
    auto c = sweep(grid, [&](double t) { return std::pair{s1, ((1.0 - t) * p0 + t * p_end) * s2}; }, &failed);
    if (!c) throw BranchInfeasible(failed, name);
    c->name = name;
    c->reconstruction = reconstruction;
    c->multipliers = {{"p(0)", p0}, {"p(1)", p_end}};
    return *c;
}

std::vector<double> logspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        v[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    }
    return v;
}

// Both subsystems in their passive regime:
// W1 = k Pi1 + beta Psi_0,  W2 = alpha2(tau) Pi2 + beta2(tau) Psi_eps2,
// with alpha2(1) = 1, beta2(1) = beta and (alpha2(0), beta2(0)) small.
BranchConstants omega_branch(const std::vector<double>& grid, const SupplySpec& s1, const SupplySpec& s2) {
    const std::string name = "Omega-Omega";
    const SymMat2 pi1 = s1.pi;
    const SymMat2 pi2 = s2.pi;
    const SymMat2 psi2 = psi(s2.epsilon);
    const SymMat2 psi0 = psi(0.0);
    const auto sweep_grid = logspace(1e-3, 1e3, 30);
    const auto start_grid = logspace(1e-6, 1.0, 25);

    std::optional<BranchConstants> best;
    for (double k : sweep_grid) {
        if (!(k * pi1.a11 + pi2.a22 < 0.0)) continue;
        for (double beta : sweep_grid) {
            const SymMat2 w1 = k * pi1 + beta * psi0;
            if (!is_negdef(assemble(1.0, w1, pi2 + beta * psi2).x)) continue;
            double a0 = 0.0;
            double b0 = 0.0;
            double best_l0 = 0.0;
            for (double a : start_grid) {
                for (double b : start_grid) {
                    const double m = -eig2(assemble(0.0, w1, a * pi2 + b * psi2).x).lambda_max;
                    if (m > best_l0) {
                        best_l0 = m;
                        a0 = a;
                        b0 = b;
                    }
                }
            }
            if (!(best_l0 > 0.0)) continue;
            auto c = sweep(grid,
                           [&](double t) {
                               const double a2 = (1.0 - t) * a0 + t;
                               const double b2 = (1.0 - t) * b0 + t * beta;
                               return std::pair{w1, a2 * pi2 + b2 * psi2};
                           },
                           nullptr);
            if (c && (!best || c->bound < best->bound)) {
                c->multipliers = {{"alpha1", k}, {"beta1", beta}, {"alpha2(0)", a0},
                                  {"beta2(0)", b0}, {"alpha2(1)", 1.0}, {"beta2(1)", beta}};
                best = c;
            }
        }
    }
    if (!best) throw BranchInfeasible(1.0, name);
    best->name = name;
    return *best;
}

}  // namespace

HomotopyGainBound homotopy_gain_bound(const SupplySpec& spec1,
                                      const SupplySpec& spec2,
                                      const std::array<double, 3>& witnesses,
                                      int tau_steps) {
    if (tau_steps < 11) {
        throw PreconditionFailure("tau_steps must be at least 11");
    }
    const InterconnectionVerdict v = check_theorem2(spec1, spec2);
    if (!v.stable) {
        std::string why = v.hypotheses_ok ? "an interconnection pencil is infeasible" : v.failed_hypotheses.front();
        throw PreconditionFailure("interconnection conditions fail: " + why);
    }
    for (std::size_t i = 0; i < 3; ++i) {
        if (!v.intervals[i].contains(witnesses[i])) {
            throw PreconditionFailure("witness p" + std::to_string(i + 1) + " = " + format_double(witnesses[i]) +
                                      " lies outside its feasible interval");
        }
    }

    HomotopyGainBound out;
    for (int i = 0; i < tau_steps; ++i) out.tau_grid.push_back(static_cast<double>(i) / (tau_steps - 1));
    const auto& g = out.tau_grid;

    out.branches.push_back(scalar_branch("Theta-Theta", g, spec1.theta, spec2.theta, witnesses[2], false));
    out.branches.push_back(scalar_branch("Theta-Omega", g, spec1.theta, spec2.pi, witnesses[0], true));
    out.branches.push_back(scalar_branch("Omega-Theta", g, spec1.pi, spec2.theta, witnesses[1], true));
    out.branches.push_back(omega_branch(g, spec1, spec2));
    for (const auto& b : out.branches) out.gamma_cl = std::max(out.gamma_cl, b.bound);
    return out;
}

nlohmann::json to_json(const PencilInterval& iv) {
    return {{"lo", json_number(iv.lo)},
            {"hi", json_number(iv.hi)},
            {"empty", iv.empty},
            {"lo_attained", iv.lo_attained}};
}

nlohmann::json to_json(const InterconnectionVerdict& v) {
    nlohmann::json iv = nlohmann::json::array();
    nlohmann::json w = nlohmann::json::array();
    for (std::size_t i = 0; i < 3; ++i) {
        iv.push_back(to_json(v.intervals[i]));
        w.push_back(json_number(v.witnesses[i]));
    }
    nlohmann::json j{{"hypotheses_ok", v.hypotheses_ok},
                     {"failed_hypotheses", v.failed_hypotheses},
                     {"intervals", iv},
                     {"witnesses", w},
                     {"stable", v.stable},
                     {"well_posedness_checked", false}};
    j["gain_bound"] = v.gain_bound ? json_number(*v.gain_bound) : nlohmann::json(nullptr);
    return j;
}

nlohmann::json to_json(const HomotopyGainBound& b) {
    nlohmann::json br = nlohmann::json::array();
    for (const auto& c : b.branches) {
        nlohmann::json m = nlohmann::json::object();
        for (const auto& [k, val] : c.multipliers) m[k] = val;
        br.push_back({{"name", c.name},
                      {"margin", c.margin},
                      {"cross", c.cross},
                      {"wblock", c.wblock},
                      {"bound", c.bound},
                      {"bound_single_cross", c.bound_single_cross},
                      {"reconstruction", c.reconstruction},
                      {"multipliers", m}});
    }
    return {{"tau_steps", b.tau_grid.size()}, {"branches", br}, {"gamma_cl", b.gamma_cl}};
}

}  // namespace mixdiss
