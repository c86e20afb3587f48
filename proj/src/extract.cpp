#include "mixdiss/extract.hpp"

#include "mixdiss/errors.hpp"
#include "mixdiss/json_io.hpp"

#include <cmath>
#include <limits>

namespace mixdiss {

const char* to_string(ExtractMethod m) {
    switch (m) {
        case ExtractMethod::Grid: return "GRID";
        case ExtractMethod::Kyp: return "KYP";
        case ExtractMethod::Both: return "BOTH";
    }
    return "?";
}

ExtractMethod extract_method_from_string(const std::string& s) {
    if (s == "grid" || s == "GRID") return ExtractMethod::Grid;
    if (s == "kyp" || s == "KYP") return ExtractMethod::Kyp;
    if (s == "both" || s == "BOTH") return ExtractMethod::Both;
    throw PreconditionFailure("unknown method '" + s + "' (expected grid|kyp|both)");
}

namespace {

void certify(CertifiedQuantity& q, const KypProblem& prob, const KypOptions& opts) {
    const KypResult r = solve_kyp(prob, opts);
    q.kyp_residual = r.residual;
    if (r.status == KypStatus::Feasible) {
        q.certificate = r.certificate;
        q.method = ExtractMethod::Both;
    }
}

}  // namespace

MixedLtiReport extract_mixed_lti(const StateSpace& sys,
                                 double omega_bar,
                                 double margin,
                                 ExtractMethod method,
                                 const KypOptions& kyp_opts) {
    if (!is_hurwitz(sys)) {
        throw NotHurwitz("extraction requires a Hurwitz A");
    }
    if (!(omega_bar > 0.0) || !std::isfinite(omega_bar)) {
        throw PreconditionFailure("omega_bar must be positive and finite");
    }
    if (!(margin >= 0.0)) {
        throw PreconditionFailure("margin must be non-negative");
    }
    MixedLtiReport rep;
    rep.omega_bar = omega_bar;
    rep.method = method;
    rep.controllable = is_controllable(sys);

    const BandExtremum hi = band_sup_gain_at(sys, FreqBand::high(omega_bar));
    const BandExtremum lo = band_sup_gain_at(sys, FreqBand::low(omega_bar));
    const BandExtremum re = band_inf_real_at(sys, FreqBand::low(omega_bar));

    rep.mu = {hi.value, margin, hi.value + margin, hi.omega, ExtractMethod::Grid, std::nullopt, 0.0};
    rep.gamma = {lo.value, margin, lo.value + margin, lo.omega, ExtractMethod::Grid, std::nullopt, 0.0};
    rep.epsilon = {-re.value, margin, -re.value + margin, re.omega, ExtractMethod::Grid, std::nullopt, 0.0};

    if (rep.epsilon.value >= -kEpsilonZeroFloor) {
        throw NonMixed("epsilon = " + format_double(rep.epsilon.value) +
                       " is not negative; lower omega_bar below the realness crossover");
    }

    if (method != ExtractMethod::Grid) {
        certify(rep.mu, {sys, rep.theta(), FreqBand::high(omega_bar)}, kyp_opts);
        certify(rep.gamma, {sys, rep.pi(), FreqBand::low(omega_bar)}, kyp_opts);
        certify(rep.epsilon, {sys, psi(rep.epsilon.value), FreqBand::low(omega_bar)}, kyp_opts);
    }
    return rep;
}

double choose_crossover(const StateSpace& sys, double eta) {
    if (!is_hurwitz(sys)) {
        throw NotHurwitz("crossover search requires a Hurwitz A");
    }
    if (!(eta > 0.0)) {
        throw PreconditionFailure("eta must be positive");
    }
    if (!(freq_response(sys, 0.0).real() > eta)) {
        throw NeverPassive("Re G(0) <= eta");
    }
    if (band_inf_real(sys, FreqBand::full()) >= eta) {
        return std::numeric_limits<double>::infinity();
    }
    const auto passive_up_to = [&](double w) { return band_inf_real(sys, FreqBand::low(w)) >= eta; };
    double lo = 0.0;
    double hi = 1.0;
    while (passive_up_to(hi)) {
        lo = hi;
        hi *= 2.0;
    }
    while (hi - lo > 1e-9 * hi) {
        const double mid = 0.5 * (lo + hi);
        (passive_up_to(mid) ? lo : hi) = mid;
    }
    return lo;
}

namespace {

nlohmann::json quantity_json(const CertifiedQuantity& q) {
    nlohmann::json j{
        {"computed", q.computed},
        {"margin", q.margin},
        {"value", q.value},
        {"witness_omega", json_number(q.witness_omega)},
        {"method", to_string(q.method)},
    };
    if (q.certificate) {
        j["certificate"] = to_json(*q.certificate);
    } else {
        j["certificate"] = nullptr;
    }
    if (q.method == ExtractMethod::Grid && q.kyp_residual > 0.0) {
        j["kyp_residual"] = q.kyp_residual;
    }
    return j;
}

}  // namespace

nlohmann::json to_json(const MixedLtiReport& r) {
    return {
        {"omega_bar", r.omega_bar},
        {"mu", quantity_json(r.mu)},
        {"gamma", quantity_json(r.gamma)},
        {"epsilon", quantity_json(r.epsilon)},
        {"method", to_string(r.method)},
        {"controllable", r.controllable},
        {"high_band_extension", r.method != ExtractMethod::Grid},
        {"theta", to_json(r.theta())},
        {"pi", to_json(r.pi())},
        {"spec", to_json(r.spec())},
    };
}

}  // namespace mixdiss
