#pragma once

/**
 * @file extract.hpp
 * @brief Mixed small-gain/passivity parameters of an LTI system around a crossover.
 *
 * Below the crossover wbar the system is treated as (input-strictly) passive with
 * gain gamma, above it as a small-gain system with gain mu:
 *
 *   Theta = diag(mu^2, -1)  on w >= wbar
 *   Pi    = diag(gamma^2, -1), Psi_eps  on w <= wbar,  eps = -inf Re G
 *
 * Each quantity is the computed band extremum plus an explicit additive margin.
 */

#include "mixdiss/kyp.hpp"
#include "mixdiss/lti.hpp"
#include "mixdiss/supply.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace mixdiss {

enum class ExtractMethod { Grid, Kyp, Both };

const char* to_string(ExtractMethod m);
ExtractMethod extract_method_from_string(const std::string& s);

struct CertifiedQuantity {
    double computed = 0.0;       ///< raw band extremum (for epsilon: -inf Re G)
    double margin = 0.0;         ///< additive slack
    double value = 0.0;          ///< computed + margin
    double witness_omega = 0.0;  ///< frequency attaining the extremum
    /// GRID, or BOTH once a KYP certificate re-verified.
    ExtractMethod method = ExtractMethod::Grid;
    std::optional<KypCertificate> certificate;
    double kyp_residual = 0.0;
};

struct MixedLtiReport {
    double omega_bar = 0.0;
    CertifiedQuantity mu;
    CertifiedQuantity gamma;
    CertifiedQuantity epsilon;
    ExtractMethod method = ExtractMethod::Grid;
    bool controllable = true;

    SymMat2 theta() const { return SymMat2::diag(mu.value * mu.value, -1.0); }
    SymMat2 pi() const { return SymMat2::diag(gamma.value * gamma.value, -1.0); }
    SupplySpec spec() const { return {theta(), pi(), epsilon.value}; }
};

/// epsilon at or above -kEpsilonZeroFloor counts as zero (not strictly passive).
inline constexpr double kEpsilonZeroFloor = 1e-12;

/**
 * Band extrema plus margins; with method Kyp or Both every quantity is also
 * certified by solve_kyp, and an UNKNOWN outcome leaves that quantity at GRID.
 * @throws NotHurwitz, NonMixed when epsilon >= 0.
 */
MixedLtiReport extract_mixed_lti(const StateSpace& sys,
                                 double omega_bar,
                                 double margin,
                                 ExtractMethod method = ExtractMethod::Grid,
                                 const KypOptions& kyp_opts = {});

/// Largest wbar with inf_{w <= wbar} Re G(jw) >= eta, to 1e-9 relative.
/// Returns +inf when the whole axis qualifies.
/// @throws NeverPassive when Re G(0) <= eta.
double choose_crossover(const StateSpace& sys, double eta);

nlohmann::json to_json(const MixedLtiReport& report);

}  // namespace mixdiss
