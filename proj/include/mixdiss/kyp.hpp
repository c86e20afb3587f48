#pragma once

/**
 * @file kyp.hpp
 * @brief Band-restricted dissipation LMI and its feasibility certificate.
 *
 * For V(x) = x'Px and W(x, xdot) = xdot'Q xdot - wbar^2 x'Qx the inequality
 * Vdot <= s*W + xi'Theta xi along xdot = Ax + Bu is the LMI F(P, Q) <= 0 on [x; u]:
 *
 *   F(P,Q) = [A'P + PA - s(A'QA - wbar^2 Q),  PB - s A'QB]  -  E'Theta E,
 *            [B'P - s B'QA,                   -s B'QB    ]
 *
 * with E = [0 1; C D] mapping [x; u] to xi = [u; y], s = +1 for the low band and
 * s = -1 for the high band. The high-band sign flip is an extension of the
 * low-frequency statement and is labelled as such in reports.
 */

#include "mixdiss/lti.hpp"
#include "mixdiss/mat_core.hpp"
#include "mixdiss/supply.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mixdiss {

struct KypProblem {
    StateSpace sys;
    SymMat2 theta;
    FreqBand band;

    /// Hurwitz A and a Low/High band with a positive edge.
    void validate() const;
    /// Deterministic FNV-1a digest of the problem data.
    std::uint64_t hash() const;
};

/// The affine map (P, Q) -> F(P, Q). Decision vector v = [svec(P); svec(Q)]
/// where svec enumerates (i <= j) and basis matrices are e_i e_j' + e_j e_i'.
class KypLmi {
public:
    explicit KypLmi(const KypProblem& prob);

    Eigen::Index state_dim() const { return n_; }
    Eigen::Index lmi_dim() const { return n_ + 1; }
    Eigen::Index free_parameters() const { return 2 * sym_params_; }
    /// +1 for the low band, -1 for the high band.
    int band_sign() const { return sign_; }

    SymMatN evaluate(const SymMatN& p, const SymMatN& q) const;
    SymMatN evaluate(const Eigen::VectorXd& v) const;

    const Eigen::MatrixXd& constant() const { return f0_; }
    const std::vector<Eigen::MatrixXd>& basis() const { return basis_; }

    /// Unpack v into (P, Q).
    std::pair<SymMatN, SymMatN> unpack(const Eigen::VectorXd& v) const;
    Eigen::MatrixXd sym_basis(Eigen::Index k) const;

private:
    Eigen::Index n_;
    Eigen::Index sym_params_;
    int sign_;
    Eigen::MatrixXd f0_;
    std::vector<Eigen::MatrixXd> basis_;
};

KypLmi build_kyp_lmi(const KypProblem& prob);

struct KypCertificate {
    SymMatN P;
    SymMatN Q;
    double margin = 0.0;
    std::uint64_t problem_hash = 0;
};

/// min(-lambda_max(F(P,Q)), lambda_min(Q)), both computed by Jacobi.
double certificate_margin(const KypProblem& prob, const SymMatN& p, const SymMatN& q);

enum class KypStatus { Feasible, Unknown };

struct KypOptions {
    int max_iterations = 50000;
    double sigma0 = 1e-6;
    double sigma_floor = 1e-12;
    int check_every = 10;
    int stall_window = 2000;
    double stall_ratio = 0.999;
    /// Over-relaxation of the cone step, in (0, 2).
    double relaxation = 1.8;
};

struct KypResult {
    KypStatus status = KypStatus::Unknown;
    std::optional<KypCertificate> certificate;
    double residual = 0.0;
    int iterations = 0;
    /// final strictness level, in the units of the given Theta
    double sigma = 0.0;
    /// Kalman rank test; when false the LMI/FDI equivalence is one-directional.
    bool controllable = true;
};

/**
 * Alternating projections between the affine set {(Z, Y) : Z = F(P,Q), Y = Q}
 * and the cone {Z <= -sigma I, Y >= sigma I}. Every reported certificate is
 * re-verified by certificate_margin >= sigma / 2.
 */
KypResult solve_kyp(const KypProblem& prob, const KypOptions& opts = {});

struct FdiResult {
    bool holds;
    double min_value;
    double omega;
};

/// min over the band of [1, G(jw)]^* Theta [1, G(jw)]; holds when >= 0.
/// Full bands are accepted here as the wbar -> inf surrogate.
FdiResult fdi_check(const KypProblem& prob);

struct TdCheck {
    bool premise_holds;
    bool conclusion_holds;
    double xdot_energy;
    double x_energy;
    double supply_integral;
};

/**
 * Time-domain reading on a simulated trajectory: the premise
 * int xdot'Q xdot <= wbar^2 int x'Qx (reversed for the high band) and the
 * conclusion int xi'Theta xi >= 0, both with relative tolerance rel_tol.
 * @throws TruncationUnsound when the trajectory has not decayed.
 */
TdCheck td_check(const Trajectory& traj,
                 const SymMat2& theta,
                 const SymMatN& q,
                 double omega_bar,
                 BandKind kind = BandKind::Low,
                 double rel_tol = 1e-6);

nlohmann::json to_json(const KypCertificate& cert);
KypCertificate certificate_from_json(const nlohmann::json& j);

std::string hash_hex(std::uint64_t h);

}  // namespace mixdiss
