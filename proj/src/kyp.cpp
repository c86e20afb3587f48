#include "mixdiss/kyp.hpp"

#include "mixdiss/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>

namespace mixdiss {

namespace {

class Fnv1a {
public:
    void add(double v) {
        const auto bits = std::bit_cast<std::uint64_t>(v == 0.0 ? 0.0 : v);
        for (int i = 0; i < 8; ++i) {
            h_ ^= (bits >> (8 * i)) & 0xffu;
            h_ *= 0x100000001b3ULL;
        }
    }
    void add(const Eigen::MatrixXd& m) {
        add(static_cast<double>(m.rows()));
        add(static_cast<double>(m.cols()));
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) add(m(i, j));
    }
    std::uint64_t value() const { return h_; }

private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

int band_sign_of(BandKind kind) {
    switch (kind) {
        case BandKind::Low: return 1;
        case BandKind::High: return -1;
        case BandKind::Full: break;
    }
    throw PreconditionFailure("the dissipation LMI needs a LOW or HIGH band");
}

}  // namespace

void KypProblem::validate() const {
    band_sign_of(band.kind);
    if (!(band.omega_bar > 0.0) || !std::isfinite(band.omega_bar)) {
        throw PreconditionFailure("band edge must be positive and finite");
    }
    if (!theta.finite()) {
        throw PreconditionFailure("Theta must be finite");
    }
    if (!is_hurwitz(sys)) {
        throw NotHurwitz("KYP problems require a Hurwitz A");
    }
}

std::uint64_t KypProblem::hash() const {
    Fnv1a h;
    h.add(sys.A);
    h.add(Eigen::MatrixXd(sys.B));
    h.add(Eigen::MatrixXd(sys.C));
    h.add(sys.D);
    h.add(theta.a11);
    h.add(theta.a12);
    h.add(theta.a22);
    h.add(static_cast<double>(static_cast<int>(band.kind)));
    h.add(band.omega_bar);
    return h.value();
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

KypLmi::KypLmi(const KypProblem& prob)
    : n_(prob.sys.order()), sym_params_(n_ * (n_ + 1) / 2), sign_(band_sign_of(prob.band.kind)) {
    const StateSpace& sys = prob.sys;
    if (sys.A.cols() != n_ || sys.B.size() != n_ || sys.C.size() != n_) {
        throw DimensionMismatch("inconsistent state-space dimensions");
    }
    const Eigen::Index m = n_ + 1;
    // E maps [x; u] to [u; y].
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(2, m);
    e(0, n_) = 1.0;
    e.block(1, 0, 1, n_) = sys.C;
    e(1, n_) = sys.D;
    f0_ = -e.transpose() * prob.theta.dense() * e;

    const double w2 = prob.band.omega_bar * prob.band.omega_bar;
    basis_.reserve(static_cast<std::size_t>(2 * sym_params_));
    for (Eigen::Index k = 0; k < sym_params_; ++k) {
        const Eigen::MatrixXd p = sym_basis(k);
        Eigen::MatrixXd f = Eigen::MatrixXd::Zero(m, m);
        f.topLeftCorner(n_, n_) = sys.A.transpose() * p + p * sys.A;
        f.topRightCorner(n_, 1) = p * sys.B;
        f.bottomLeftCorner(1, n_) = sys.B.transpose() * p;
        basis_.push_back(std::move(f));
    }
    for (Eigen::Index k = 0; k < sym_params_; ++k) {
        const Eigen::MatrixXd q = sym_basis(k);
        Eigen::MatrixXd f(m, m);
        f.topLeftCorner(n_, n_) = sys.A.transpose() * q * sys.A - w2 * q;
        f.topRightCorner(n_, 1) = sys.A.transpose() * q * sys.B;
        f.bottomLeftCorner(1, n_) = sys.B.transpose() * q * sys.A;
        f(n_, n_) = sys.B.dot(q * sys.B);
        basis_.push_back(-static_cast<double>(sign_) * f);
    }
}

Eigen::MatrixXd KypLmi::sym_basis(Eigen::Index k) const {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n_, n_);
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < n_; ++i) {
        for (Eigen::Index j = i; j < n_; ++j, ++idx) {
            if (idx == k) {
                b(i, j) = 1.0;
                b(j, i) = 1.0;
                return b;
            }
        }
    }
    throw DimensionMismatch("symmetric basis index out of range");
}

std::pair<SymMatN, SymMatN> KypLmi::unpack(const Eigen::VectorXd& v) const {
    if (v.size() != free_parameters()) {
        throw DimensionMismatch("decision vector has the wrong length");
    }
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n_, n_);
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n_, n_);
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < n_; ++i) {
        for (Eigen::Index j = i; j < n_; ++j, ++idx) {
            p(i, j) = p(j, i) = v(idx);
            q(i, j) = q(j, i) = v(sym_params_ + idx);
        }
    }
    return {SymMatN(p), SymMatN(q)};
}

SymMatN KypLmi::evaluate(const Eigen::VectorXd& v) const {
    if (v.size() != free_parameters()) {
        throw DimensionMismatch("decision vector has the wrong length");
    }
    Eigen::MatrixXd f = f0_;
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        f += v(k) * basis_[static_cast<std::size_t>(k)];
    }
    return SymMatN(f);
}

SymMatN KypLmi::evaluate(const SymMatN& p, const SymMatN& q) const {
    if (p.size() != n_ || q.size() != n_) {
        throw DimensionMismatch("P and Q must be n x n");
    }
    Eigen::VectorXd v(free_parameters());
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < n_; ++i) {
        for (Eigen::Index j = i; j < n_; ++j, ++idx) {
            v(idx) = p(i, j);
            v(sym_params_ + idx) = q(i, j);
        }
    }
    return evaluate(v);
}

KypLmi build_kyp_lmi(const KypProblem& prob) { return KypLmi(prob); }

double certificate_margin(const KypProblem& prob, const SymMatN& p, const SymMatN& q) {
    const KypLmi lmi(prob);
    const std::vector<double> f_eigs = eign(lmi.evaluate(p, q));
    double margin = -f_eigs.back();
    if (q.size() > 0) {
        margin = std::min(margin, eign(q).front());
    }
    return margin;
}

namespace {

Eigen::VectorXd vec(const Eigen::MatrixXd& m) {
    return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

Eigen::MatrixXd clip_eigenvalues(const Eigen::MatrixXd& m, double bound, bool upper) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    Eigen::VectorXd lam = es.eigenvalues();
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        lam(i) = upper ? std::min(lam(i), bound) : std::max(lam(i), bound);
    }
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

KypResult solve_kyp(const KypProblem& prob, const KypOptions& opts) {
    prob.validate();
    KypResult result;
    result.controllable = is_controllable(prob.sys);
    result.sigma = opts.sigma0;

    // Work on Theta scaled to unit Frobenius norm; (P, Q) scale along with it.
    const double theta_scale = prob.theta.dense().norm();
    if (theta_scale == 0.0) {
        result.residual = std::numeric_limits<double>::infinity();
        return result;
    }
    KypProblem scaled = prob;
    scaled.theta = (1.0 / theta_scale) * prob.theta;
    const KypLmi lmi(scaled);
    const Eigen::Index n = lmi.state_dim();
    const Eigen::Index m = lmi.lmi_dim();
    const Eigen::Index nv = lmi.free_parameters();
    const Eigen::Index sp = nv / 2;

    const auto finish = [&](const SymMatN& p_scaled, const SymMatN& q_scaled, int iterations) {
        const SymMatN p(theta_scale * p_scaled.dense());
        const SymMatN q(theta_scale * q_scaled.dense());
        const double margin = certificate_margin(prob, p, q);
        result.iterations = iterations;
        if (margin >= 0.5 * result.sigma && margin > 0.0) {
            result.status = KypStatus::Feasible;
            result.certificate = KypCertificate{p, q, margin, prob.hash()};
            return true;
        }
        return false;
    };

    if (n == 0) {
        const double lam = eign(SymMatN(lmi.constant())).back();
        result.residual = std::max(0.0, lam) * theta_scale;
        result.sigma = -lam * theta_scale;
        if (lam < 0.0) {
            finish(SymMatN(0), SymMatN(0), 0);
        }
        return result;
    }

    // Stacked linear map v -> [vec(F(v) - F0); vec(Q(v))].
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m * m + n * n, nv);
    for (Eigen::Index k = 0; k < nv; ++k) {
        t.block(0, k, m * m, 1) = vec(lmi.basis()[static_cast<std::size_t>(k)]);
        if (k >= sp) {
            t.block(m * m, k, n * n, 1) = vec(lmi.sym_basis(k - sp));
        }
    }
    const Eigen::LLT<Eigen::MatrixXd> normal(t.transpose() * t);
    const Eigen::MatrixXd tt = t.transpose();
    const Eigen::VectorXd f0 = vec(lmi.constant());

    Eigen::MatrixXd zc = -Eigen::MatrixXd::Identity(m, m);
    Eigen::MatrixXd yc = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd rhs(m * m + n * n);
    double sigma = opts.sigma0;
    double window_start_residual = std::numeric_limits<double>::infinity();

    for (int it = 1; it <= opts.max_iterations; ++it) {
        rhs.head(m * m) = vec(zc) - f0;
        rhs.tail(n * n) = vec(yc);
        const Eigen::VectorXd v = normal.solve(tt * rhs);
        const Eigen::VectorXd image = t * v;
        const Eigen::MatrixXd za = Eigen::Map<const Eigen::MatrixXd>(image.data(), m, m) + lmi.constant();
        const Eigen::MatrixXd ya = Eigen::Map<const Eigen::MatrixXd>(image.data() + m * m, n, n);

        if (it % opts.check_every == 0 || it == 1) {
            const double zmax = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(za, Eigen::EigenvaluesOnly)
                                    .eigenvalues()
                                    .maxCoeff();
            const double ymin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(ya, Eigen::EigenvaluesOnly)
                                    .eigenvalues()
                                    .minCoeff();
            if (zmax <= -0.5 * sigma && ymin >= 0.5 * sigma) {
                const auto [p, q] = lmi.unpack(v);
                result.sigma = sigma * theta_scale;
                if (finish(p, q, it)) {
                    result.residual = 0.0;
                    return result;
                }
            }
        }

        const Eigen::MatrixXd zp = clip_eigenvalues(za, -sigma, true);
        const Eigen::MatrixXd yp = clip_eigenvalues(ya, sigma, false);
        const double residual = std::sqrt((za - zp).squaredNorm() + (ya - yp).squaredNorm());
        zc = za + opts.relaxation * (zp - za);
        yc = ya + opts.relaxation * (yp - ya);
        result.residual = residual;
        result.iterations = it;

        if (it % opts.stall_window == 0) {
            if (residual > opts.stall_ratio * window_start_residual && sigma > opts.sigma_floor) {
                sigma = std::max(0.5 * sigma, opts.sigma_floor);
            }
            window_start_residual = residual;
        }
    }
    result.sigma = sigma * theta_scale;
    return result;
}

FdiResult fdi_check(const KypProblem& prob) {
    if (!is_hurwitz(prob.sys)) {
        throw NotHurwitz("FDI check requires a Hurwitz A");
    }
    const SymMat2 th = prob.theta;
    const auto value = [th](std::complex<double> g) {
        return th.a11 + 2.0 * th.a12 * g.real() + th.a22 * std::norm(g);
    };
    const double d = prob.sys.D;
    const double at_d = value({d, 0.0});
    const double slope = 2.0 * std::abs(th.a12 + th.a22 * d);
    const double curvature = std::max(0.0, -th.a22);
    const BandExtremum worst = band_maximize(
        prob.sys, prob.band, [&](std::complex<double> g, double) { return -value(g); },
        [=](double rho) { return -at_d + slope * rho + curvature * rho * rho; });
    return {-worst.value >= 0.0, -worst.value, worst.omega};
}

TdCheck td_check(const Trajectory& traj,
                 const SymMat2& theta,
                 const SymMatN& q,
                 double omega_bar,
                 BandKind kind,
                 double rel_tol) {
    traj.validate();
    if (q.size() != traj.states()) {
        throw DimensionMismatch("Q must match the trajectory state dimension");
    }
    require_decay(traj);
    std::vector<double> fx(traj.samples());
    std::vector<double> fxd(traj.samples());
    for (std::size_t i = 0; i < traj.samples(); ++i) {
        const Eigen::VectorXd x = traj.x.row(static_cast<Eigen::Index>(i)).transpose();
        const Eigen::VectorXd xd = traj.xdot.row(static_cast<Eigen::Index>(i)).transpose();
        fx[i] = x.dot(q.dense() * x);
        fxd[i] = xd.dot(q.dense() * xd);
    }
    TdCheck out{};
    out.x_energy = trapezoid(traj.t, fx);
    out.xdot_energy = trapezoid(traj.t, fxd);
    out.supply_integral = quad_integral(traj, theta);

    const double rhs = omega_bar * omega_bar * out.x_energy;
    const double premise_tol = rel_tol * std::max(std::abs(out.xdot_energy), std::abs(rhs));
    out.premise_holds = kind == BandKind::High ? out.xdot_energy >= rhs - premise_tol
                                               : out.xdot_energy <= rhs + premise_tol;
    const double signal_scale = quad_integral(traj, SymMat2::diag(1.0, 1.0));
    out.conclusion_holds = out.supply_integral >= -rel_tol * signal_scale;
    return out;
}

nlohmann::json to_json(const KypCertificate& cert) {
    return {
        {"P", cert.P.row_major()},
        {"Q", cert.Q.row_major()},
        {"n", cert.P.size()},
        {"margin", cert.margin},
        {"problem_hash", hash_hex(cert.problem_hash)},
    };
}

KypCertificate certificate_from_json(const nlohmann::json& j) {
    const auto n = j.at("n").get<Eigen::Index>();
    const auto p = j.at("P").get<std::vector<double>>();
    const auto q = j.at("Q").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(p.size()) != n * n || static_cast<Eigen::Index>(q.size()) != n * n) {
        throw DimensionMismatch("certificate matrices do not match n");
    }
    Eigen::MatrixXd pm(n, n);
    Eigen::MatrixXd qm(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < n; ++k) {
            pm(i, k) = p[static_cast<std::size_t>(i * n + k)];
            qm(i, k) = q[static_cast<std::size_t>(i * n + k)];
        }
    }
    KypCertificate cert{SymMatN(pm), SymMatN(qm), j.at("margin").get<double>(), 0};
    cert.problem_hash = std::stoull(j.at("problem_hash").get<std::string>(), nullptr, 16);
    return cert;
}

}  // namespace mixdiss
