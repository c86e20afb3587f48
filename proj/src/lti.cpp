#include "mixdiss/lti.hpp"

#include "mixdiss/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mixdiss {

StateSpace::StateSpace(Eigen::MatrixXd a, Eigen::VectorXd b, Eigen::RowVectorXd c, double d)
    : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(d) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || B.size() != n || C.size() != n) {
        throw DimensionMismatch("state-space blocks must be n x n, n x 1, 1 x n");
    }
    if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !std::isfinite(D)) {
        throw DimensionMismatch("state-space entries must be finite");
    }
}

StateSpace StateSpace::gain(double d) {
    return StateSpace(Eigen::MatrixXd(0, 0), Eigen::VectorXd(0), Eigen::RowVectorXd(0), d);
}

const char* to_string(BandKind kind) {
    switch (kind) {
        case BandKind::Low: return "LOW";
        case BandKind::High: return "HIGH";
        case BandKind::Full: return "FULL";
    }
    return "?";
}

std::vector<double> characteristic_polynomial(const Eigen::MatrixXd& a) {
    // Faddeev-LeVerrier.
    const Eigen::Index n = a.rows();
    std::vector<double> coeffs(static_cast<std::size_t>(n) + 1, 0.0);
    coeffs[0] = 1.0;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        m = a * m + coeffs[static_cast<std::size_t>(k - 1)] * eye;
        coeffs[static_cast<std::size_t>(k)] = -(a * m).trace() / static_cast<double>(k);
    }
    return coeffs;
}

bool routh_hurwitz(const Eigen::MatrixXd& a, double shift) {
    const Eigen::Index n = a.rows();
    if (n == 0) {
        return true;
    }
    const Eigen::MatrixXd shifted = a + shift * Eigen::MatrixXd::Identity(n, n);
    const std::vector<double> p = characteristic_polynomial(shifted);
    for (double c : p) {
        if (!(c > 0.0)) {
            return false;
        }
    }
    const std::size_t width = p.size() / 2 + 1;
    std::vector<double> upper(width, 0.0);
    std::vector<double> lower(width, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        (i % 2 == 0 ? upper : lower)[i / 2] = p[i];
    }
    for (Eigen::Index row = 0; row < n; ++row) {
        if (!(lower[0] > 0.0)) {
            return false;
        }
        std::vector<double> next(width, 0.0);
        for (std::size_t j = 0; j + 1 < width; ++j) {
            next[j] = (lower[0] * upper[j + 1] - upper[0] * lower[j + 1]) / lower[0];
        }
        upper = std::move(lower);
        lower = std::move(next);
    }
    return true;
}

bool is_hurwitz(const StateSpace& sys) {
    const Eigen::Index n = sys.order();
    if (n == 0) {
        return true;
    }
    if (n > 4) {
        return routh_hurwitz(sys.A);
    }
    // Roots of the characteristic polynomial through its companion matrix.
    const std::vector<double> p = characteristic_polynomial(sys.A);
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        companion(0, j) = -p[static_cast<std::size_t>(j) + 1];
    }
    for (Eigen::Index i = 1; i < n; ++i) {
        companion(i, i - 1) = 1.0;
    }
    const Eigen::VectorXcd roots = Eigen::EigenSolver<Eigen::MatrixXd>(companion, false).eigenvalues();
    for (Eigen::Index i = 0; i < roots.size(); ++i) {
        if (!(roots(i).real() < -1e-9)) {
            return false;
        }
    }
    return true;
}

std::complex<double> freq_response(const StateSpace& sys, double omega) {
    using cd = std::complex<double>;
    const Eigen::Index n = sys.order();
    if (n == 0) {
        return {sys.D, 0.0};
    }
    // Augmented [jwI - A | B], eliminated in place.
    Eigen::MatrixXcd m(n, n + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            m(i, j) = cd(-sys.A(i, j), i == j ? omega : 0.0);
        }
        m(i, n) = cd(sys.B(i), 0.0);
    }
    const double scale = std::max(1.0, m.leftCols(n).cwiseAbs().maxCoeff());
    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::Index pivot = k;
        for (Eigen::Index i = k + 1; i < n; ++i) {
            if (std::abs(m(i, k)) > std::abs(m(pivot, k))) {
                pivot = i;
            }
        }
        if (std::abs(m(pivot, k)) < 1e-14 * scale) {
            throw SingularResolvent("jw I - A is singular at w = " + std::to_string(omega));
        }
        m.row(k).swap(m.row(pivot));
        for (Eigen::Index i = k + 1; i < n; ++i) {
            const cd f = m(i, k) / m(k, k);
            m.row(i) -= f * m.row(k);
        }
    }
    Eigen::VectorXcd x(n);
    for (Eigen::Index i = n - 1; i >= 0; --i) {
        cd acc = m(i, n);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            acc -= m(i, j) * x(j);
        }
        x(i) = acc / m(i, i);
    }
    cd g(sys.D, 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        g += sys.C(i) * x(i);
    }
    return g;
}

namespace {

constexpr double kGolden = 0.6180339887498949;
constexpr int kMaxTailExpansions = 12;

std::vector<double> log_grid(double lo, double hi, int points) {
    std::vector<double> out(static_cast<std::size_t>(points));
    const double llo = std::log(lo);
    const double lhi = std::log(hi);
    for (int i = 0; i < points; ++i) {
        out[static_cast<std::size_t>(i)] =
            std::exp(llo + (lhi - llo) * static_cast<double>(i) / static_cast<double>(points - 1));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

BandExtremum golden_max(const std::function<double(double)>& f, double a, double b, double rel_width) {
    double c = b - kGolden * (b - a);
    double d = a + kGolden * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < 300 && (b - a) > rel_width * std::max(b, 1e-300); ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kGolden * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kGolden * (b - a);
            fd = f(d);
        }
    }
    return fc >= fd ? BandExtremum{fc, c} : BandExtremum{fd, d};
}

BandExtremum maximize_on_range(const std::function<double(double)>& f,
                               double lo,
                               double hi,
                               bool include_dc,
                               const GridOptions& opts) {
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(opts.points) + 1);
    if (include_dc) {
        grid.push_back(0.0);
    }
    const double grid_lo = include_dc ? hi * std::pow(10.0, -opts.decades_below) : lo;
    const int npts = include_dc ? opts.points - 1 : opts.points;
    for (double w : log_grid(grid_lo, hi, npts)) {
        grid.push_back(w);
    }
    std::vector<double> vals(grid.size());
    std::transform(grid.begin(), grid.end(), vals.begin(), f);

    BandExtremum best{vals[0], grid[0]};
    std::vector<std::size_t> peaks;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (vals[i] > best.value) {
            best = {vals[i], grid[i]};
        }
        const bool left_ok = i == 0 || vals[i] >= vals[i - 1];
        const bool right_ok = i + 1 == grid.size() || vals[i] >= vals[i + 1];
        if (left_ok && right_ok) {
            peaks.push_back(i);
        }
    }
    std::sort(peaks.begin(), peaks.end(), [&](std::size_t l, std::size_t r) { return vals[l] > vals[r]; });
    if (peaks.size() > static_cast<std::size_t>(opts.refine_top)) {
        peaks.resize(static_cast<std::size_t>(opts.refine_top));
    }
    for (std::size_t i : peaks) {
        const double a = grid[i == 0 ? 0 : i - 1];
        const double b = grid[i + 1 == grid.size() ? i : i + 1];
        if (b <= a) {
            continue;
        }
        const BandExtremum refined = golden_max(f, a, b, opts.rel_width);
        if (refined.value > best.value) {
            best = refined;
        }
    }
    return best;
}

}  // namespace

BandExtremum band_maximize(const StateSpace& sys,
                           const FreqBand& band,
                           const std::function<double(std::complex<double>, double)>& objective,
                           const std::function<double(double)>& tail_upper,
                           const GridOptions& opts) {
    if (!is_hurwitz(sys)) {
        throw NotHurwitz("band extrema require a Hurwitz A");
    }
    if (band.kind != BandKind::Full && !(band.omega_bar > 0.0 && std::isfinite(band.omega_bar))) {
        throw PreconditionFailure("band edge must be positive and finite");
    }
    const auto f = [&](double w) { return objective(freq_response(sys, w), w); };

    if (band.kind == BandKind::Low) {
        return maximize_on_range(f, 0.0, band.omega_bar, true, opts);
    }

    const double norm_a2 = sys.order() == 0 ? 0.0 : spectral_norm(sys.A);
    const double gain_cb = sys.order() == 0 ? 0.0 : sys.C.norm() * sys.B.norm();
    const double norm_af = sys.order() == 0 ? 0.0 : sys.A.norm();
    double w_hi = band.kind == BandKind::High ? std::max(10.0 * norm_af, 10.0 * band.omega_bar)
                                              : std::max(10.0 * norm_af, 1.0);
    BandExtremum interior{};
    for (int expansion = 0; expansion <= kMaxTailExpansions; ++expansion) {
        interior = band.kind == BandKind::High ? maximize_on_range(f, band.omega_bar, w_hi, false, opts)
                                               : maximize_on_range(f, 0.0, w_hi, true, opts);
        const double rho = gain_cb / (w_hi - norm_a2);
        if (tail_upper(rho) <= interior.value) {
            return interior;
        }
        w_hi *= 10.0;
    }
    // The supremum is approached only as w -> inf; the tail bound has shrunk to
    // within rho of its limit value at G = D.
    const double limit = tail_upper(0.0);
    if (limit > interior.value) {
        return {limit, std::numeric_limits<double>::infinity()};
    }
    return interior;
}

BandExtremum band_sup_gain_at(const StateSpace& sys, const FreqBand& band) {
    const double d = std::abs(sys.D);
    return band_maximize(
        sys, band, [](std::complex<double> g, double) { return std::abs(g); },
        [d](double rho) { return d + rho; });
}

double band_sup_gain(const StateSpace& sys, const FreqBand& band) {
    return band_sup_gain_at(sys, band).value;
}

BandExtremum band_inf_real_at(const StateSpace& sys, const FreqBand& band) {
    const double d = sys.D;
    const BandExtremum neg = band_maximize(
        sys, band, [](std::complex<double> g, double) { return -g.real(); },
        [d](double rho) { return -d + rho; });
    return {-neg.value, neg.omega};
}

double band_inf_real(const StateSpace& sys, const FreqBand& band) {
    return band_inf_real_at(sys, band).value;
}

bool is_controllable(const StateSpace& sys) {
    const Eigen::Index n = sys.order();
    if (n == 0) {
        return true;
    }
    Eigen::MatrixXd kalman(n, n);
    Eigen::VectorXd col = sys.B;
    for (Eigen::Index j = 0; j < n; ++j) {
        kalman.col(j) = col;
        col = sys.A * col;
    }
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(kalman).singularValues();
    if (sv(0) == 0.0) {
        return false;
    }
    return sv(n - 1) > 1e-9 * sv(0);
}

}  // namespace mixdiss
