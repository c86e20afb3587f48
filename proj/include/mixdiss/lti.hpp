#pragma once

/**
 * @file lti.hpp
 * @brief SISO state-space systems, frequency response and band-restricted extrema.
 *
 * Band extrema use a logarithmic grid refined by golden-section search around
 * the best grid points. Bands reaching infinity are closed with an analytic tail
 * bound, |G(jw) - D| <= |C| |B| / (w - |A|_2), so the truncation is rigorous.
 */

#include "mixdiss/mat_core.hpp"

#include <Eigen/Core>

#include <complex>
#include <functional>
#include <limits>
#include <vector>

namespace mixdiss {

/// SISO realization x' = Ax + Bu, y = Cx + Du. n = 0 is a pure gain.
struct StateSpace {
    Eigen::MatrixXd A;
    Eigen::VectorXd B;
    Eigen::RowVectorXd C;
    double D = 0.0;

    StateSpace() = default;
    StateSpace(Eigen::MatrixXd a, Eigen::VectorXd b, Eigen::RowVectorXd c, double d);

    /// Pure gain, n = 0.
    static StateSpace gain(double d);

    Eigen::Index order() const { return A.rows(); }
};

enum class BandKind { Low, High, Full };

/// {0 <= w <= omega_bar}, {w >= omega_bar} or [0, inf). Band edges are closed.
struct FreqBand {
    BandKind kind = BandKind::Full;
    double omega_bar = std::numeric_limits<double>::infinity();

    static FreqBand low(double w) { return {BandKind::Low, w}; }
    static FreqBand high(double w) { return {BandKind::High, w}; }
    static FreqBand full() { return {BandKind::Full, std::numeric_limits<double>::infinity()}; }
};

const char* to_string(BandKind kind);

/// Real parts of all eigenvalues below -1e-9.
bool is_hurwitz(const StateSpace& sys);

/// Routh-Hurwitz test of the characteristic polynomial of A + shift*I.
bool routh_hurwitz(const Eigen::MatrixXd& a, double shift = 1e-9);

/// Coefficients of det(sI - A), highest power first (leading 1).
std::vector<double> characteristic_polynomial(const Eigen::MatrixXd& a);

/// G(jw) = C (jw I - A)^{-1} B + D.
/// @throws SingularResolvent when the elimination pivots below 1e-14.
std::complex<double> freq_response(const StateSpace& sys, double omega);

/// Location and value of a band extremum. omega is +inf when the value is
/// approached only in the limit w -> inf.
struct BandExtremum {
    double value;
    double omega;
};

/// Grid settings shared by every band search.
struct GridOptions {
    int points = 2048;
    int refine_top = 8;
    double rel_width = 1e-9;
    double decades_below = 7.0;
};

/**
 * Maximizes `objective(G(jw), w)` over the band.
 *
 * `tail_upper(rho)` must bound the objective from above for any G with
 * |G - D| <= rho; it is required for High and Full bands, where it certifies
 * that nothing beyond the gridded range exceeds the interior maximum.
 */
BandExtremum band_maximize(const StateSpace& sys,
                           const FreqBand& band,
                           const std::function<double(std::complex<double>, double)>& objective,
                           const std::function<double(double)>& tail_upper,
                           const GridOptions& opts = {});

/// sup |G(jw)| over the band.
BandExtremum band_sup_gain_at(const StateSpace& sys, const FreqBand& band);
double band_sup_gain(const StateSpace& sys, const FreqBand& band);

/// inf Re G(jw) over the band.
BandExtremum band_inf_real_at(const StateSpace& sys, const FreqBand& band);
double band_inf_real(const StateSpace& sys, const FreqBand& band);

/// Rank of [B, AB, ..., A^{n-1}B] equals n (singular values above 1e-9 * largest).
bool is_controllable(const StateSpace& sys);

}  // namespace mixdiss
