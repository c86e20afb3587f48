#pragma once

/**
 * @file mat_core.hpp
 * @brief Small symmetric matrix kernels.
 *
 * SymMat2 carries every 2x2 supply-rate matrix (Theta, Pi, Psi, Omega and the
 * interconnection composites). SymMatN carries the storage and auxiliary
 * matrices of the dissipation LMI. Everything here is a pure function.
 */

#include <Eigen/Core>

#include <utility>
#include <vector>

namespace mixdiss {

/// Default strictness margin for "negative definite" tests.
inline constexpr double kDefaultDefinitenessMargin = 1e-9;

/// Symmetric 2x2 matrix [[a11, a12], [a12, a22]].
struct SymMat2 {
    double a11 = 0.0;
    double a12 = 0.0;
    double a22 = 0.0;

    static constexpr SymMat2 diag(double d1, double d2) { return {d1, 0.0, d2}; }

    constexpr double trace() const { return a11 + a22; }
    constexpr double det() const { return a11 * a22 - a12 * a12; }
    bool finite() const;

    Eigen::Matrix2d dense() const;
    static SymMat2 from_dense(const Eigen::Matrix2d& m);

    friend constexpr SymMat2 operator+(SymMat2 l, SymMat2 r) {
        return {l.a11 + r.a11, l.a12 + r.a12, l.a22 + r.a22};
    }
    friend constexpr SymMat2 operator-(SymMat2 l, SymMat2 r) {
        return {l.a11 - r.a11, l.a12 - r.a12, l.a22 - r.a22};
    }
    friend constexpr SymMat2 operator*(double s, SymMat2 m) {
        return {s * m.a11, s * m.a12, s * m.a22};
    }
    friend constexpr bool operator==(const SymMat2&, const SymMat2&) = default;
};

/// Eigenvalues of a symmetric 2x2 matrix, ascending.
struct Eig2 {
    double lambda_min;
    double lambda_max;
};

Eig2 eig2(const SymMat2& s);

/// Strict negative definiteness: lambda_max(S) < -margin.
bool is_negdef(const SymMat2& s, double margin = 0.0);

/// M^T S M with M = [0 -1; 1 0].
constexpr SymMat2 m_congruence(const SymMat2& s) { return {s.a22, -s.a12, s.a11}; }

/// Symmetric n x n matrix; symmetrized on construction.
class SymMatN {
public:
    SymMatN() = default;
    explicit SymMatN(Eigen::Index n) : m_(Eigen::MatrixXd::Zero(n, n)) {}
    explicit SymMatN(const Eigen::MatrixXd& m);

    static SymMatN identity(Eigen::Index n);

    Eigen::Index size() const { return m_.rows(); }
    double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
    const Eigen::MatrixXd& dense() const { return m_; }

    /// Row-major entries, suitable for serialization.
    std::vector<double> row_major() const;

private:
    Eigen::MatrixXd m_;
};

/// Eigenvalues via cyclic Jacobi rotations, ascending.
/// @throws NonConvergence after 100 sweeps.
std::vector<double> eign(const SymMatN& s);

/// Jacobi eigen-decomposition; columns of the returned matrix are eigenvectors.
std::pair<std::vector<double>, Eigen::MatrixXd> eign_vectors(const SymMatN& s);

/// Largest singular value, sqrt(lambda_max(M^T M)).
double spectral_norm(const Eigen::MatrixXd& m);

}  // namespace mixdiss
