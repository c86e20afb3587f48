#include "mixdiss/mat_core.hpp"

#include "mixdiss/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mixdiss {

bool SymMat2::finite() const {
    return std::isfinite(a11) && std::isfinite(a12) && std::isfinite(a22);
}

Eigen::Matrix2d SymMat2::dense() const {
    Eigen::Matrix2d m;
    m << a11, a12, a12, a22;
    return m;
}

SymMat2 SymMat2::from_dense(const Eigen::Matrix2d& m) {
    return {m(0, 0), 0.5 * (m(0, 1) + m(1, 0)), m(1, 1)};
}

Eig2 eig2(const SymMat2& s) {
    const double mean = 0.5 * (s.a11 + s.a22);
    // hypot of the half-difference avoids the trace^2 - 4 det cancellation
    const double radius = std::hypot(0.5 * (s.a11 - s.a22), s.a12);
    return {mean - radius, mean + radius};
}

bool is_negdef(const SymMat2& s, double margin) {
    return eig2(s).lambda_max < -margin;
}

SymMatN::SymMatN(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) {
        throw DimensionMismatch("SymMatN requires a square matrix");
    }
    m_ = 0.5 * (m + m.transpose());
}

SymMatN SymMatN::identity(Eigen::Index n) {
    return SymMatN(Eigen::MatrixXd::Identity(n, n));
}

std::vector<double> SymMatN::row_major() const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(m_.size()));
    for (Eigen::Index i = 0; i < m_.rows(); ++i) {
        for (Eigen::Index j = 0; j < m_.cols(); ++j) {
            out.push_back(m_(i, j));
        }
    }
    return out;
}

namespace {

constexpr int kMaxSweeps = 100;

double max_off_diagonal(const Eigen::MatrixXd& a) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < a.cols(); ++j) {
            off = std::max(off, std::abs(a(i, j)));
        }
    }
    return off;
}

// Cyclic Jacobi. On return `a` is (numerically) diagonal and v holds the
// accumulated rotations when requested.
void jacobi(Eigen::MatrixXd& a, Eigen::MatrixXd* v) {
    const Eigen::Index n = a.rows();
    const double threshold = 1e-12 * a.norm();
    if (v != nullptr) {
        *v = Eigen::MatrixXd::Identity(n, n);
    }
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        if (max_off_diagonal(a) <= threshold) {
            return;
        }
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) {
                    continue;
                }
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                if (v != nullptr) {
                    for (Eigen::Index k = 0; k < n; ++k) {
                        const double vkp = (*v)(k, p);
                        const double vkq = (*v)(k, q);
                        (*v)(k, p) = c * vkp - s * vkq;
                        (*v)(k, q) = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    if (max_off_diagonal(a) > threshold) {
        throw NonConvergence("Jacobi iteration exceeded 100 sweeps");
    }
}

}  // namespace

std::vector<double> eign(const SymMatN& s) {
    Eigen::MatrixXd a = s.dense();
    jacobi(a, nullptr);
    std::vector<double> out(static_cast<std::size_t>(a.rows()));
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        out[static_cast<std::size_t>(i)] = a(i, i);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::pair<std::vector<double>, Eigen::MatrixXd> eign_vectors(const SymMatN& s) {
    Eigen::MatrixXd a = s.dense();
    Eigen::MatrixXd v;
    jacobi(a, &v);
    const auto n = static_cast<std::size_t>(a.rows());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) <
               a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
    });
    std::vector<double> values(n);
    Eigen::MatrixXd vectors(a.rows(), a.cols());
    for (std::size_t k = 0; k < n; ++k) {
        const auto src = static_cast<Eigen::Index>(order[k]);
        values[k] = a(src, src);
        vectors.col(static_cast<Eigen::Index>(k)) = v.col(src);
    }
    return {values, vectors};
}

double spectral_norm(const Eigen::MatrixXd& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    // Use the smaller Gram matrix; both share the nonzero spectrum.
    const Eigen::MatrixXd gram =
        m.rows() < m.cols() ? Eigen::MatrixXd(m * m.transpose())
                            : Eigen::MatrixXd(m.transpose() * m);
    const std::vector<double> ev = eign(SymMatN(gram));
    return std::sqrt(std::max(0.0, ev.back()));
}

}  // namespace mixdiss
