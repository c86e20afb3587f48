#include "mixdiss/errors.hpp"
#include "mixdiss/mat_core.hpp"

#include "common.hpp"

#include <doctest.h>

#include <cmath>

using namespace mixdiss;
using doctest::Approx;

TEST_CASE("eig2 on the documented matrices") {
    const Eig2 d = eig2(SymMat2::diag(2.0, -1.0));
    CHECK(d.lambda_min == -1.0);
    CHECK(d.lambda_max == 2.0);

    const Eig2 swap = eig2({0.0, 1.0, 0.0});
    CHECK(swap.lambda_min == Approx(-1.0));
    CHECK(swap.lambda_max == Approx(1.0));

    // roots of l^2 + 0.7 l - 0.3025
    const Eig2 e = eig2({-1.0, -0.05, 0.3});
    const double r = std::sqrt(0.49 + 4 * 0.3025);
    CHECK(e.lambda_min == Approx((-0.7 - r) / 2).epsilon(1e-12));
    CHECK(e.lambda_max == Approx((-0.7 + r) / 2).epsilon(1e-12));
    CHECK(e.lambda_min == Approx(-1.00192).epsilon(1e-5));
    CHECK(e.lambda_max == Approx(0.30192).epsilon(1e-4));
}

TEST_CASE("eig2 matches trace and determinant on random batches") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 2000; ++i) {
        const SymMat2 s{testing::unif(rng, -5, 5), testing::unif(rng, -5, 5), testing::unif(rng, -5, 5)};
        const Eig2 e = eig2(s);
        REQUIRE(e.lambda_min <= e.lambda_max);
        const double scale = 1.0 + std::abs(s.a11) + std::abs(s.a22) + std::abs(s.a12);
        CHECK(std::abs(e.lambda_min + e.lambda_max - s.trace()) <= 1e-12 * scale);
        CHECK(std::abs(e.lambda_min * e.lambda_max - s.det()) <= 1e-12 * scale * scale);
    }
}

TEST_CASE("eig2 near a repeated eigenvalue") {
    const Eig2 e = eig2({1.0, 1e-9, 1.0 + 1e-12});
    CHECK(e.lambda_max - e.lambda_min == Approx(2e-9).epsilon(1e-3));
}

TEST_CASE("is_negdef is strict") {
    CHECK(is_negdef(SymMat2::diag(-1.0, -1.0)));
    CHECK_FALSE(is_negdef(SymMat2::diag(-1.0, 0.0)));
    CHECK_FALSE(is_negdef({-1.0, -0.05, 0.3}));
    CHECK(is_negdef(SymMat2::diag(-1.0, -1e-3), 1e-4));
    CHECK_FALSE(is_negdef(SymMat2::diag(-1.0, -1e-3), 1e-2));
}

TEST_CASE("is_negdef agrees with the trace/determinant test") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 5000; ++i) {
        const SymMat2 s{testing::unif(rng, -3, 1), testing::unif(rng, -2, 2), testing::unif(rng, -3, 1)};
        CHECK(is_negdef(s) == (s.trace() < 0.0 && s.det() > 0.0));
    }
}

TEST_CASE("m_congruence") {
    CHECK(m_congruence(SymMat2::diag(0.49, -1.0)) == SymMat2::diag(-1.0, 0.49));
    const SymMat2 m = m_congruence({0.3, 0.05, -1.0});
    CHECK(m.a11 == -1.0);
    CHECK(m.a12 == -0.05);
    CHECK(m.a22 == 0.3);
    CHECK(m_congruence({0.0, 1.0, 0.0}) == SymMat2{0.0, -1.0, 0.0});

    // equals M'SM with M = [0 -1; 1 0]
    std::mt19937_64 rng(3);
    Eigen::Matrix2d mm;
    mm << 0, -1, 1, 0;
    for (int i = 0; i < 100; ++i) {
        const SymMat2 s{testing::unif(rng, -4, 4), testing::unif(rng, -4, 4), testing::unif(rng, -4, 4)};
        CHECK(m_congruence(m_congruence(s)) == s);
        CHECK((mm.transpose() * s.dense() * mm - m_congruence(s).dense()).norm() == 0.0);
    }
}

TEST_CASE("eign") {
    Eigen::MatrixXd d = Eigen::Vector3d(3.0, 1.0, 2.0).asDiagonal();
    const auto ev = eign(SymMatN(d));
    REQUIRE(ev.size() == 3);
    CHECK(ev[0] == 1.0);
    CHECK(ev[1] == 2.0);
    CHECK(ev[2] == 3.0);

    const auto ones = eign(SymMatN(Eigen::MatrixXd::Ones(3, 3)));
    CHECK(std::abs(ones[0]) < 1e-10);
    CHECK(std::abs(ones[1]) < 1e-10);
    CHECK(std::abs(ones[2] - 3.0) < 1e-10);

    std::mt19937_64 rng(5);
    for (int i = 0; i < 500; ++i) {
        const SymMat2 s{testing::unif(rng, -9, 9), testing::unif(rng, -9, 9), testing::unif(rng, -9, 9)};
        const auto v = eign(SymMatN(Eigen::MatrixXd(s.dense())));
        const Eig2 e = eig2(s);
        CHECK(std::abs(v[0] - e.lambda_min) < 1e-10);
        CHECK(std::abs(v[1] - e.lambda_max) < 1e-10);
    }
}

TEST_CASE("eign vectors diagonalize random symmetric matrices") {
    std::mt19937_64 rng(9);
    for (int n : {1, 4, 9, 16}) {
        const Eigen::MatrixXd r = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return testing::unif(rng, -1, 1); });
        const SymMatN s(Eigen::MatrixXd(r + r.transpose()));
        const auto [vals, vecs] = eign_vectors(s);
        const Eigen::VectorXd lam = Eigen::Map<const Eigen::VectorXd>(vals.data(), n);
        CHECK((s.dense() * vecs - vecs * lam.asDiagonal()).norm() < 1e-9);
        CHECK((vecs.transpose() * vecs - Eigen::MatrixXd::Identity(n, n)).norm() < 1e-9);
        CHECK(std::is_sorted(vals.begin(), vals.end()));
    }
}

TEST_CASE("SymMatN symmetrizes") {
    Eigen::MatrixXd m(2, 2);
    m << 1, 2, 4, 1;
    const SymMatN s(m);
    CHECK(s(0, 1) == s(1, 0));
    CHECK(s(0, 1) == 3.0);
}

TEST_CASE("spectral_norm") {
    CHECK(spectral_norm(Eigen::MatrixXd::Identity(2, 2)) == Approx(1.0));
    CHECK(spectral_norm(Eigen::MatrixXd(Eigen::Vector2d(3.0, -4.0).asDiagonal())) == Approx(4.0));
    Eigen::MatrixXd rot(2, 2);
    rot << 0, -1, 1, 0;
    CHECK(spectral_norm(rot) == Approx(1.0));
    Eigen::MatrixXd rect(2, 3);
    rect << 1, 0, 0, 0, 0, 2;
    CHECK(spectral_norm(rect) == Approx(2.0));
    CHECK(spectral_norm(rect.transpose()) == Approx(2.0));
}
