#include <gtest/gtest.h>

#include <cmath>
#include <thread>

#include <calabi_graph/generators.hpp>
#include <calabi_graph/operators.hpp>

#include "oracles.hpp"

namespace cg = calabi_graph;
namespace gen = calabi_graph::generators;

namespace {

Eigen::VectorXd random_vec(std::size_t n, cg::CounterRng& rng, double lo = -1, double hi = 1) {
    const auto v = gen::random_log_weights(n, lo, hi, rng);
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(n));
}

Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

}  // namespace

TEST(Jacobian, SingleEdgeIsZero) {
    const auto j = cg::jacobian(gen::path(2), cg::LogWeights::zeros(1));
    ASSERT_EQ(j.size(), 1);
    EXPECT_EQ(j(0, 0), 0.0);
}

TEST(Jacobian, PathUniform) {
    const auto j = cg::jacobian(gen::path(3), cg::LogWeights::zeros(2));
    EXPECT_NEAR(j(0, 0), 0.5, 1e-15);
    EXPECT_NEAR(j(0, 1), -0.5, 1e-15);
    EXPECT_NEAR(j(1, 0), -0.5, 1e-15);
    EXPECT_NEAR(j(1, 1), 0.5, 1e-15);
    const auto& sp = j.spectrum();
    EXPECT_NEAR(sp.eigenvalues[0], 0.0, 1e-15);
    EXPECT_NEAR(sp.eigenvalues[1], 1.0, 1e-14);
}

TEST(Jacobian, StarUniform) {
    const auto j = cg::jacobian(gen::star(3), cg::LogWeights::zeros(3));
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) EXPECT_NEAR(j(a, b), a == b ? 4.0 / 9.0 : -2.0 / 9.0, 1e-15);
    }
    const auto& sp = j.spectrum();
    EXPECT_NEAR(sp.eigenvalues[0], 0.0, 1e-15);
    EXPECT_NEAR(sp.eigenvalues[1], 2.0 / 3.0, 1e-14);
    EXPECT_NEAR(sp.eigenvalues[2], 2.0 / 3.0, 1e-14);
}

TEST(Jacobian, FiniteDifferenceExamples) {
    cg::CounterRng rng(4);
    EXPECT_LT(cg::jacobian_fd_check(gen::path(3), cg::LogWeights::zeros(2), 1e-5), 1e-8);
    EXPECT_LT(cg::jacobian_fd_check(gen::star(3), cg::LogWeights(random_vec(3, rng)), 1e-5), 1e-7);
    EXPECT_LT(cg::jacobian_fd_check(gen::cycle(6), cg::LogWeights(random_vec(6, rng)), 1e-5), 1e-7);
    EXPECT_THROW(cg::jacobian_fd_check(gen::path(3), cg::LogWeights::zeros(2), 0.0), std::invalid_argument);
}

TEST(Jacobian, MatchesIndependentFiniteDifferences) {
    cg::CounterRng rng(6);
    for (int k = 0; k < 40; ++k) {
        const auto g = gen::random_admissible(40, rng);
        const Eigen::VectorXd r = random_vec(g.edge_count(), rng, -2, 2);
        const auto j = cg::jacobian(g, cg::LogWeights(r));
        EXPECT_LT((j.entries() - oracles::fd_jacobian(g, r, 1e-5)).cwiseAbs().maxCoeff(), 1e-7);
    }
}

TEST(Jacobian, StructuralInvariants) {
    cg::CounterRng rng(12);
    for (int k = 0; k < 60; ++k) {
        const auto g = gen::random_admissible(50, rng);
        const auto j = cg::jacobian(g, cg::LogWeights(random_vec(g.edge_count(), rng, -3, 3))).entries();
        EXPECT_EQ((j - j.transpose()).cwiseAbs().maxCoeff(), 0.0);
        for (Eigen::Index i = 0; i < j.rows(); ++i) {
            const double rowmax = j.row(i).cwiseAbs().maxCoeff();
            EXPECT_LE(std::abs(j.row(i).sum()), 1e-10 * rowmax);
            if (g.edge_count() > 1) {
                EXPECT_GT(j(i, i), 0.0);
            }
            for (Eigen::Index c = 0; c < j.cols(); ++c) {
                if (c != i) {
                    EXPECT_LE(j(i, c), 0.0);
                }
            }
        }
        if (g.edge_count() > 1) {
            const auto sp = cg::spectral_decompose(j);
            EXPECT_GE(sp.raw_min, -1e-10 * sp.max());
            const double cut = 1e-10 * sp.max();
            EXPECT_LE(sp.eigenvalues[0], cut);
            EXPECT_GT(sp.eigenvalues[1], cut);
        }
    }
}

TEST(Spectrum, DecompositionContract) {
    cg::CounterRng rng(31);
    for (int k = 0; k < 30; ++k) {
        const auto g = gen::random_admissible(60, rng);
        const auto j = cg::jacobian(g, cg::LogWeights(random_vec(g.edge_count(), rng, -2, 2)));
        const auto& sp = j.spectrum();
        const auto n = j.size();
        const double scale = j.entries().cwiseAbs().maxCoeff();
        const Eigen::MatrixXd rec = sp.eigenvectors * sp.eigenvalues.asDiagonal() * sp.eigenvectors.transpose();
        EXPECT_LE((rec - j.entries()).cwiseAbs().maxCoeff(), 1e-9 * std::max(scale, 1.0));
        EXPECT_LE((sp.eigenvectors.transpose() * sp.eigenvectors - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(),
                  1e-10);
        for (Eigen::Index i = 1; i < n; ++i) EXPECT_LE(sp.eigenvalues[i - 1], sp.eigenvalues[i]);
        // independent eigensolver oracle
        const auto ref = oracles::jacobi_eigen(j.entries());
        EXPECT_LE((ref.values - sp.eigenvalues).cwiseAbs().maxCoeff(), 1e-10 * std::max(scale, 1.0));
    }
}

TEST(Spectrum, RandomRowSumZeroMatrixOrthonormal) {
    cg::CounterRng rng(2);
    const Eigen::Index n = 25;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double w = rng.unit() < 0.3 ? -rng.unit() : 0.0;
            a(i, j) = a(j, i) = w;
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) a(i, i) = -(a.row(i).sum() - a(i, i));
    const auto sp = cg::spectral_decompose(a);
    EXPECT_LE((sp.eigenvectors.transpose() * sp.eigenvectors - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(),
              1e-10);
    EXPECT_THROW(cg::spectral_decompose(Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
}

TEST(Spectrum, ToleranceValidatedAndClamps) {
    EXPECT_THROW(cg::SpectralTolerance(0.0), std::invalid_argument);
    EXPECT_THROW(cg::SpectralTolerance(1.0), std::invalid_argument);
    EXPECT_NO_THROW(cg::SpectralTolerance(1e-6));
    Eigen::MatrixXd a(2, 2);
    a << -1e-14, 0, 0, 1;
    const auto sp = cg::spectral_decompose(a);
    EXPECT_EQ(sp.eigenvalues[0], 0.0);
    EXPECT_DOUBLE_EQ(sp.raw_min, -1e-14);
    a << -1e-3, 0, 0, 1;
    EXPECT_DOUBLE_EQ(cg::spectral_decompose(a).eigenvalues[0], -1e-3);
}

TEST(Spectrum, CacheSharedAcrossThreads) {
    const auto j = cg::jacobian(gen::star(5), cg::LogWeights::zeros(5));
    std::vector<const cg::Spectrum*> seen(8);
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < seen.size(); ++t) pool.emplace_back([&, t] { seen[t] = &j.spectrum(); });
    }
    for (auto* p : seen) EXPECT_EQ(p, seen[0]);
    const auto copy = j;
    EXPECT_EQ(&copy.spectrum(), seen[0]);
}

TEST(Fractional, Examples) {
    cg::CounterRng rng(13);
    for (int k = 0; k < 10; ++k) {
        const auto g = gen::random_admissible(30, rng);
        const auto j = cg::jacobian(g, cg::LogWeights(random_vec(g.edge_count(), rng)));
        const Eigen::VectorXd v = random_vec(g.edge_count(), rng);
        EXPECT_LE((cg::fractional_laplacian_apply(j, 1.0, v) - cg::laplacian_apply(j, v)).cwiseAbs().maxCoeff(), 1e-9);
        const Eigen::VectorXd ones = Eigen::VectorXd::Ones(v.size());
        for (double s : {-1.0, -0.5, 0.0, 0.5, 1.0, 2.0}) {
            EXPECT_LE(cg::fractional_laplacian_apply(j, s, ones).cwiseAbs().maxCoeff(), 1e-9) << "s=" << s;
        }
    }
    const auto j = cg::jacobian(gen::path(3), cg::LogWeights::zeros(2));
    for (double s : {-1.0, -0.5, 0.0, 0.3, 1.0, 2.0, 7.5}) {
        const auto out = cg::fractional_laplacian_apply(j, s, vec({1, -1}));
        EXPECT_NEAR(out[0], -1.0, 1e-12);
        EXPECT_NEAR(out[1], 1.0, 1e-12);
    }
    EXPECT_THROW(cg::fractional_laplacian_apply(j, 1.0, vec({1, 2, 3})), std::invalid_argument);
}

TEST(Fractional, MatchesJacobiOraclePower) {
    cg::CounterRng rng(14);
    for (int k = 0; k < 15; ++k) {
        const auto g = gen::random_admissible(25, rng);
        if (g.edge_count() < 2) continue;
        const auto j = cg::jacobian(g, cg::LogWeights(random_vec(g.edge_count(), rng)));
        const Eigen::VectorXd v = random_vec(g.edge_count(), rng);
        for (double s : {-0.5, 0.5, 2.0}) {
            const Eigen::VectorXd expect = -(oracles::matrix_power(j.entries(), s) * v);
            EXPECT_LE((cg::fractional_laplacian_apply(j, s, v) - expect).cwiseAbs().maxCoeff(),
                      1e-8 * std::max(1.0, expect.cwiseAbs().maxCoeff()));
        }
    }
}

TEST(Fractional, SemigroupAndZeroPower) {
    cg::CounterRng rng(15);
    for (int k = 0; k < 10; ++k) {
        const auto g = gen::random_admissible(30, rng);
        if (g.edge_count() < 2) continue;
        const auto j = cg::jacobian(g, cg::LogWeights(random_vec(g.edge_count(), rng, -0.5, 0.5)));
        Eigen::VectorXd v = random_vec(g.edge_count(), rng);
        v.array() -= v.mean();
        const double vmean = v.mean();
        const Eigen::VectorXd zero = cg::fractional_laplacian_apply(j, 0.0, v);
        EXPECT_LE((zero + (v.array() - vmean).matrix()).cwiseAbs().maxCoeff(), 1e-9);
        const std::vector<double> powers{-1, -0.5, 0.5, 1, 2};
        for (double s : powers) {
            for (double t : powers) {
                // Delta^s Delta^t = (-J^s)(-J^t) = J^(s+t)
                const Eigen::VectorXd st =
                    cg::fractional_laplacian_apply(j, s, cg::fractional_laplacian_apply(j, t, v));
                const Eigen::VectorXd direct = -cg::fractional_laplacian_apply(j, s + t, v);
                EXPECT_LE((st - direct).cwiseAbs().maxCoeff(), 1e-8 * std::max(1.0, direct.cwiseAbs().maxCoeff()))
                    << "s=" << s << " t=" << t;
            }
        }
    }
}

TEST(Fractional, ZeroPowerOnNonCenteredVector) {
    const auto j = cg::jacobian(gen::cycle(7), cg::LogWeights::zeros(7));
    Eigen::VectorXd v(7);
    v << 3, 1, 4, 1, 5, 9, 2;
    const Eigen::VectorXd out = cg::fractional_laplacian_apply(j, 0.0, v);
    EXPECT_LE((out + (v.array() - v.mean()).matrix()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(PLaplacian, Examples) {
    cg::CounterRng rng(16);
    for (int k = 0; k < 20; ++k) {
        const auto g = gen::random_admissible(40, rng);
        const cg::LogWeights r(random_vec(g.edge_count(), rng));
        const auto j = cg::jacobian(g, r);
        const Eigen::VectorXd f = random_vec(g.edge_count(), rng);
        EXPECT_LE((cg::p_laplacian_apply(g, r, 2.0, f) - cg::laplacian_apply(j, f)).cwiseAbs().maxCoeff(), 1e-10);
        const Eigen::VectorXd c = Eigen::VectorXd::Constant(f.size(), 0.7);
        for (double p : {1.2, 2.0, 3.0}) EXPECT_EQ(cg::p_laplacian_apply(g, r, p, c).cwiseAbs().maxCoeff(), 0.0);
    }
    const auto p3 = cg::p_laplacian_apply(gen::path(3), cg::LogWeights::zeros(2), 3.0, vec({0, 2}));
    EXPECT_NEAR(p3[0], 2.0, 1e-15);
    EXPECT_NEAR(p3[1], -2.0, 1e-15);
    EXPECT_THROW(cg::p_laplacian_apply(gen::path(3), cg::LogWeights::zeros(2), 1.0, vec({0, 2})),
                 std::invalid_argument);
    EXPECT_THROW(cg::p_laplacian_apply(gen::path(3), cg::LogWeights::zeros(2), 2.0, vec({0})), std::invalid_argument);
}

TEST(PLaplacian, SumZeroAndQuadraticFormIdentity) {
    cg::CounterRng rng(18);
    for (int k = 0; k < 40; ++k) {
        const auto g = gen::random_admissible(40, rng);
        const cg::LogWeights r(random_vec(g.edge_count(), rng, -2, 2));
        const auto j = cg::jacobian(g, r).entries();
        const auto adj = cg::edge_adjacency(g);
        const Eigen::VectorXd f = random_vec(g.edge_count(), rng, -3, 3);
        for (double p : {1.1, 1.5, 2.0, 3.0, 4.5}) {
            const Eigen::VectorXd lp = cg::p_laplacian_apply(g, r, p, f);
            EXPECT_LE(std::abs(lp.sum()), 1e-10 * std::max(1.0, lp.cwiseAbs().sum()));
            double pairs = 0.0;
            for (std::size_t i = 0; i < adj.size(); ++i) {
                for (auto jj : adj[i]) {
                    const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(jj);
                    pairs += -j(a, b) * std::pow(std::abs(f[b] - f[a]), p);
                }
            }
            const double lhs = f.dot(lp);
            const double rhs = -0.5 * pairs;
            EXPECT_NEAR(lhs, rhs, 1e-9 * std::max(1.0, std::abs(rhs)));
            EXPECT_LE(lhs, 1e-12);
        }
    }
}
