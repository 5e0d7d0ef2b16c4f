#include <gtest/gtest.h>

#include "erem/award.hpp"
#include "erem/error.hpp"
#include "erem/sinkhorn.hpp"
#include "support.hpp"

using namespace erem;

TEST(Sinkhorn, OneByOne) {
    const auto p = sinkhorn_plan(Matrix::Constant(1, 1, 3.7));
    EXPECT_NEAR(p.values(0, 0), 1.0, 1e-15);
    EXPECT_TRUE(p.converged);
}

TEST(Sinkhorn, ConstantCostIsUniform) {
    const auto p = sinkhorn_plan(Matrix::Constant(2, 2, 0.4));
    for (Eigen::Index i = 0; i < 2; ++i)
        for (Eigen::Index j = 0; j < 2; ++j) EXPECT_NEAR(p.values(i, j), 0.25, 1e-15);
}

TEST(Sinkhorn, StrongDiagonal) {
    const Matrix c = (Matrix(2, 2) << 0, 10, 10, 0).finished();
    const auto p = sinkhorn_plan(c, {0.1, 1000, 1e-12});
    // Closed form: off-diagonal share is e^-100 / (1 + e^-100) of each row.
    EXPECT_NEAR(p.values(0, 0), 0.5, 1e-6);
    EXPECT_NEAR(p.values(1, 1), 0.5, 1e-6);
    EXPECT_NEAR(p.values(0, 1), 0.0, 1e-6);
    EXPECT_NEAR(p.values(1, 0), 0.0, 1e-6);
}

TEST(Sinkhorn, HugeCostsDoNotUnderflow) {
    // exp(-400/0.1) is zero in double precision; the log domain copes.
    const Matrix c = (Matrix(2, 2) << 400, 400.05, 400.08, 400).finished();
    const auto p = sinkhorn_plan(c);
    EXPECT_TRUE(p.values.allFinite());
    EXPECT_TRUE(p.converged);
    EXPECT_LE(marginal_violation(p.values), 1e-9);
    const Matrix shifted = c.array() - 400.0;
    EXPECT_LE((p.values - sinkhorn_plan(shifted).values).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Sinkhorn, Errors) {
    Matrix bad = Matrix::Zero(2, 2);
    bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(sinkhorn_plan(bad), ArgumentError);
    bad(0, 1) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(sinkhorn_plan(bad), ArgumentError);
    EXPECT_THROW(sinkhorn_plan(Matrix::Zero(2, 2), {0.0, 10, 1e-9}), ArgumentError);
    EXPECT_THROW(sinkhorn_plan(Matrix::Zero(2, 2), {-1.0, 10, 1e-9}), ArgumentError);
    EXPECT_THROW(sinkhorn_plan(Matrix::Zero(2, 2), {0.1, 10, 0.0}), ArgumentError);
    EXPECT_THROW(sinkhorn_plan(Matrix(0, 3)), ArgumentError);
}

TEST(Sinkhorn, MarginalsOnRandomRectangles) {
    SplitMix64 rng(71);
    for (int trial = 0; trial < 20; ++trial) {
        const auto m = 1 + static_cast<Eigen::Index>(rng.below(30));
        const auto n = 1 + static_cast<Eigen::Index>(rng.below(30));
        const auto p = sinkhorn_plan(test::random_matrix(rng, m, n));
        ASSERT_TRUE(p.converged) << m << "x" << n;
        EXPECT_GE(p.values.minCoeff(), 0.0);
        EXPECT_LE((p.values.rowwise().sum().array() - 1.0 / m).abs().maxCoeff(), 1e-9);
        EXPECT_LE((p.values.colwise().sum().array() - 1.0 / n).abs().maxCoeff(), 1e-9);
        EXPECT_LE(marginal_violation(p.values), p.marginal_violation + 1e-15);
    }
}

TEST(Sinkhorn, ReportsNonConvergence) {
    SplitMix64 rng(72);
    const auto p = sinkhorn_plan(test::random_matrix(rng, 30, 30, 0, 5), {0.01, 2, 1e-15});
    EXPECT_FALSE(p.converged);
    EXPECT_EQ(p.iterations_used, 2);
    EXPECT_GT(p.marginal_violation, 0.0);
}

TEST(Sinkhorn, ConstantShiftInvariance) {
    SplitMix64 rng(73);
    for (int trial = 0; trial < 20; ++trial) {
        const auto c = test::random_matrix(rng, 8, 11, 0, 3);
        const auto a = sinkhorn_plan(c);
        const auto b = sinkhorn_plan((c.array() + 2.5).matrix());
        EXPECT_LE((a.values - b.values).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(Sinkhorn, BitIdenticalReruns) {
    SplitMix64 rng(74);
    const auto c = test::random_matrix(rng, 13, 9);
    EXPECT_EQ(sinkhorn_plan(c).values, sinkhorn_plan(c).values);
}

TEST(Sinkhorn, AcceptsAssembledCost) {
    AssembledCost cost{Matrix::Constant(3, 3, 1.0), {"C"}};
    EXPECT_NEAR(sinkhorn_plan(cost).values(2, 1), 1.0 / 9.0, 1e-15);
}

TEST(ExactMatching, IdentityFavoring) {
    Matrix c = Matrix::Ones(5, 5);
    c.diagonal().setZero();
    const auto m = exact_min_cost_matching(c);
    ASSERT_EQ(m.size(), 5u);
    for (Index i = 0; i < 5; ++i) EXPECT_EQ(m[i], (std::pair<Index, Index>{i, i}));
}

TEST(ExactMatching, AntiDiagonal) {
    const Matrix c = (Matrix(2, 2) << 1, 0, 0, 1).finished();
    EXPECT_EQ(exact_min_cost_matching(c), (std::vector<std::pair<Index, Index>>{{0, 1}, {1, 0}}));
}

TEST(ExactMatching, BoundAndErrors) {
    EXPECT_THROW(exact_min_cost_matching(Matrix::Zero(65, 3)), ArgumentError);
    EXPECT_THROW(exact_min_cost_matching(Matrix::Zero(3, 65)), ArgumentError);
    EXPECT_NO_THROW(exact_min_cost_matching(Matrix::Zero(64, 64)));
    EXPECT_TRUE(exact_min_cost_matching(Matrix(0, 0)).empty());
}

TEST(ExactMatching, EqualsPermutationSearch) {
    SplitMix64 rng(75);
    for (int trial = 0; trial < 40; ++trial) {
        const auto m = 1 + static_cast<Eigen::Index>(rng.below(8));
        const auto n = 1 + static_cast<Eigen::Index>(rng.below(8));
        const auto c = test::random_matrix(rng, m, n, 0, 10);
        const auto match = exact_min_cost_matching(c);
        ASSERT_EQ(match.size(), static_cast<std::size_t>(std::min(m, n)));
        double total = 0.0;
        std::set<Index> rows;
        std::set<Index> cols;
        for (const auto& [i, j] : match) {
            total += c(i, j);
            EXPECT_TRUE(rows.insert(i).second);
            EXPECT_TRUE(cols.insert(j).second);
        }
        EXPECT_NEAR(total, test::brute_min_matching_cost(c), 1e-9) << m << "x" << n;
        EXPECT_TRUE(std::is_sorted(match.begin(), match.end()));
    }
}

TEST(ExactMatching, UniqueOptimumOnEightByEight) {
    SplitMix64 rng(76);
    for (int trial = 0; trial < 10; ++trial) {
        // Plant a permutation far below everything else.
        std::vector<Index> perm(8);
        std::iota(perm.begin(), perm.end(), Index{0});
        for (std::size_t i = 8; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
        Matrix c = test::random_matrix(rng, 8, 8, 5, 10);
        for (Index i = 0; i < 8; ++i) c(i, perm[i]) = rng.uniform();
        const auto match = exact_min_cost_matching(c);
        for (const auto& [i, j] : match) EXPECT_EQ(j, perm[i]);
    }
}
