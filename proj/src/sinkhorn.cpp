#include "erem/sinkhorn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "erem/error.hpp"

namespace erem {

TransportPlan sinkhorn_plan(const Matrix& cost, const SinkhornOptions& options) {
    if (!(options.reg > 0.0)) throw ArgumentError("sinkhorn: reg must be positive");
    if (!(options.tol > 0.0)) throw ArgumentError("sinkhorn: tol must be positive");
    if (options.max_iters < 1) throw ArgumentError("sinkhorn: max_iters must be >= 1");
    if (!cost.allFinite()) throw ArgumentError("sinkhorn: cost has non-finite entries");
    const Eigen::Index m = cost.rows();
    const Eigen::Index n = cost.cols();
    if (m == 0 || n == 0) throw ArgumentError("sinkhorn: empty cost matrix");

    const Matrix kernel = -cost / options.reg;  // log K
    const double log_a = -std::log(static_cast<double>(m));
    const double log_b = -std::log(static_cast<double>(n));
    const double row_mass = 1.0 / static_cast<double>(m);

    Vector f = Vector::Zero(m);
    Vector g = Vector::Zero(n);
    Vector col_max(n);
    Vector col_sum(n);

    // log sum_j exp(g_j + K_ij), computed for every row.
    auto row_lse = [&](Eigen::Index i) {
        const auto shifted = (kernel.row(i).array() + g.transpose().array()).eval();
        const double top = shifted.maxCoeff();
        return top + std::log((shifted - top).exp().sum());
    };

    TransportPlan result;
    Vector lse(m);
    for (int iter = 0;; ++iter) {
        // Column marginals are exact right after a g update, so the row error
        // is the full violation.
        double violation = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            lse[i] = row_lse(i);
            if (iter > 0) violation = std::max(violation, std::abs(std::exp(f[i] + lse[i]) - row_mass));
        }
        if (iter > 0) {
            result.marginal_violation = violation;
            result.iterations_used = iter;
            if (violation < options.tol) {
                result.converged = true;
                break;
            }
            if (iter >= options.max_iters) break;
        }
        for (Eigen::Index i = 0; i < m; ++i) f[i] = log_a - lse[i];

        col_max.setConstant(-std::numeric_limits<double>::infinity());
        for (Eigen::Index i = 0; i < m; ++i) {
            col_max = col_max.cwiseMax((kernel.row(i).array() + f[i]).matrix().transpose());
        }
        col_sum.setZero();
        for (Eigen::Index i = 0; i < m; ++i) {
            col_sum.array() += (kernel.row(i).transpose().array() + f[i] - col_max.array()).exp();
        }
        for (Eigen::Index j = 0; j < n; ++j) g[j] = log_b - (col_max[j] + std::log(col_sum[j]));
    }

    result.values.resize(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            result.values(i, j) = std::exp(f[i] + g[j] + kernel(i, j));
        }
    }
    return result;
}

TransportPlan sinkhorn_plan(const AssembledCost& cost, const SinkhornOptions& options) {
    return sinkhorn_plan(cost.values, options);
}

double marginal_violation(const Matrix& plan) {
    const double a = 1.0 / static_cast<double>(plan.rows());
    const double b = 1.0 / static_cast<double>(plan.cols());
    const double rows = (plan.rowwise().sum().array() - a).abs().maxCoeff();
    const double cols = (plan.colwise().sum().array() - b).abs().maxCoeff();
    return std::max(rows, cols);
}

std::vector<std::pair<Index, Index>> exact_min_cost_matching(const Matrix& cost) {
    const Eigen::Index rows = cost.rows();
    const Eigen::Index cols = cost.cols();
    if (rows > kExactMatchingMaxSize || cols > kExactMatchingMaxSize) {
        throw ArgumentError("exact matching supports at most " +
                            std::to_string(kExactMatchingMaxSize) + " rows and columns");
    }
    if (!cost.allFinite()) throw ArgumentError("exact matching: non-finite cost");
    if (rows == 0 || cols == 0) return {};

    // Work on an n <= m orientation so every row gets matched.
    const bool transposed = rows > cols;
    const Matrix a = transposed ? Matrix(cost.transpose()) : cost;
    const Eigen::Index n = a.rows();
    const Eigen::Index m = a.cols();

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<Eigen::Index> p(m + 1, 0), way(m + 1, 0);
    for (Eigen::Index i = 1; i <= n; ++i) {
        p[0] = i;
        Eigen::Index j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<bool> used(m + 1, false);
        do {
            used[j0] = true;
            const Eigen::Index i0 = p[j0];
            double delta = inf;
            Eigen::Index j1 = 0;
            for (Eigen::Index j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (Eigen::Index j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const Eigen::Index j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<std::pair<Index, Index>> matching;
    for (Eigen::Index j = 1; j <= m; ++j) {
        if (p[j] == 0) continue;
        const auto r = static_cast<Index>(p[j] - 1);
        const auto c = static_cast<Index>(j - 1);
        matching.emplace_back(transposed ? c : r, transposed ? r : c);
    }
    std::sort(matching.begin(), matching.end());
    return matching;
}

}  // namespace erem
