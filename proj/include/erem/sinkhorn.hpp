#pragma once

#include <utility>
#include <vector>

#include "erem/award.hpp"
#include "erem/matrix.hpp"

namespace erem {

struct SinkhornOptions {
    double reg = 0.1;
    int max_iters = 1000;
    /// Stop once the largest absolute marginal error drops below this.
    double tol = 1e-9;
};

struct TransportPlan {
    Matrix values;
    int iterations_used = 0;
    double marginal_violation = 0.0;
    bool converged = false;
};

/// Entropic OT between uniform marginals (1/m, 1/n), solved by alternating
/// row/column scaling of exp(-C/reg) in the log domain.
TransportPlan sinkhorn_plan(const Matrix& cost, const SinkhornOptions& options = {});
TransportPlan sinkhorn_plan(const AssembledCost& cost, const SinkhornOptions& options = {});

/// Largest absolute deviation of any row/column sum from 1/m, 1/n.
double marginal_violation(const Matrix& plan);

inline constexpr Eigen::Index kExactMatchingMaxSize = 64;

/// Minimum-cost one-to-one matching of size min(m, n) (Hungarian method with
/// potentials). Pairs are returned sorted by row. Intended for test-scale inputs.
std::vector<std::pair<Index, Index>> exact_min_cost_matching(const Matrix& cost);

}  // namespace erem
