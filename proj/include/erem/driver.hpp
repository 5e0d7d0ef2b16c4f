#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "erem/anchors.hpp"
#include "erem/award.hpp"
#include "erem/config.hpp"
#include "erem/embedding.hpp"
#include "erem/eval.hpp"
#include "erem/kg.hpp"
#include "erem/oracle.hpp"
#include "erem/sinkhorn.hpp"

namespace erem {

struct ObjectiveValue {
    double value = 0.0;
    /// Anchored cells with zero plan mass; non-empty iff value is +infinity.
    std::vector<std::pair<Index, Index>> zero_mass_pairs;
};

/// -sum_{all anchors} log plan(i, j) - lambda * sum_{hard anchors} log plan(i, j).
ObjectiveValue anchor_objective(const Matrix& plan, const AnchorSet& anchors, double lambda);

struct IterationRecord {
    int iteration = 0;  // 1-based
    std::size_t entity_anchors = 0;
    std::size_t hard_entity_anchors = 0;
    std::size_t relation_anchors = 0;
    std::size_t hard_relation_anchors = 0;
    double objective_entity = 0.0;
    double objective_relation = 0.0;
    double objective_final = 0.0;
    int entity_sinkhorn_iters = 0;
    int relation_sinkhorn_iters = 0;
    bool entity_sinkhorn_converged = false;
    bool relation_sinkhorn_converged = false;
    std::optional<MetricsReport> ea;
    std::optional<MetricsReport> ra;
};

struct EremResult {
    AnchorSet entity_anchors;
    AnchorSet relation_anchors;
    TransportPlan entity_plan;
    TransportPlan relation_plan;
    AssembledCost entity_cost;
    AssembledCost relation_cost;
    std::vector<IterationRecord> trace;
};

struct EremInputs {
    const KnowledgeGraph& source;
    const KnowledgeGraph& target;
    const EmbeddingTable& source_entities;
    const EmbeddingTable& target_entities;
    const EmbeddingTable& source_relations;
    const EmbeddingTable& target_relations;
};

struct EremHooks {
    AnchorOracle* oracle = nullptr;
    const GroundTruth* entity_truth = nullptr;
    const GroundTruth* relation_truth = nullptr;
    std::function<void(const IterationRecord&)> on_iteration;
};

/// Alternating entity (E) and relation (M) matching. Each iteration derives
/// hard anchors, builds award-modified costs, solves the transport plans and
/// promotes confident cells to anchors. Anchors are only ever added.
EremResult run_erem(const EremConfig& config, const EremInputs& inputs, const EremHooks& hooks = {});

}  // namespace erem
