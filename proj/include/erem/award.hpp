#pragma once

#include <string>
#include <vector>

#include "erem/anchors.hpp"
#include "erem/kg.hpp"
#include "erem/matrix.hpp"

namespace erem {

struct EntityAwards {
    AwardMatrix structure;  // neighbor-consistency counter
    AwardMatrix relation;   // same, restricted to anchored connecting relations
};

/// Structural awards for entity pairs. For an anchored (e_i, e_j') and an
/// anchored neighbor pair (e_x, e_z') with e_x adjacent to e_i and e_z' to e_j',
/// structure(i, j) gains 1, or alpha when both pairs are hard. relation(i, j)
/// gains the same amount when some connecting edges (e_i, r, e_x), (e_j', r', e_z')
/// share orientation and (r, r') is anchored. Each neighbor pair counts once per cell.
EntityAwards entity_award_matrices(const KnowledgeGraph& g, const KnowledgeGraph& g_prime,
                                   const AnchorSet& entities, const AnchorSet& relations,
                                   double alpha = 2.0);

/// The relation-graph counterpart: (r_i, r_j') gains 1 (alpha when both hard)
/// for every anchored (r_x, r_z') with r_x adjacent to r_i and r_z' to r_j'.
AwardMatrix relation_award_matrix(const RelationGraph& rkg, const RelationGraph& rkg_prime,
                                  const AnchorSet& relations, double alpha = 2.0);

struct AssembledCost {
    Matrix values;
    std::vector<std::string> components;
};

/// Divides by the global maximum (left as is when the maximum is 0).
AwardMatrix normalize_award(const AwardMatrix& award);

/// C^e = C^ent + (1 - S^stru / max) + (1 - S^rel / max).
AssembledCost assemble_entity_cost(const CostMatrix& embedding_cost, const AwardMatrix& structure,
                                   const AwardMatrix& relation);

/// C^r = C^rel + (1 - S^stru_rel / max).
AssembledCost assemble_relation_cost(const CostMatrix& embedding_cost,
                                     const AwardMatrix& structure);

}  // namespace erem
