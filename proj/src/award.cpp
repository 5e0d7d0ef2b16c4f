#include "erem/award.hpp"

#include <algorithm>
#include <map>

#include "erem/error.hpp"

namespace erem {

namespace {

void check_alpha(double alpha) {
    if (!(alpha >= 1.0)) throw ArgumentError("award alpha must be >= 1");
}

struct Incidence {
    Index relation;
    Orientation orientation;
};

// Neighbor entity -> connecting edges, for one entity.
std::map<Index, std::vector<Incidence>> incidence_by_neighbor(const KnowledgeGraph& g, Index e) {
    std::map<Index, std::vector<Incidence>> out;
    for (const auto& edge : g.out_edges(e)) {
        out[edge.node].push_back({edge.relation, Orientation::outgoing});
    }
    for (const auto& edge : g.in_edges(e)) {
        out[edge.node].push_back({edge.relation, Orientation::incoming});
    }
    return out;
}

bool relation_connected(const std::vector<Incidence>& source, const std::vector<Incidence>& target,
                        const AnchorSet& relations) {
    for (const auto& a : source) {
        const auto r2 = relations.target_of(a.relation);
        if (!r2) continue;
        for (const auto& b : target) {
            if (b.relation == *r2 && b.orientation == a.orientation) return true;
        }
    }
    return false;
}

Matrix normalized_addend(const AwardMatrix& award) { return Matrix::Ones(award.rows(), award.cols()) - normalize_award(award); }

}  // namespace

EntityAwards entity_award_matrices(const KnowledgeGraph& g, const KnowledgeGraph& g_prime,
                                   const AnchorSet& entities, const AnchorSet& relations,
                                   double alpha) {
    check_alpha(alpha);
    const auto m = static_cast<Eigen::Index>(g.entity_count());
    const auto n = static_cast<Eigen::Index>(g_prime.entity_count());
    EntityAwards awards{AwardMatrix::Zero(m, n), AwardMatrix::Zero(m, n)};

    for (const auto& cell : entities.pairs()) {
        if (cell.source >= m || cell.target >= n) {
            throw ArgumentError("entity anchor out of graph range");
        }
        const auto source_nbrs = incidence_by_neighbor(g, cell.source);
        const auto target_nbrs = incidence_by_neighbor(g_prime, cell.target);
        for (const auto& [x, source_edges] : source_nbrs) {
            const auto z = entities.target_of(x);
            if (!z) continue;
            const auto hit = target_nbrs.find(*z);
            if (hit == target_nbrs.end()) continue;
            const bool hard = cell.tier == Tier::hard && entities.is_hard(x, *z);
            const double gain = hard ? alpha : 1.0;
            awards.structure(cell.source, cell.target) += gain;
            if (relation_connected(source_edges, hit->second, relations)) {
                awards.relation(cell.source, cell.target) += gain;
            }
        }
    }
    return awards;
}

AwardMatrix relation_award_matrix(const RelationGraph& rkg, const RelationGraph& rkg_prime,
                                  const AnchorSet& relations, double alpha) {
    check_alpha(alpha);
    const auto m = static_cast<Eigen::Index>(rkg.relation_count());
    const auto n = static_cast<Eigen::Index>(rkg_prime.relation_count());
    AwardMatrix award = AwardMatrix::Zero(m, n);
    for (const auto& cell : relations.pairs()) {
        if (cell.source >= m || cell.target >= n) {
            throw ArgumentError("relation anchor out of graph range");
        }
        const auto target_adj = rkg_prime.neighbors(cell.target);
        for (const auto x : rkg.neighbors(cell.source)) {
            const auto z = relations.target_of(x);
            if (!z || !std::binary_search(target_adj.begin(), target_adj.end(), *z)) continue;
            const bool hard = cell.tier == Tier::hard && relations.is_hard(x, *z);
            award(cell.source, cell.target) += hard ? alpha : 1.0;
        }
    }
    return award;
}

AwardMatrix normalize_award(const AwardMatrix& award) {
    if (award.size() == 0) return award;
    const double top = award.maxCoeff();
    if (top <= 0.0) return award;
    return award / top;
}

AssembledCost assemble_entity_cost(const CostMatrix& embedding_cost, const AwardMatrix& structure,
                                   const AwardMatrix& relation) {
    if (structure.rows() != embedding_cost.rows() || structure.cols() != embedding_cost.cols() ||
        relation.rows() != embedding_cost.rows() || relation.cols() != embedding_cost.cols()) {
        throw ArgumentError("assemble_entity_cost: shape mismatch");
    }
    return {embedding_cost + normalized_addend(structure) + normalized_addend(relation),
            {"C_ent", "1 - S_stru/max", "1 - S_rel/max"}};
}

AssembledCost assemble_relation_cost(const CostMatrix& embedding_cost,
                                     const AwardMatrix& structure) {
    if (structure.rows() != embedding_cost.rows() || structure.cols() != embedding_cost.cols()) {
        throw ArgumentError("assemble_relation_cost: shape mismatch");
    }
    return {embedding_cost + normalized_addend(structure), {"C_rel", "1 - S_stru_rel/max"}};
}

}  // namespace erem
