#pragma once

#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace erem {

using Index = std::uint32_t;
using RawId = std::uint64_t;

struct Triple {
    Index head = 0;
    Index relation = 0;
    Index tail = 0;

    friend auto operator<=>(const Triple&, const Triple&) = default;
};

enum class Orientation : std::uint8_t { outgoing = 0, incoming = 1 };

/// One adjacency entry: the relation on the edge and the entity at the other end.
struct Edge {
    Index relation = 0;
    Index node = 0;

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct Neighbor {
    Index relation = 0;
    Index entity = 0;
    Orientation orientation = Orientation::outgoing;

    friend auto operator<=>(const Neighbor&, const Neighbor&) = default;
};

/// Dense-index lookup table for the "id<TAB>name" maps of one side.
class IdTable {
public:
    IdTable() = default;
    IdTable(std::vector<RawId> ids, std::vector<std::string> names);

    std::size_t size() const noexcept { return ids_.size(); }
    RawId id(Index i) const { return ids_.at(i); }
    const std::string& name(Index i) const { return names_.at(i); }
    const std::vector<RawId>& ids() const noexcept { return ids_; }
    const std::vector<std::string>& names() const noexcept { return names_; }

    bool contains(RawId id) const { return index_.contains(id); }
    /// Throws ReferentialError for an unknown id.
    Index index_of(RawId id) const;

private:
    std::vector<RawId> ids_;
    std::vector<std::string> names_;
    std::unordered_map<RawId, Index> index_;
};

/// Immutable knowledge graph {E, R, T, S_e, S_r} with both adjacency directions.
/// Triples are deduplicated on construction, keeping first-occurrence order.
class KnowledgeGraph {
public:
    KnowledgeGraph() = default;
    KnowledgeGraph(IdTable entities, IdTable relations, std::vector<Triple> triples);

    std::size_t entity_count() const noexcept { return entities_.size(); }
    std::size_t relation_count() const noexcept { return relations_.size(); }
    std::size_t triple_count() const noexcept { return triples_.size(); }

    const IdTable& entities() const noexcept { return entities_; }
    const IdTable& relations() const noexcept { return relations_; }
    const std::vector<Triple>& triples() const noexcept { return triples_; }

    std::span<const Edge> out_edges(Index e) const;
    std::span<const Edge> in_edges(Index e) const;
    std::size_t degree(Index e) const;

    bool has_triple(Index head, Index relation, Index tail) const;

private:
    IdTable entities_;
    IdTable relations_;
    std::vector<Triple> triples_;
    std::vector<Triple> sorted_;  // for has_triple
    std::vector<std::vector<Edge>> out_adj_;
    std::vector<std::vector<Edge>> in_adj_;
};

/// Relation co-occurrence graph obtained by rewriting (e1, r, e2) triples as
/// (r1, e, r2): two relations are adjacent when some entity is incident to both,
/// regardless of edge direction.
struct RelationTriple {
    Index first = 0;  // first <= second
    Index entity = 0;
    Index second = 0;

    friend auto operator<=>(const RelationTriple&, const RelationTriple&) = default;
};

class RelationGraph {
public:
    RelationGraph() = default;
    RelationGraph(std::size_t relation_count, std::vector<RelationTriple> triples);

    std::size_t relation_count() const noexcept { return adj_.size(); }
    const std::vector<RelationTriple>& triples() const noexcept { return triples_; }
    /// Sorted, self-excluding neighbor list of r.
    std::span<const Index> neighbors(Index r) const;

private:
    std::vector<RelationTriple> triples_;
    std::vector<std::vector<Index>> adj_;
};

IdTable parse_id_map(std::istream& in, const std::string& source_name = "id map");
std::vector<Triple> parse_triples(std::istream& in, const IdTable& entities,
                                  const IdTable& relations,
                                  const std::string& source_name = "triples");

KnowledgeGraph parse_graph(std::istream& entity_ids, std::istream& relation_ids,
                           std::istream& triples);

/// Loads the ent_ids / rel_ids / triples trio from a directory.
KnowledgeGraph load_graph_bundle(const std::string& directory);

/// Neighbors of e over both directions, sorted by (relation, entity, orientation).
std::vector<Neighbor> one_hop_entity_neighbors(const KnowledgeGraph& g, Index e);

RelationGraph kgt_transform(const KnowledgeGraph& g);

std::span<const Index> one_hop_relation_neighbors(const RelationGraph& rkg, Index r);

}  // namespace erem
