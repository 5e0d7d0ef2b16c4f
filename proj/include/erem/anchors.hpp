#pragma once

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <vector>

#include "erem/kg.hpp"
#include "erem/matrix.hpp"

namespace erem {

enum class Tier : std::uint8_t { normal, hard };

struct AnchorPair {
    Index source = 0;
    Index target = 0;
    Tier tier = Tier::normal;

    friend bool operator==(const AnchorPair&, const AnchorPair&) = default;
};

/// One-to-one partial mapping between two index spaces. Hard pairs are a tier
/// of the same set, so the subset law holds by construction.
class AnchorSet {
public:
    enum class InsertResult { inserted, upgraded, unchanged, conflict };

    /// Adds (source, target). A pair that would reuse either endpoint with a
    /// different partner is refused. Re-inserting an existing pair as hard upgrades it.
    InsertResult insert(Index source, Index target, Tier tier = Tier::normal);
    /// Returns false if the pair is not in the set.
    bool set_hard(Index source, Index target);

    bool contains(Index source, Index target) const;
    bool is_hard(Index source, Index target) const;
    std::optional<Index> target_of(Index source) const;
    std::optional<Index> source_of(Index target) const;

    std::size_t size() const noexcept { return by_source_.size(); }
    std::size_t hard_count() const noexcept { return hard_count_; }
    bool empty() const noexcept { return by_source_.empty(); }

    /// Sorted by source index.
    std::vector<AnchorPair> pairs() const;
    AnchorSet hard_subset() const;

    friend bool operator==(const AnchorSet&, const AnchorSet&) = default;

private:
    struct Entry {
        Index target;
        Tier tier;
        friend bool operator==(const Entry&, const Entry&) = default;
    };
    std::map<Index, Entry> by_source_;
    std::map<Index, Index> by_target_;
    std::size_t hard_count_ = 0;
};

/// Row-minimum anchors: (i, j) qualifies when cost(i, j) < threshold and is the
/// strict minimum of row i. Rows competing for one column resolve to the lowest
/// cost (lowest row index on an exact tie).
AnchorSet init_anchor_set(const CostMatrix& cost, double threshold = 0.3);

/// Upgrades both endpoint pairs of every anchored triple pair
/// (e_i, r, e_j) in g, (e_i', r', e_j') in g' whose relation pair is in relations.
AnchorSet derive_hard_entity_anchors(const KnowledgeGraph& g, const KnowledgeGraph& g_prime,
                                     const AnchorSet& entities, const AnchorSet& relations);

/// Upgrades (r, r') when it connects two hard entity pairs in both graphs.
AnchorSet derive_hard_relation_anchors(const KnowledgeGraph& g, const KnowledgeGraph& g_prime,
                                       const AnchorSet& hard_entities,
                                       const AnchorSet& relations);

/// Adds (i, j) as a normal anchor when plan(i, j) is the maximum of row i,
/// exceeds 1/max(m, n) - epsilon, and neither endpoint is taken. Existing
/// pairs are kept unchanged.
AnchorSet promote_anchors(const Matrix& plan, const AnchorSet& existing, double epsilon = 1e-5);

/// Dump lines "src_id<TAB>tgt_id<TAB>{normal|hard}" using raw ids.
void write_anchor_dump(std::ostream& out, const AnchorSet& anchors, const IdTable& source,
                       const IdTable& target);

struct RawAnchor {
    RawId source = 0;
    RawId target = 0;
    Tier tier = Tier::normal;
};
std::vector<RawAnchor> read_anchor_dump(std::istream& in, const std::string& source_name = "anchors");

}  // namespace erem
