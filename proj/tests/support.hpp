#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "erem/anchors.hpp"
#include "erem/kg.hpp"
#include "erem/matrix.hpp"
#include "erem/rng.hpp"

namespace erem::test {

inline IdTable numbered_table(std::size_t n, const std::string& prefix) {
    std::vector<RawId> ids(n);
    std::vector<std::string> names(n);
    for (std::size_t i = 0; i < n; ++i) {
        ids[i] = i;
        names[i] = prefix + std::to_string(i);
    }
    return IdTable(std::move(ids), std::move(names));
}

inline KnowledgeGraph make_graph(std::size_t entities, std::size_t relations,
                                 std::vector<Triple> triples) {
    return KnowledgeGraph(numbered_table(entities, "e"), numbered_table(relations, "r"),
                          std::move(triples));
}

/// Random triples with self-loops and repeats allowed.
inline KnowledgeGraph random_graph(SplitMix64& rng, std::size_t entities, std::size_t relations,
                                   std::size_t triples) {
    std::vector<Triple> out;
    for (std::size_t k = 0; k < triples; ++k) {
        out.push_back({static_cast<Index>(rng.below(entities)), static_cast<Index>(rng.below(relations)),
                       static_cast<Index>(rng.below(entities))});
    }
    return make_graph(entities, relations, std::move(out));
}

/// Random one-to-one partial mapping; each source kept with probability keep.
inline AnchorSet random_anchors(SplitMix64& rng, std::size_t sources, std::size_t targets,
                                double keep, double hard_fraction) {
    std::vector<Index> perm(targets);
    std::iota(perm.begin(), perm.end(), Index{0});
    for (std::size_t i = targets; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    AnchorSet out;
    for (Index s = 0; s < std::min(sources, targets); ++s) {
        if (rng.uniform() >= keep) continue;
        out.insert(s, perm[s], rng.uniform() < hard_fraction ? Tier::hard : Tier::normal);
    }
    return out;
}

inline Matrix random_matrix(SplitMix64& rng, Eigen::Index m, Eigen::Index n, double lo = 0.0,
                            double hi = 1.0) {
    Matrix out(m, n);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < n; ++j) out(i, j) = lo + (hi - lo) * rng.uniform();
    return out;
}

using PairSet = std::set<std::pair<Index, Index>>;

inline PairSet hard_pairs(const AnchorSet& s) {
    PairSet out;
    for (const auto& p : s.pairs())
        if (p.tier == Tier::hard) out.emplace(p.source, p.target);
    return out;
}

inline PairSet all_pairs(const AnchorSet& s) {
    PairSet out;
    for (const auto& p : s.pairs()) out.emplace(p.source, p.target);
    return out;
}

// ---- brute-force oracles -------------------------------------------------

inline bool scan_has_triple(const KnowledgeGraph& g, Index h, Index r, Index t) {
    for (const auto& x : g.triples())
        if (x.head == h && x.relation == r && x.tail == t) return true;
    return false;
}

/// Relation adjacency by checking every relation pair against every entity.
inline std::vector<std::set<Index>> brute_relation_adjacency(const KnowledgeGraph& g) {
    const auto nr = g.relation_count();
    std::vector<std::set<Index>> adj(nr);
    auto incident = [&](Index e, Index r) {
        for (const auto& t : g.triples())
            if (t.relation == r && (t.head == e || t.tail == e)) return true;
        return false;
    };
    for (Index a = 0; a < nr; ++a) {
        for (Index b = 0; b < nr; ++b) {
            if (a == b) continue;
            for (Index e = 0; e < g.entity_count(); ++e) {
                if (incident(e, a) && incident(e, b)) {
                    adj[a].insert(b);
                    break;
                }
            }
        }
    }
    return adj;
}

/// (min relation, entity, max relation) for every unordered pair of distinct
/// triples incident to the entity.
inline std::set<std::tuple<Index, Index, Index>> brute_relation_triples(const KnowledgeGraph& g) {
    std::set<std::tuple<Index, Index, Index>> out;
    const auto& ts = g.triples();
    for (Index e = 0; e < g.entity_count(); ++e) {
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (ts[i].head != e && ts[i].tail != e) continue;
            for (std::size_t j = i + 1; j < ts.size(); ++j) {
                if (ts[j].head != e && ts[j].tail != e) continue;
                const auto a = std::min(ts[i].relation, ts[j].relation);
                const auto b = std::max(ts[i].relation, ts[j].relation);
                out.emplace(a, e, b);
            }
        }
    }
    return out;
}

/// Hard entity pairs after triple-pair enumeration over all anchor pairs.
inline PairSet brute_hard_entities(const KnowledgeGraph& g, const KnowledgeGraph& gp,
                                   const AnchorSet& ye, const AnchorSet& yr) {
    PairSet hard = hard_pairs(ye);
    const auto ents = ye.pairs();
    const auto rels = yr.pairs();
    for (const auto& p : ents)
        for (const auto& q : ents)
            for (const auto& r : rels)
                if (scan_has_triple(g, p.source, r.source, q.source) &&
                    scan_has_triple(gp, p.target, r.target, q.target)) {
                    hard.emplace(p.source, p.target);
                    hard.emplace(q.source, q.target);
                }
    return hard;
}

inline PairSet brute_hard_relations(const KnowledgeGraph& g, const KnowledgeGraph& gp,
                                    const AnchorSet& ye, const AnchorSet& yr) {
    PairSet hard = hard_pairs(yr);
    std::vector<AnchorPair> ents;
    for (const auto& p : ye.pairs())
        if (p.tier == Tier::hard) ents.push_back(p);
    for (const auto& r : yr.pairs())
        for (const auto& p : ents)
            for (const auto& q : ents)
                if (scan_has_triple(g, p.source, r.source, q.source) &&
                    scan_has_triple(gp, p.target, r.target, q.target)) {
                    hard.emplace(r.source, r.target);
                }
    return hard;
}

inline bool scan_adjacent(const KnowledgeGraph& g, Index a, Index b) {
    for (const auto& t : g.triples())
        if ((t.head == a && t.tail == b) || (t.head == b && t.tail == a)) return true;
    return false;
}

/// Orientations (0 out, 1 in) of triples joining a to b carrying relation r.
inline std::set<int> scan_orientations(const KnowledgeGraph& g, Index a, Index b, Index r) {
    std::set<int> out;
    for (const auto& t : g.triples()) {
        if (t.relation != r) continue;
        if (t.head == a && t.tail == b) out.insert(0);
        if (t.tail == a && t.head == b) out.insert(1);
    }
    return out;
}

/// Situation enumerator for the entity awards.
inline std::pair<Matrix, Matrix> brute_entity_awards(const KnowledgeGraph& g, const KnowledgeGraph& gp,
                                                     const AnchorSet& ye, const AnchorSet& yr,
                                                     double alpha) {
    Matrix stru = Matrix::Zero(g.entity_count(), gp.entity_count());
    Matrix rel = stru;
    const auto ents = ye.pairs();
    const auto rels = yr.pairs();
    for (const auto& cell : ents) {
        for (const auto& nb : ents) {
            if (!scan_adjacent(g, cell.source, nb.source) || !scan_adjacent(gp, cell.target, nb.target)) {
                continue;
            }
            const bool both_hard = cell.tier == Tier::hard && nb.tier == Tier::hard;
            const double gain = both_hard ? alpha : 1.0;
            stru(cell.source, cell.target) += gain;
            bool connected = false;
            for (const auto& r : rels) {
                const auto a = scan_orientations(g, cell.source, nb.source, r.source);
                const auto b = scan_orientations(gp, cell.target, nb.target, r.target);
                for (int o : a)
                    if (b.contains(o)) connected = true;
            }
            if (connected) rel(cell.source, cell.target) += gain;
        }
    }
    return {stru, rel};
}

inline Matrix brute_relation_award(const KnowledgeGraph& g, const KnowledgeGraph& gp,
                                   const AnchorSet& yr, double alpha) {
    const auto adj = brute_relation_adjacency(g);
    const auto adjp = brute_relation_adjacency(gp);
    Matrix s = Matrix::Zero(g.relation_count(), gp.relation_count());
    const auto rels = yr.pairs();
    for (const auto& cell : rels)
        for (const auto& nb : rels)
            if (adj[cell.source].contains(nb.source) && adjp[cell.target].contains(nb.target)) {
                s(cell.source, cell.target) +=
                    (cell.tier == Tier::hard && nb.tier == Tier::hard) ? alpha : 1.0;
            }
    return s;
}

/// Exhaustive minimum-cost injective assignment of the smaller side.
inline double brute_min_matching_cost(const Matrix& cost) {
    const bool t = cost.rows() > cost.cols();
    const Matrix c = t ? Matrix(cost.transpose()) : cost;
    const auto m = c.rows();
    const auto n = c.cols();
    std::vector<bool> used(n, false);
    double best = std::numeric_limits<double>::infinity();
    auto rec = [&](auto&& self, Eigen::Index row, double acc) -> void {
        if (acc >= best) return;
        if (row == m) {
            best = acc;
            return;
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            if (used[j]) continue;
            used[j] = true;
            self(self, row + 1, acc + c(row, j));
            used[j] = false;
        }
    };
    rec(rec, 0, 0.0);
    return best;
}

/// 1-based rank of target after a full sort by (plan desc, cost asc, index).
inline std::size_t brute_rank(const Matrix& plan, const Matrix& cost, Index src, Index target) {
    std::vector<Index> order(plan.cols());
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        return std::make_tuple(-plan(src, a), cost(src, a), a) <
               std::make_tuple(-plan(src, b), cost(src, b), b);
    });
    return static_cast<std::size_t>(std::find(order.begin(), order.end(), target) - order.begin()) + 1;
}

class TempDir {
public:
    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        std::random_device device;
        SplitMix64 rng((std::uint64_t{device()} << 32) ^ device());
        for (;;) {
            path_ = base / ("erem-test-" + std::to_string(rng()));
            if (std::filesystem::create_directory(path_)) break;
        }
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::string operator/(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

}  // namespace erem::test
