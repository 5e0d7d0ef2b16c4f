#include "erem/anchors.hpp"

#include <algorithm>
#include <charconv>
#include <string>

#include "erem/error.hpp"

namespace erem {

AnchorSet::InsertResult AnchorSet::insert(Index source, Index target, Tier tier) {
    const auto s = by_source_.find(source);
    const auto t = by_target_.find(target);
    if (s != by_source_.end() || t != by_target_.end()) {
        if (s == by_source_.end() || s->second.target != target) return InsertResult::conflict;
        if (tier == Tier::hard && s->second.tier == Tier::normal) {
            s->second.tier = Tier::hard;
            ++hard_count_;
            return InsertResult::upgraded;
        }
        return InsertResult::unchanged;
    }
    by_source_.emplace(source, Entry{target, tier});
    by_target_.emplace(target, source);
    if (tier == Tier::hard) ++hard_count_;
    return InsertResult::inserted;
}

bool AnchorSet::set_hard(Index source, Index target) {
    const auto s = by_source_.find(source);
    if (s == by_source_.end() || s->second.target != target) return false;
    if (s->second.tier == Tier::normal) {
        s->second.tier = Tier::hard;
        ++hard_count_;
    }
    return true;
}

bool AnchorSet::contains(Index source, Index target) const {
    const auto s = by_source_.find(source);
    return s != by_source_.end() && s->second.target == target;
}

bool AnchorSet::is_hard(Index source, Index target) const {
    const auto s = by_source_.find(source);
    return s != by_source_.end() && s->second.target == target && s->second.tier == Tier::hard;
}

std::optional<Index> AnchorSet::target_of(Index source) const {
    const auto s = by_source_.find(source);
    if (s == by_source_.end()) return std::nullopt;
    return s->second.target;
}

std::optional<Index> AnchorSet::source_of(Index target) const {
    const auto t = by_target_.find(target);
    if (t == by_target_.end()) return std::nullopt;
    return t->second;
}

std::vector<AnchorPair> AnchorSet::pairs() const {
    std::vector<AnchorPair> out;
    out.reserve(by_source_.size());
    for (const auto& [src, entry] : by_source_) out.push_back({src, entry.target, entry.tier});
    return out;
}

AnchorSet AnchorSet::hard_subset() const {
    AnchorSet out;
    for (const auto& [src, entry] : by_source_) {
        if (entry.tier == Tier::hard) out.insert(src, entry.target, Tier::hard);
    }
    return out;
}

AnchorSet init_anchor_set(const CostMatrix& cost, double threshold) {
    struct Candidate {
        Index row;
        Index col;
        double cost;
    };
    std::vector<Candidate> candidates;
    for (Eigen::Index i = 0; i < cost.rows(); ++i) {
        if (cost.cols() == 0) break;
        Eigen::Index best = 0;
        bool unique = true;
        for (Eigen::Index j = 1; j < cost.cols(); ++j) {
            if (cost(i, j) < cost(i, best)) {
                best = j;
                unique = true;
            } else if (cost(i, j) == cost(i, best)) {
                unique = false;
            }
        }
        if (unique && cost(i, best) < threshold) {
            candidates.push_back({static_cast<Index>(i), static_cast<Index>(best), cost(i, best)});
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.cost < b.cost; });
    AnchorSet anchors;
    for (const auto& c : candidates) anchors.insert(c.row, c.col);
    return anchors;
}

namespace {

void check_range(const AnchorSet& set, std::size_t sources, std::size_t targets, const char* what) {
    for (const auto& p : set.pairs()) {
        if (p.source >= sources || p.target >= targets) {
            throw ArgumentError(std::string(what) + " anchor (" + std::to_string(p.source) + ", " +
                                std::to_string(p.target) + ") is out of graph range");
        }
    }
}

}  // namespace

AnchorSet derive_hard_entity_anchors(const KnowledgeGraph& g, const KnowledgeGraph& g_prime,
                                     const AnchorSet& entities, const AnchorSet& relations) {
    check_range(entities, g.entity_count(), g_prime.entity_count(), "entity");
    check_range(relations, g.relation_count(), g_prime.relation_count(), "relation");
    AnchorSet result = entities;
    for (const auto& t : g.triples()) {
        const auto h2 = entities.target_of(t.head);
        if (!h2) continue;
        const auto t2 = entities.target_of(t.tail);
        if (!t2) continue;
        const auto r2 = relations.target_of(t.relation);
        if (!r2) continue;
        if (g_prime.has_triple(*h2, *r2, *t2)) {
            result.set_hard(t.head, *h2);
            result.set_hard(t.tail, *t2);
        }
    }
    return result;
}

AnchorSet derive_hard_relation_anchors(const KnowledgeGraph& g, const KnowledgeGraph& g_prime,
                                       const AnchorSet& hard_entities,
                                       const AnchorSet& relations) {
    check_range(hard_entities, g.entity_count(), g_prime.entity_count(), "entity");
    check_range(relations, g.relation_count(), g_prime.relation_count(), "relation");
    AnchorSet result = relations;
    for (const auto& t : g.triples()) {
        const auto r2 = relations.target_of(t.relation);
        if (!r2) continue;
        const auto h2 = hard_entities.target_of(t.head);
        if (!h2 || !hard_entities.is_hard(t.head, *h2)) continue;
        const auto t2 = hard_entities.target_of(t.tail);
        if (!t2 || !hard_entities.is_hard(t.tail, *t2)) continue;
        if (g_prime.has_triple(*h2, *r2, *t2)) result.set_hard(t.relation, *r2);
    }
    return result;
}

AnchorSet promote_anchors(const Matrix& plan, const AnchorSet& existing, double epsilon) {
    const auto m = plan.rows();
    const auto n = plan.cols();
    AnchorSet result = existing;
    if (m == 0 || n == 0) return result;
    const double threshold = 1.0 / static_cast<double>(std::max(m, n)) - epsilon;

    struct Candidate {
        Index row;
        Index col;
        double mass;
    };
    std::vector<Candidate> candidates;
    for (Eigen::Index i = 0; i < m; ++i) {
        Eigen::Index best = 0;
        const double mass = plan.row(i).maxCoeff(&best);
        if (mass > threshold) {
            candidates.push_back({static_cast<Index>(i), static_cast<Index>(best), mass});
        }
    }
    // Strongest evidence claims a contested column first.
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.mass > b.mass; });
    for (const auto& c : candidates) result.insert(c.row, c.col);
    return result;
}

void write_anchor_dump(std::ostream& out, const AnchorSet& anchors, const IdTable& source,
                       const IdTable& target) {
    for (const auto& p : anchors.pairs()) {
        out << source.id(p.source) << '\t' << target.id(p.target) << '\t'
            << (p.tier == Tier::hard ? "hard" : "normal") << '\n';
    }
}

std::vector<RawAnchor> read_anchor_dump(std::istream& in, const std::string& source_name) {
    std::vector<RawAnchor> out;
    std::string line;
    std::size_t number = 0;
    auto parse_id = [&](std::string_view text) {
        RawId v = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
            throw ParseError(source_name, number, "bad id '" + std::string(text) + "'");
        }
        return v;
    };
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto a = line.find('\t');
        const auto b = a == std::string::npos ? a : line.find('\t', a + 1);
        if (b == std::string::npos || line.find('\t', b + 1) != std::string::npos) {
            throw ParseError(source_name, number, "expected 'src<TAB>tgt<TAB>tier'");
        }
        const std::string_view view(line);
        RawAnchor anchor{parse_id(view.substr(0, a)), parse_id(view.substr(a + 1, b - a - 1))};
        const auto tier = view.substr(b + 1);
        if (tier == "hard") {
            anchor.tier = Tier::hard;
        } else if (tier != "normal") {
            throw ParseError(source_name, number, "tier must be 'normal' or 'hard'");
        }
        out.push_back(anchor);
    }
    return out;
}

}  // namespace erem
