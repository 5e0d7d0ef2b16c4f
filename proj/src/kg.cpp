#include "erem/kg.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>

#include "erem/error.hpp"

namespace erem {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> cols;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find('\t', start);
        if (pos == std::string_view::npos) {
            cols.push_back(line.substr(start));
            return cols;
        }
        cols.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

RawId parse_raw_id(std::string_view text, const std::string& source, std::size_t line) {
    RawId value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc{} || ptr != end) {
        throw ParseError(source, line, "expected a non-negative integer id, got '" +
                                           std::string(text) + "'");
    }
    return value;
}

// Calls fn(line_number, line) for every non-empty line, trailing CR stripped.
template <typename Fn>
void for_each_line(std::istream& in, Fn&& fn) {
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        fn(number, std::string_view(line));
    }
}

}  // namespace

IdTable::IdTable(std::vector<RawId> ids, std::vector<std::string> names)
    : ids_(std::move(ids)), names_(std::move(names)) {
    if (ids_.size() != names_.size()) {
        throw ArgumentError("id table: " + std::to_string(ids_.size()) + " ids but " +
                            std::to_string(names_.size()) + " names");
    }
    index_.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (!index_.emplace(ids_[i], static_cast<Index>(i)).second) {
            throw ArgumentError("id table: duplicate id " + std::to_string(ids_[i]));
        }
    }
}

Index IdTable::index_of(RawId id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) throw ReferentialError("unknown id " + std::to_string(id));
    return it->second;
}

KnowledgeGraph::KnowledgeGraph(IdTable entities, IdTable relations, std::vector<Triple> triples)
    : entities_(std::move(entities)), relations_(std::move(relations)) {
    const auto n_ent = entities_.size();
    const auto n_rel = relations_.size();
    std::set<Triple> seen;
    triples_.reserve(triples.size());
    for (const auto& t : triples) {
        if (t.head >= n_ent || t.tail >= n_ent || t.relation >= n_rel) {
            throw ArgumentError("triple (" + std::to_string(t.head) + ", " +
                                std::to_string(t.relation) + ", " + std::to_string(t.tail) +
                                ") is out of range");
        }
        if (seen.insert(t).second) triples_.push_back(t);
    }
    sorted_.assign(seen.begin(), seen.end());

    out_adj_.resize(n_ent);
    in_adj_.resize(n_ent);
    for (const auto& t : triples_) {
        out_adj_[t.head].push_back({t.relation, t.tail});
        in_adj_[t.tail].push_back({t.relation, t.head});
    }
}

std::span<const Edge> KnowledgeGraph::out_edges(Index e) const {
    if (e >= out_adj_.size()) throw ArgumentError("entity index out of range");
    return out_adj_[e];
}

std::span<const Edge> KnowledgeGraph::in_edges(Index e) const {
    if (e >= in_adj_.size()) throw ArgumentError("entity index out of range");
    return in_adj_[e];
}

std::size_t KnowledgeGraph::degree(Index e) const {
    return out_edges(e).size() + in_edges(e).size();
}

bool KnowledgeGraph::has_triple(Index head, Index relation, Index tail) const {
    return std::binary_search(sorted_.begin(), sorted_.end(), Triple{head, relation, tail});
}

RelationGraph::RelationGraph(std::size_t relation_count, std::vector<RelationTriple> triples)
    : triples_(std::move(triples)), adj_(relation_count) {
    for (const auto& t : triples_) {
        if (t.first >= relation_count || t.second >= relation_count) {
            throw ArgumentError("relation triple references an unknown relation");
        }
        if (t.first == t.second) continue;
        adj_[t.first].push_back(t.second);
        adj_[t.second].push_back(t.first);
    }
    for (auto& list : adj_) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
}

std::span<const Index> RelationGraph::neighbors(Index r) const {
    if (r >= adj_.size()) throw ArgumentError("relation index out of range");
    return adj_[r];
}

IdTable parse_id_map(std::istream& in, const std::string& source_name) {
    std::vector<RawId> ids;
    std::vector<std::string> names;
    std::unordered_map<RawId, std::size_t> first_line;
    for_each_line(in, [&](std::size_t line, std::string_view text) {
        const auto cols = split_tabs(text);
        if (cols.size() != 2) {
            throw ParseError(source_name, line,
                             "expected 2 tab-separated columns, got " + std::to_string(cols.size()));
        }
        const auto id = parse_raw_id(cols[0], source_name, line);
        if (!first_line.emplace(id, line).second) {
            throw ParseError(source_name, line, "duplicate id " + std::to_string(id));
        }
        ids.push_back(id);
        names.emplace_back(cols[1]);
    });
    return IdTable(std::move(ids), std::move(names));
}

std::vector<Triple> parse_triples(std::istream& in, const IdTable& entities,
                                  const IdTable& relations, const std::string& source_name) {
    std::vector<Triple> triples;
    for_each_line(in, [&](std::size_t line, std::string_view text) {
        const auto cols = split_tabs(text);
        if (cols.size() != 3) {
            throw ParseError(source_name, line,
                             "expected 3 tab-separated columns, got " + std::to_string(cols.size()));
        }
        const RawId h = parse_raw_id(cols[0], source_name, line);
        const RawId r = parse_raw_id(cols[1], source_name, line);
        const RawId t = parse_raw_id(cols[2], source_name, line);
        auto lookup = [&](const IdTable& table, RawId id, const char* what) {
            if (!table.contains(id)) {
                throw ReferentialError(source_name + ":" + std::to_string(line) + ": unknown " +
                                       what + " id " + std::to_string(id));
            }
            return table.index_of(id);
        };
        triples.push_back({lookup(entities, h, "entity"), lookup(relations, r, "relation"),
                           lookup(entities, t, "entity")});
    });
    return triples;
}

KnowledgeGraph parse_graph(std::istream& entity_ids, std::istream& relation_ids,
                           std::istream& triples) {
    auto entities = parse_id_map(entity_ids, "ent_ids");
    auto relations = parse_id_map(relation_ids, "rel_ids");
    auto parsed = parse_triples(triples, entities, relations, "triples");
    return KnowledgeGraph(std::move(entities), std::move(relations), std::move(parsed));
}

KnowledgeGraph load_graph_bundle(const std::string& directory) {
    namespace fs = std::filesystem;
    auto open = [&](const char* file) {
        const auto path = fs::path(directory) / file;
        std::ifstream in(path, std::ios::binary);
        if (!in) throw FormatError("cannot open " + path.string());
        return in;
    };
    auto ent = open("ent_ids");
    auto rel = open("rel_ids");
    auto tri = open("triples");
    auto entities = parse_id_map(ent, (fs::path(directory) / "ent_ids").string());
    auto relations = parse_id_map(rel, (fs::path(directory) / "rel_ids").string());
    auto parsed = parse_triples(tri, entities, relations, (fs::path(directory) / "triples").string());
    return KnowledgeGraph(std::move(entities), std::move(relations), std::move(parsed));
}

std::vector<Neighbor> one_hop_entity_neighbors(const KnowledgeGraph& g, Index e) {
    if (e >= g.entity_count()) {
        throw ArgumentError("entity index " + std::to_string(e) + " out of range");
    }
    std::vector<Neighbor> result;
    result.reserve(g.degree(e));
    for (const auto& edge : g.out_edges(e)) {
        result.push_back({edge.relation, edge.node, Orientation::outgoing});
    }
    for (const auto& edge : g.in_edges(e)) {
        result.push_back({edge.relation, edge.node, Orientation::incoming});
    }
    std::sort(result.begin(), result.end());
    return result;
}

RelationGraph kgt_transform(const KnowledgeGraph& g) {
    // Per entity, count incident triples per relation; any two distinct relations
    // co-occur, and a relation pairs with itself when it appears on two triples.
    std::vector<std::vector<Index>> incident(g.entity_count());
    for (const auto& t : g.triples()) {
        incident[t.head].push_back(t.relation);
        if (t.tail != t.head) incident[t.tail].push_back(t.relation);
    }

    std::vector<RelationTriple> out;
    for (Index e = 0; e < incident.size(); ++e) {
        auto& rels = incident[e];
        if (rels.size() < 2) continue;
        std::sort(rels.begin(), rels.end());
        std::vector<std::pair<Index, std::size_t>> counts;
        for (const auto r : rels) {
            if (counts.empty() || counts.back().first != r) counts.emplace_back(r, 0);
            ++counts.back().second;
        }
        for (std::size_t a = 0; a < counts.size(); ++a) {
            if (counts[a].second >= 2) out.push_back({counts[a].first, e, counts[a].first});
            for (std::size_t b = a + 1; b < counts.size(); ++b) {
                out.push_back({counts[a].first, e, counts[b].first});
            }
        }
    }
    return RelationGraph(g.relation_count(), std::move(out));
}

std::span<const Index> one_hop_relation_neighbors(const RelationGraph& rkg, Index r) {
    return rkg.neighbors(r);
}

}  // namespace erem
