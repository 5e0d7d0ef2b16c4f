#include "erem/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "erem/error.hpp"
#include "erem/rng.hpp"

namespace erem {

namespace {

enum Stream : std::uint64_t {
    kTriples = 1,
    kEntityPerm = 2,
    kRelationPerm = 3,
    kDropout = 4,
    kEntityBase = 5,
    kEntityTwin = 6,
    kRelationBase = 7,
    kRelationTwin = 8,
};

std::string render_name(const std::string& scheme, const char* side, const char* kind,
                        std::size_t index) {
    std::string out = scheme;
    auto replace_all = [&](const std::string& key, const std::string& value) {
        for (auto pos = out.find(key); pos != std::string::npos; pos = out.find(key, pos + value.size())) {
            out.replace(pos, key.size(), value);
        }
    };
    replace_all("{side}", side);
    replace_all("{kind}", kind);
    replace_all("{index}", std::to_string(index));
    return out;
}

std::vector<Index> shuffled_identity(std::size_t n, std::uint64_t seed) {
    std::vector<Index> perm(n);
    std::iota(perm.begin(), perm.end(), Index{0});
    SplitMix64 rng(seed);
    // Fisher-Yates with the portable bounded draw.
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

std::vector<Triple> sample_triples(const SynthSpec& spec) {
    const std::uint64_t e = spec.entity_count;
    const std::uint64_t r = spec.relation_count;
    const std::uint64_t capacity = e * (e - 1) * r;
    SplitMix64 rng(derive_seed(spec.seed, kTriples));
    std::vector<Triple> out;
    out.reserve(spec.triple_count);

    if (spec.triple_count * 2 > capacity) {
        // Dense request: pick from the full enumeration.
        std::vector<Triple> all;
        all.reserve(capacity);
        for (Index h = 0; h < e; ++h)
            for (Index t = 0; t < e; ++t)
                if (h != t)
                    for (Index rel = 0; rel < r; ++rel) all.push_back({h, rel, t});
        for (std::size_t i = 0; i < spec.triple_count; ++i) {
            const auto j = i + static_cast<std::size_t>(rng.below(all.size() - i));
            std::swap(all[i], all[j]);
            out.push_back(all[i]);
        }
        return out;
    }

    std::set<Triple> seen;
    while (out.size() < spec.triple_count) {
        const auto h = static_cast<Index>(rng.below(e));
        const auto t = static_cast<Index>(rng.below(e));
        const auto rel = static_cast<Index>(rng.below(r));
        if (h == t) continue;
        const Triple triple{h, rel, t};
        if (seen.insert(triple).second) out.push_back(triple);
    }
    return out;
}

std::vector<Index> inverse(const std::vector<Index>& perm) {
    std::vector<Index> inv(perm.size());
    for (Index i = 0; i < perm.size(); ++i) inv[perm[i]] = i;
    return inv;
}

void write_id_map(const std::filesystem::path& path, const IdTable& table) {
    std::ofstream out(path, std::ios::binary);
    for (std::size_t i = 0; i < table.size(); ++i) {
        out << table.id(static_cast<Index>(i)) << '\t' << table.name(static_cast<Index>(i)) << '\n';
    }
    if (!out) throw FormatError("failed writing " + path.string());
}

void write_graph(const std::filesystem::path& dir, const KnowledgeGraph& g,
                 const EmbeddingTable& ent, const EmbeddingTable& rel) {
    std::filesystem::create_directories(dir);
    write_id_map(dir / "ent_ids", g.entities());
    write_id_map(dir / "rel_ids", g.relations());
    {
        std::ofstream out(dir / "triples", std::ios::binary);
        for (const auto& t : g.triples()) {
            out << g.entities().id(t.head) << '\t' << g.relations().id(t.relation) << '\t'
                << g.entities().id(t.tail) << '\n';
        }
        if (!out) throw FormatError("failed writing " + (dir / "triples").string());
    }
    {
        std::ofstream out(dir / "ent_emb.bin", std::ios::binary);
        write_embedding_binary(out, ent);
    }
    {
        std::ofstream out(dir / "rel_emb.bin", std::ios::binary);
        write_embedding_binary(out, rel);
    }
}

}  // namespace

void validate(const SynthSpec& spec) {
    if (spec.entity_count < 2) throw ArgumentError("synth: entity_count must be >= 2");
    if (spec.relation_count < 1) throw ArgumentError("synth: relation_count must be >= 1");
    if (spec.triple_count > spec.entity_count * spec.entity_count) {
        throw ArgumentError("synth: triple_count exceeds entity_count^2");
    }
    if (spec.triple_count > spec.entity_count * (spec.entity_count - 1) * spec.relation_count) {
        throw ArgumentError("synth: more triples requested than distinct non-loop triples exist");
    }
    if (spec.embedding_dim < 2) throw ArgumentError("synth: embedding_dim must be >= 2");
    if (!(spec.embedding_noise_sigma >= 0.0) || !std::isfinite(spec.embedding_noise_sigma)) {
        throw ArgumentError("synth: embedding_noise_sigma must be finite and non-negative");
    }
    if (!(spec.triple_dropout >= 0.0 && spec.triple_dropout < 1.0)) {
        throw ArgumentError("synth: triple_dropout must lie in [0, 1)");
    }
}

SynthPair generate_pair(const SynthSpec& spec) {
    validate(spec);
    const std::size_t ne = spec.entity_count;
    const std::size_t nr = spec.relation_count;

    std::vector<RawId> ent_ids(ne), rel_ids(nr), ent_ids2(ne), rel_ids2(nr);
    std::vector<std::string> ent_names(ne), rel_names(nr), ent_names2(ne), rel_names2(nr);
    for (std::size_t i = 0; i < ne; ++i) {
        ent_ids[i] = i;
        ent_ids2[i] = ne + i;
        ent_names[i] = render_name(spec.name_scheme, "src", "ent", i);
        ent_names2[i] = render_name(spec.name_scheme, "tgt", "ent", i);
    }
    for (std::size_t i = 0; i < nr; ++i) {
        rel_ids[i] = i;
        rel_ids2[i] = nr + i;
        rel_names[i] = render_name(spec.name_scheme, "src", "rel", i);
        rel_names2[i] = render_name(spec.name_scheme, "tgt", "rel", i);
    }

    const auto triples = sample_triples(spec);
    // entity_map[e] is the target index of source entity e.
    const auto entity_map = shuffled_identity(ne, derive_seed(spec.seed, kEntityPerm));
    const auto relation_map = shuffled_identity(nr, derive_seed(spec.seed, kRelationPerm));

    SplitMix64 dropout(derive_seed(spec.seed, kDropout));
    std::vector<Triple> mapped;
    mapped.reserve(triples.size());
    std::size_t dropped = 0;
    for (const auto& t : triples) {
        if (dropout.uniform() < spec.triple_dropout) {
            ++dropped;
            continue;
        }
        mapped.push_back({entity_map[t.head], relation_map[t.relation], entity_map[t.tail]});
    }
    // Target triple order follows target indices, hiding the source order.
    std::sort(mapped.begin(), mapped.end());

    KnowledgeGraph source(IdTable(std::move(ent_ids), std::move(ent_names)),
                          IdTable(std::move(rel_ids), std::move(rel_names)), triples);
    KnowledgeGraph target(IdTable(std::move(ent_ids2), std::move(ent_names2)),
                          IdTable(std::move(rel_ids2), std::move(rel_names2)), std::move(mapped));

    const SynthEmbeddingOptions ent_base{derive_seed(spec.seed, kEntityBase), spec.embedding_dim, 0.0};
    const SynthEmbeddingOptions ent_twin{derive_seed(spec.seed, kEntityTwin), spec.embedding_dim,
                                         spec.embedding_noise_sigma};
    const SynthEmbeddingOptions rel_base{derive_seed(spec.seed, kRelationBase), spec.embedding_dim, 0.0};
    const SynthEmbeddingOptions rel_twin{derive_seed(spec.seed, kRelationTwin), spec.embedding_dim,
                                         spec.embedding_noise_sigma};

    auto source_entities = synth_embedding_table(source, EmbeddingKind::entity, ent_base);
    auto source_relations = synth_embedding_table(source, EmbeddingKind::relation, rel_base);
    // Target row i copies the source row that maps onto i.
    const auto entity_inverse = inverse(entity_map);
    const auto relation_inverse = inverse(relation_map);
    auto target_entities = synth_embedding_table(target, EmbeddingKind::entity, ent_twin,
                                                 TwinOf{source_entities, entity_inverse});
    auto target_relations = synth_embedding_table(target, EmbeddingKind::relation, rel_twin,
                                                  TwinOf{source_relations, relation_inverse});

    std::vector<std::pair<Index, Index>> ent_truth(ne), rel_truth(nr);
    for (Index i = 0; i < ne; ++i) ent_truth[i] = {i, entity_map[i]};
    for (Index i = 0; i < nr; ++i) rel_truth[i] = {i, relation_map[i]};

    return SynthPair{std::move(source),
                     std::move(target),
                     std::move(source_entities),
                     std::move(target_entities),
                     std::move(source_relations),
                     std::move(target_relations),
                     GroundTruth(std::move(ent_truth)),
                     GroundTruth(std::move(rel_truth)),
                     dropped};
}

void write_bundle(const SynthPair& pair, const std::string& directory) {
    namespace fs = std::filesystem;
    const fs::path root(directory);
    write_graph(root / "source", pair.source, pair.source_entities, pair.source_relations);
    write_graph(root / "target", pair.target, pair.target_entities, pair.target_relations);
    auto write_truth = [&](const char* file, const GroundTruth& truth, const IdTable& s,
                           const IdTable& t) {
        std::ofstream out(root / file, std::ios::binary);
        for (const auto& [a, b] : truth.pairs()) out << s.id(a) << '\t' << t.id(b) << '\n';
        if (!out) throw FormatError("failed writing " + (root / file).string());
    };
    write_truth("truth_entities", pair.entity_truth, pair.source.entities(), pair.target.entities());
    write_truth("truth_relations", pair.relation_truth, pair.source.relations(),
                pair.target.relations());
}

}  // namespace erem
