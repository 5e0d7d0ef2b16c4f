#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "erem/embedding.hpp"
#include "erem/eval.hpp"
#include "erem/kg.hpp"

namespace erem {

struct SynthSpec {
    std::size_t entity_count = 200;
    std::size_t relation_count = 20;
    std::size_t triple_count = 600;
    std::uint64_t seed = 0;
    std::size_t embedding_dim = 32;
    double embedding_noise_sigma = 0.0;
    /// Independent per-triple removal probability on the target side, in [0, 1).
    double triple_dropout = 0.0;
    /// Name pattern; "{side}", "{kind}" and "{index}" are substituted.
    std::string name_scheme = "{side}_{kind}_{index}";
};

/// Throws ArgumentError for an infeasible spec.
void validate(const SynthSpec& spec);

/// A source graph and its relabeled, thinned twin. Target raw ids are offset by
/// the source counts so the two id spaces are disjoint, as in public benchmarks.
struct SynthPair {
    KnowledgeGraph source;
    KnowledgeGraph target;
    EmbeddingTable source_entities;
    EmbeddingTable target_entities;
    EmbeddingTable source_relations;
    EmbeddingTable target_relations;
    GroundTruth entity_truth;    // (source index, target index)
    GroundTruth relation_truth;
    std::size_t dropped_triples = 0;
};

SynthPair generate_pair(const SynthSpec& spec);

/// Writes source/ and target/ bundles (ent_ids, rel_ids, triples, ent_emb.bin,
/// rel_emb.bin) plus truth_entities and truth_relations in raw ids.
void write_bundle(const SynthPair& pair, const std::string& directory);

}  // namespace erem
