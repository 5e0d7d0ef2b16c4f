#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>

#include "erem/kg.hpp"
#include "erem/matrix.hpp"

namespace erem {

/// Dense embedding vectors, one row per graph index. Rows are finite.
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    /// Throws DataError if any entry is non-finite, ArgumentError if dim == 0.
    explicit EmbeddingTable(Matrix rows);

    std::size_t rows() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(values_.cols()); }
    const Matrix& values() const noexcept { return values_; }
    auto row(Index i) const { return values_.row(i); }

private:
    Matrix values_;
};

enum class EmbeddingKind { entity, relation };

/// Reads an EREMEMB1 file, or the "index<TAB>v1,v2,..." text fallback when the
/// magic is absent. With expected_count set, the row count must match.
EmbeddingTable load_embedding_table(std::istream& in,
                                    std::optional<std::size_t> expected_count = std::nullopt);
EmbeddingTable load_embedding_table(const std::string& path,
                                    std::optional<std::size_t> expected_count = std::nullopt);

/// EREMEMB1: "EREMEMB1", u32 LE count, u32 LE dim, count*dim f32 LE row-major.
void write_embedding_binary(std::ostream& out, const EmbeddingTable& table);
/// Text fallback; also used for matrix dumps (plans, costs).
void write_embedding_text(std::ostream& out, const Matrix& rows);

/// C[i][j] = 1 - cos(src_i, tgt_j). Zero-norm rows raise DataError naming the row.
CostMatrix cosine_cost_matrix(const EmbeddingTable& src, const EmbeddingTable& tgt);

struct SynthEmbeddingOptions {
    std::uint64_t seed = 0;
    std::size_t dim = 32;
    double noise_sigma = 0.0;
};

/// Ground-truth counterpart request: row i of the result is base[permutation[i]]
/// plus N(0, noise_sigma) per component.
struct TwinOf {
    const EmbeddingTable& base;
    std::span<const Index> permutation;
};

/// Deterministic table of `count` rows. Without a twin, rows are uniform on the
/// unit sphere. All values are rounded to float so EREMEMB1 round-trips exactly.
EmbeddingTable synth_embedding_table(std::size_t count, const SynthEmbeddingOptions& options,
                                     std::optional<TwinOf> twin_of = std::nullopt);

EmbeddingTable synth_embedding_table(const KnowledgeGraph& g, EmbeddingKind kind,
                                     const SynthEmbeddingOptions& options,
                                     std::optional<TwinOf> twin_of = std::nullopt);

}  // namespace erem
