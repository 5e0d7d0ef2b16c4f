#include "erem/embedding.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "erem/error.hpp"
#include "erem/rng.hpp"

namespace erem {

namespace {

constexpr std::array<char, 8> kMagic = {'E', 'R', 'E', 'M', 'E', 'M', 'B', '1'};

std::uint32_t read_u32_le(std::istream& in) {
    std::array<unsigned char, 4> b{};
    if (!in.read(reinterpret_cast<char*>(b.data()), 4)) {
        throw FormatError("EREMEMB1: truncated header");
    }
    return std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) |
           (std::uint32_t{b[3]} << 24);
}

void write_u32_le(std::ostream& out, std::uint32_t v) {
    const std::array<char, 4> b = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                                   static_cast<char>((v >> 16) & 0xFF),
                                   static_cast<char>((v >> 24) & 0xFF)};
    out.write(b.data(), 4);
}

void check_count(std::size_t actual, std::optional<std::size_t> expected) {
    if (expected && actual != *expected) {
        throw ConsistencyError("embedding table holds " + std::to_string(actual) +
                               " rows, expected " + std::to_string(*expected));
    }
}

EmbeddingTable load_binary(std::istream& in, std::optional<std::size_t> expected_count) {
    const std::uint32_t count = read_u32_le(in);
    const std::uint32_t dim = read_u32_le(in);
    if (dim == 0) throw FormatError("EREMEMB1: dim must be positive");
    check_count(count, expected_count);

    Matrix rows(count, dim);
    std::vector<unsigned char> buf(static_cast<std::size_t>(dim) * 4);
    for (std::uint32_t i = 0; i < count; ++i) {
        if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
            throw FormatError("EREMEMB1: truncated at row " + std::to_string(i));
        }
        for (std::uint32_t k = 0; k < dim; ++k) {
            const unsigned char* p = buf.data() + 4 * k;
            const std::uint32_t bits = std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) |
                                       (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
            rows(i, k) = static_cast<double>(std::bit_cast<float>(bits));
        }
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw FormatError("EREMEMB1: trailing bytes after " + std::to_string(count) + " rows");
    }
    return EmbeddingTable(std::move(rows));
}

EmbeddingTable load_text(std::istream& in, std::optional<std::size_t> expected_count) {
    std::vector<std::pair<std::size_t, std::vector<double>>> parsed;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
            throw ParseError("embedding text", number, "expected 'index<TAB>values'");
        }
        std::size_t index = 0;
        {
            auto [ptr, ec] = std::from_chars(line.data(), line.data() + tab, index);
            if (tab == 0 || ec != std::errc{} || ptr != line.data() + tab) {
                throw ParseError("embedding text", number, "bad row index");
            }
        }
        std::vector<double> values;
        std::string_view rest(line.data() + tab + 1, line.size() - tab - 1);
        while (true) {
            const auto comma = rest.find(',');
            const auto token = rest.substr(0, comma);
            // strtod accepts "nan"/"inf" so they reach the finiteness check below.
            std::string owned(token);
            char* end = nullptr;
            const double v = std::strtod(owned.c_str(), &end);
            if (owned.empty() || end != owned.c_str() + owned.size()) {
                throw ParseError("embedding text", number, "bad value '" + owned + "'");
            }
            if (!std::isfinite(v)) {
                throw DataError("embedding text line " + std::to_string(number) +
                                ": non-finite value");
            }
            values.push_back(v);
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        parsed.emplace_back(index, std::move(values));
    }
    if (parsed.empty()) {
        check_count(0, expected_count);
        throw FormatError("embedding text: no rows");
    }
    const std::size_t dim = parsed.front().second.size();
    std::size_t count = 0;
    for (const auto& [index, values] : parsed) count = std::max(count, index + 1);
    if (parsed.size() != count) {
        throw ConsistencyError("embedding text: row indices are not exactly 0.." +
                               std::to_string(count - 1));
    }
    check_count(count, expected_count);
    Matrix rows(count, dim);
    std::vector<bool> filled(count, false);
    for (const auto& [index, values] : parsed) {
        if (values.size() != dim) {
            throw ConsistencyError("embedding text: row " + std::to_string(index) + " has " +
                                   std::to_string(values.size()) + " values, expected " +
                                   std::to_string(dim));
        }
        if (filled[index]) {
            throw ConsistencyError("embedding text: duplicate row " + std::to_string(index));
        }
        filled[index] = true;
        for (std::size_t k = 0; k < dim; ++k) rows(index, k) = values[k];
    }
    return EmbeddingTable(std::move(rows));
}

double dot(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
    // Fixed sequential order: identical rows give dot == squared norm bit for bit.
    double s = 0.0;
    const double* x = a.data() + i * a.cols();
    const double* y = b.data() + j * b.cols();
    for (Eigen::Index k = 0; k < a.cols(); ++k) s += x[k] * y[k];
    return s;
}

}  // namespace

EmbeddingTable::EmbeddingTable(Matrix rows) : values_(std::move(rows)) {
    if (values_.cols() == 0) throw ArgumentError("embedding dim must be positive");
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
        if (!values_.row(i).allFinite()) {
            throw DataError("embedding row " + std::to_string(i) + " has a non-finite entry");
        }
    }
}

EmbeddingTable load_embedding_table(std::istream& in, std::optional<std::size_t> expected_count) {
    std::array<char, 8> head{};
    in.read(head.data(), head.size());
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got == head.size() && head == kMagic) return load_binary(in, expected_count);

    // Not binary: the fallback must look like text ("<digits>\t...").
    if (got > 0 && !(head[0] >= '0' && head[0] <= '9')) {
        throw FormatError("embedding file: magic mismatch (expected EREMEMB1 or text rows)");
    }
    std::string text(head.data(), got);
    text.append(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    std::istringstream rest(text);
    return load_text(rest, expected_count);
}

EmbeddingTable load_embedding_table(const std::string& path,
                                    std::optional<std::size_t> expected_count) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open embedding file " + path);
    try {
        return load_embedding_table(in, expected_count);
    } catch (const ConsistencyError& e) {
        throw ConsistencyError(path + ": " + e.what());
    } catch (const FormatError& e) {
        throw FormatError(path + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

void write_embedding_binary(std::ostream& out, const EmbeddingTable& table) {
    out.write(kMagic.data(), kMagic.size());
    write_u32_le(out, static_cast<std::uint32_t>(table.rows()));
    write_u32_le(out, static_cast<std::uint32_t>(table.dim()));
    const Matrix& v = table.values();
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        for (Eigen::Index k = 0; k < v.cols(); ++k) {
            write_u32_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v(i, k))));
        }
    }
}

void write_embedding_text(std::ostream& out, const Matrix& rows) {
    std::array<char, 64> buf{};
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        out << i << '\t';
        for (Eigen::Index k = 0; k < rows.cols(); ++k) {
            if (k) out << ',';
            // Shortest round-trip representation.
            auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), rows(i, k));
            out.write(buf.data(), ptr - buf.data());
        }
        out << '\n';
    }
}

CostMatrix cosine_cost_matrix(const EmbeddingTable& src, const EmbeddingTable& tgt) {
    if (src.dim() != tgt.dim()) {
        throw ArgumentError("cosine cost: dimension mismatch (" + std::to_string(src.dim()) +
                            " vs " + std::to_string(tgt.dim()) + ")");
    }
    const Matrix& a = src.values();
    const Matrix& b = tgt.values();
    auto squared_norms = [](const Matrix& m, const char* side) {
        Vector out(m.rows());
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            out[i] = dot(m, i, m, i);
            if (!(out[i] > 0.0)) {
                throw DataError(std::string("cosine cost: zero-norm ") + side + " row " +
                                std::to_string(i));
            }
        }
        return out;
    };
    const Vector na = squared_norms(a, "source");
    const Vector nb = squared_norms(b, "target");

    CostMatrix cost(a.rows(), b.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < b.rows(); ++j) {
            const double cosine = dot(a, i, b, j) / std::sqrt(na[i] * nb[j]);
            cost(i, j) = 1.0 - std::clamp(cosine, -1.0, 1.0);
        }
    }
    return cost;
}

EmbeddingTable synth_embedding_table(std::size_t count, const SynthEmbeddingOptions& options,
                                     std::optional<TwinOf> twin_of) {
    if (options.dim < 2) throw ArgumentError("synthetic embeddings need dim >= 2");
    if (!(options.noise_sigma >= 0.0) || !std::isfinite(options.noise_sigma)) {
        throw ArgumentError("noise_sigma must be a finite non-negative number");
    }
    SplitMix64 rng(options.seed);
    Matrix rows(count, options.dim);

    if (!twin_of) {
        for (std::size_t i = 0; i < count; ++i) {
            double norm2 = 0.0;
            do {
                norm2 = 0.0;
                for (std::size_t k = 0; k < options.dim; ++k) {
                    const double g = rng.gaussian();
                    rows(i, k) = g;
                    norm2 += g * g;
                }
            } while (norm2 < 1e-12);
            const double inv = 1.0 / std::sqrt(norm2);
            for (std::size_t k = 0; k < options.dim; ++k) {
                rows(i, k) = static_cast<float>(rows(i, k) * inv);
            }
        }
        return EmbeddingTable(std::move(rows));
    }

    const auto& base = twin_of->base;
    const auto perm = twin_of->permutation;
    if (perm.size() != count || base.rows() != count) {
        throw ArgumentError("twin permutation must have one entry per row of the base table");
    }
    if (base.dim() != options.dim) throw ArgumentError("twin dim differs from base table dim");
    std::vector<bool> hit(count, false);
    for (const auto p : perm) {
        if (p >= count || hit[p]) throw ArgumentError("twin permutation is not a bijection");
        hit[p] = true;
    }
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t k = 0; k < options.dim; ++k) {
            double v = base.values()(perm[i], k);
            if (options.noise_sigma > 0.0) v += options.noise_sigma * rng.gaussian();
            rows(i, k) = static_cast<float>(v);
        }
        if (rows.row(i).squaredNorm() == 0.0) rows(i, 0) = 1e-6f;
    }
    return EmbeddingTable(std::move(rows));
}

EmbeddingTable synth_embedding_table(const KnowledgeGraph& g, EmbeddingKind kind,
                                     const SynthEmbeddingOptions& options,
                                     std::optional<TwinOf> twin_of) {
    const std::size_t count =
        kind == EmbeddingKind::entity ? g.entity_count() : g.relation_count();
    return synth_embedding_table(count, options, twin_of);
}

}  // namespace erem
