#pragma once

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "erem/kg.hpp"
#include "erem/matrix.hpp"

namespace erem {

/// Reference alignment; injective in both coordinates.
class GroundTruth {
public:
    GroundTruth() = default;
    /// Throws ArgumentError when a source or target repeats.
    explicit GroundTruth(std::vector<std::pair<Index, Index>> pairs);

    const std::vector<std::pair<Index, Index>>& pairs() const noexcept { return pairs_; }
    std::size_t size() const noexcept { return pairs_.size(); }
    bool empty() const noexcept { return pairs_.empty(); }

private:
    std::vector<std::pair<Index, Index>> pairs_;
};

/// Reads "src_id<TAB>tgt_id" lines of raw ids.
std::vector<std::pair<RawId, RawId>> read_raw_pairs(std::istream& in,
                                                    const std::string& source_name = "truth");
/// Maps raw ids through the two id tables; unknown ids raise ReferentialError.
GroundTruth resolve_truth(const std::vector<std::pair<RawId, RawId>>& raw, const IdTable& source,
                          const IdTable& target);

enum class Task { EA, RA };
const char* task_name(Task task);

struct MetricsReport {
    Task task = Task::EA;
    double hits1 = 0.0;
    double hits10 = 0.0;
    double mrr = 0.0;
    std::size_t pairs_evaluated = 0;
};

/// Source index -> candidate targets, best first.
using Rankings = std::map<Index, std::vector<Index>>;

/// Targets ordered by plan value (descending), then fallback cost (ascending), then index.
std::vector<Index> rank_targets(const Matrix& plan, const Matrix& fallback_cost, Index source);

/// 1-based position rank_targets would give `target`, computed in O(n).
std::size_t target_rank(const Matrix& plan, const Matrix& fallback_cost, Index source, Index target);

/// Fraction of truth pairs whose target is within the first k entries of the
/// source's ranking. Sources without a ranking count as misses.
double hits_at_k(const Rankings& rankings, const GroundTruth& truth, std::size_t k);

/// Mean of 1/rank over truth pairs; an absent target contributes 0.
double mrr(const Rankings& rankings, const GroundTruth& truth);

/// Hits@1, Hits@10 and MRR of a plan readout over the truth pairs.
MetricsReport evaluate_plan(Task task, const Matrix& plan, const Matrix& fallback_cost,
                            const GroundTruth& truth);

}  // namespace erem
