#include "erem/eval.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "erem/error.hpp"

namespace erem {

GroundTruth::GroundTruth(std::vector<std::pair<Index, Index>> pairs) : pairs_(std::move(pairs)) {
    std::set<Index> sources;
    std::set<Index> targets;
    for (const auto& [s, t] : pairs_) {
        if (!sources.insert(s).second) {
            throw ArgumentError("ground truth repeats source " + std::to_string(s));
        }
        if (!targets.insert(t).second) {
            throw ArgumentError("ground truth repeats target " + std::to_string(t));
        }
    }
}

std::vector<std::pair<RawId, RawId>> read_raw_pairs(std::istream& in, const std::string& source_name) {
    std::vector<std::pair<RawId, RawId>> out;
    std::string line;
    std::size_t number = 0;
    auto parse = [&](std::string_view text) {
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
        const auto tab = line.find('\t');
        if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
            throw ParseError(source_name, number, "expected 'src_id<TAB>tgt_id'");
        }
        const std::string_view view(line);
        out.emplace_back(parse(view.substr(0, tab)), parse(view.substr(tab + 1)));
    }
    return out;
}

GroundTruth resolve_truth(const std::vector<std::pair<RawId, RawId>>& raw, const IdTable& source,
                          const IdTable& target) {
    std::vector<std::pair<Index, Index>> pairs;
    pairs.reserve(raw.size());
    for (const auto& [s, t] : raw) pairs.emplace_back(source.index_of(s), target.index_of(t));
    return GroundTruth(std::move(pairs));
}

const char* task_name(Task task) { return task == Task::EA ? "EA" : "RA"; }

namespace {

void check_shapes(const Matrix& plan, const Matrix& fallback_cost, Index source) {
    if (plan.rows() != fallback_cost.rows() || plan.cols() != fallback_cost.cols()) {
        throw ArgumentError("ranking: plan and fallback cost shapes differ");
    }
    if (source >= plan.rows()) {
        throw ArgumentError("ranking: source index " + std::to_string(source) + " out of range");
    }
}

// True when candidate a ranks ahead of b.
bool ahead(const Matrix& plan, const Matrix& cost, Index s, Index a, Index b) {
    if (plan(s, a) != plan(s, b)) return plan(s, a) > plan(s, b);
    if (cost(s, a) != cost(s, b)) return cost(s, a) < cost(s, b);
    return a < b;
}

}  // namespace

std::vector<Index> rank_targets(const Matrix& plan, const Matrix& fallback_cost, Index source) {
    check_shapes(plan, fallback_cost, source);
    std::vector<Index> order(static_cast<std::size_t>(plan.cols()));
    for (Index j = 0; j < order.size(); ++j) order[j] = j;
    std::sort(order.begin(), order.end(),
              [&](Index a, Index b) { return ahead(plan, fallback_cost, source, a, b); });
    return order;
}

std::size_t target_rank(const Matrix& plan, const Matrix& fallback_cost, Index source, Index target) {
    check_shapes(plan, fallback_cost, source);
    if (target >= plan.cols()) throw ArgumentError("ranking: target index out of range");
    std::size_t rank = 1;
    for (Index j = 0; j < plan.cols(); ++j) {
        if (j != target && ahead(plan, fallback_cost, source, j, target)) ++rank;
    }
    return rank;
}

namespace {

std::optional<std::size_t> rank_in(const Rankings& rankings, Index source, Index target) {
    const auto it = rankings.find(source);
    if (it == rankings.end()) return std::nullopt;
    const auto pos = std::find(it->second.begin(), it->second.end(), target);
    if (pos == it->second.end()) return std::nullopt;
    return static_cast<std::size_t>(pos - it->second.begin()) + 1;
}

}  // namespace

double hits_at_k(const Rankings& rankings, const GroundTruth& truth, std::size_t k) {
    if (k == 0) throw ArgumentError("hits@k needs k >= 1");
    if (truth.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& [s, t] : truth.pairs()) {
        const auto r = rank_in(rankings, s, t);
        if (r && *r <= k) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double mrr(const Rankings& rankings, const GroundTruth& truth) {
    if (truth.empty()) return 0.0;
    double total = 0.0;
    for (const auto& [s, t] : truth.pairs()) {
        if (const auto r = rank_in(rankings, s, t)) total += 1.0 / static_cast<double>(*r);
    }
    return total / static_cast<double>(truth.size());
}

MetricsReport evaluate_plan(Task task, const Matrix& plan, const Matrix& fallback_cost,
                            const GroundTruth& truth) {
    MetricsReport report;
    report.task = task;
    report.pairs_evaluated = truth.size();
    if (truth.empty()) return report;
    std::size_t h1 = 0;
    std::size_t h10 = 0;
    double rr = 0.0;
    for (const auto& [s, t] : truth.pairs()) {
        const auto rank = target_rank(plan, fallback_cost, s, t);
        h1 += rank <= 1;
        h10 += rank <= 10;
        rr += 1.0 / static_cast<double>(rank);
    }
    const auto count = static_cast<double>(truth.size());
    report.hits1 = static_cast<double>(h1) / count;
    report.hits10 = static_cast<double>(h10) / count;
    report.mrr = rr / count;
    return report;
}

}  // namespace erem
