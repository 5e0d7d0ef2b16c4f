// Runs every acceptance check and prints one PASS/FAIL line per check.
#include <chrono>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <spdlog/spdlog.h>

#include "erem/driver.hpp"
#include "erem/synth.hpp"
#include "../support.hpp"

using namespace erem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
    bool pass = false;
    std::string detail;
};

EremInputs inputs_of(const SynthPair& p) {
    return {p.source, p.target, p.source_entities, p.target_entities, p.source_relations,
            p.target_relations};
}

EremResult run_with_truth(const SynthPair& p, const EremConfig& config) {
    EremHooks hooks;
    hooks.entity_truth = &p.entity_truth;
    hooks.relation_truth = &p.relation_truth;
    return run_erem(config, inputs_of(p), hooks);
}

bool trace_laws_hold(const EremResult& r) {
    for (std::size_t k = 0; k < r.trace.size(); ++k) {
        const auto& t = r.trace[k];
        if (t.objective_final != t.objective_entity + t.objective_relation) return false;
        if (k > 0) {
            const auto& prev = r.trace[k - 1];
            if (t.entity_anchors < prev.entity_anchors || t.relation_anchors < prev.relation_anchors ||
                t.hard_entity_anchors < prev.hard_entity_anchors ||
                t.hard_relation_anchors < prev.hard_relation_anchors) {
                return false;
            }
        }
    }
    return true;
}

Verdict sinkhorn_marginals() {
    SplitMix64 rng(1001);
    std::vector<Matrix> costs;
    for (int i = 0; i < 100; ++i) costs.push_back(test::random_matrix(rng, 50, 60));
    double worst = 0.0;
    int most_iters = 0;
    const auto start = Clock::now();
    for (const auto& c : costs) {
        const auto plan = sinkhorn_plan(c, SinkhornOptions{0.1, 1000, 1e-9});
        worst = std::max(worst, marginal_violation(plan.values));
        most_iters = std::max(most_iters, plan.iterations_used);
    }
    const double elapsed = seconds_since(start);
    return {worst <= 1e-9 && most_iters <= 1000 && elapsed < 5.0,
            fmt::format("max violation {:.3g}, max iterations {}, {:.2f} s", worst, most_iters, elapsed)};
}

Verdict ot_oracle_agreement() {
    SplitMix64 rng(1002);
    int instances = 0, agree = 0, rejected = 0;
    while (instances < 50) {
        const Matrix cost = test::random_matrix(rng, 20, 20, 0.0, 20.0);
        const auto best = exact_min_cost_matching(cost);
        double best_cost = 0.0;
        for (const auto& [i, j] : best) best_cost += cost(i, j);
        // Runner-up differs in at least one edge: forbid each optimal edge in turn.
        double runner_up = std::numeric_limits<double>::infinity();
        for (const auto& [i, j] : best) {
            Matrix forbidden = cost;
            forbidden(i, j) = 1e6;
            double c = 0.0;
            for (const auto& [a, b] : exact_min_cost_matching(forbidden)) c += forbidden(a, b);
            runner_up = std::min(runner_up, c);
        }
        if (runner_up - best_cost < 1.0) {
            ++rejected;
            continue;
        }
        ++instances;
        const auto plan = sinkhorn_plan(cost, SinkhornOptions{0.01, 1000, 1e-9});
        bool match = true;
        for (const auto& [i, j] : best) {
            Eigen::Index arg = 0;
            plan.values.row(i).maxCoeff(&arg);
            if (arg != j) match = false;
        }
        agree += match ? 1 : 0;
    }
    return {agree >= 48, fmt::format("{}/{} instances agree ({} draws without margin skipped)", agree,
                                     instances, rejected)};
}

// Target graph = image of g under the anchor bijection, thinned and padded with noise.
KnowledgeGraph perturbed_image(SplitMix64& rng, const KnowledgeGraph& g, const std::vector<Index>& emap,
                               const std::vector<Index>& rmap) {
    std::vector<Triple> out;
    for (const auto& t : g.triples()) {
        if (rng.uniform() < 0.2) continue;
        out.push_back({emap[t.head], rmap[t.relation], emap[t.tail]});
    }
    const auto extra = rng.below(g.triple_count() / 2 + 1);
    for (std::size_t k = 0; k < extra; ++k) {
        out.push_back({static_cast<Index>(rng.below(g.entity_count())),
                       static_cast<Index>(rng.below(g.relation_count())),
                       static_cast<Index>(rng.below(g.entity_count()))});
    }
    return test::make_graph(g.entity_count(), g.relation_count(), std::move(out));
}

std::vector<Index> random_perm(SplitMix64& rng, std::size_t n) {
    std::vector<Index> p(n);
    std::iota(p.begin(), p.end(), Index{0});
    for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
    return p;
}

AnchorSet partial_anchors(SplitMix64& rng, const std::vector<Index>& map, double keep, double hard) {
    AnchorSet out;
    for (Index i = 0; i < static_cast<Index>(map.size()); ++i) {
        if (rng.uniform() < keep) out.insert(i, map[i], rng.uniform() < hard ? Tier::hard : Tier::normal);
    }
    return out;
}

Verdict hard_anchor_equivalence() {
    SplitMix64 rng(1003);
    int equal = 0;
    std::size_t derived = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t ne = 2 + rng.below(29);
        const std::size_t nr = 1 + rng.below(8);
        const auto g = test::random_graph(rng, ne, nr, rng.below(4 * ne));
        const auto emap = random_perm(rng, ne);
        const auto rmap = random_perm(rng, nr);
        const auto gp = perturbed_image(rng, g, emap, rmap);
        const auto ye = partial_anchors(rng, emap, 0.8, 0.1);
        const auto yr = partial_anchors(rng, rmap, 0.8, 0.1);
        const auto he = derive_hard_entity_anchors(g, gp, ye, yr);
        const auto hr = derive_hard_relation_anchors(g, gp, he.hard_subset(), yr);
        const bool ok = test::hard_pairs(he) == test::brute_hard_entities(g, gp, ye, yr) &&
                        test::all_pairs(he) == test::all_pairs(ye) &&
                        test::hard_pairs(hr) == test::brute_hard_relations(g, gp, he, yr) &&
                        test::all_pairs(hr) == test::all_pairs(yr);
        equal += ok ? 1 : 0;
        derived += he.hard_count() - ye.hard_count() + hr.hard_count() - yr.hard_count();
    }
    return {equal == 100, fmt::format("{}/100 graphs equal, {} hard pairs derived in total", equal, derived)};
}

Verdict kgt_equivalence() {
    SplitMix64 rng(1004);
    int equal = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t nr = 1 + rng.below(50);
        const auto g = test::random_graph(rng, 2 + rng.below(30), nr, rng.below(100));
        const auto rkg = kgt_transform(g);
        const auto adj = test::brute_relation_adjacency(g);
        bool ok = true;
        for (Index r = 0; r < static_cast<Index>(nr); ++r) {
            const auto got = one_hop_relation_neighbors(rkg, r);
            ok = ok && std::set<Index>(got.begin(), got.end()) == adj[r] && std::is_sorted(got.begin(), got.end());
        }
        equal += ok ? 1 : 0;
    }

    // Relation 0 has a single neighbour; the rest form a dense clique around one hub.
    auto timed_queries = [](std::size_t nr, Index query) {
        std::vector<Triple> triples{{0, 0, 1}, {1, 1, 2}};
        for (Index r = 1; r < static_cast<Index>(nr); ++r) triples.push_back({3, r, 4});
        const auto rkg = kgt_transform(test::make_graph(5, nr, std::move(triples)));
        constexpr int kReps = 200000;
        std::size_t sink = 0;
        const auto start = Clock::now();
        for (int k = 0; k < kReps; ++k) {
            for (const auto n : one_hop_relation_neighbors(rkg, query)) sink += static_cast<std::size_t>(n);
        }
        const double per_query = seconds_since(start) / kReps;
        return std::pair{per_query, sink};
    };
    const auto [small_sparse, s1] = timed_queries(50, 0);
    const auto [large_sparse, s2] = timed_queries(1500, 0);
    const auto [large_dense, s3] = timed_queries(1500, 2);
    // |R|^2 grows 900x between the two graphs; the sparse query should not.
    const bool scales = large_sparse < 20.0 * small_sparse + 1e-7 && large_dense > large_sparse;
    return {equal == 100 && scales && (s1 + s2 + s3) > 0,
            fmt::format("{}/100 graphs equal; sparse query {:.1f} ns at |R|=50, {:.1f} ns at |R|=1500; "
                        "dense query {:.1f} ns",
                        equal, small_sparse * 1e9, large_sparse * 1e9, large_dense * 1e9)};
}

Verdict noise_free_recovery(EremResult& keep) {
    SynthSpec spec;
    spec.seed = 1;
    const auto p = generate_pair(spec);
    const auto start = Clock::now();
    keep = run_with_truth(p, EremConfig{});
    const double elapsed = seconds_since(start);
    const auto& last = keep.trace.back();
    return {last.ea->hits1 == 1.0 && last.ra->hits1 == 1.0 && elapsed < 30.0,
            fmt::format("EA Hits@1 {:.3f}, RA Hits@1 {:.3f}, {:.1f} s", last.ea->hits1, last.ra->hits1,
                        elapsed)};
}

struct NoisyRuns {
    std::vector<EremResult> full, no_e, no_m;
};

SynthSpec noisy_spec(std::uint64_t seed) {
    SynthSpec spec;
    spec.seed = seed;
    spec.embedding_dim = 6;
    spec.embedding_noise_sigma = 0.15;
    spec.triple_dropout = 0.1;
    return spec;
}

NoisyRuns noisy_benchmark() {
    NoisyRuns runs;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto p = generate_pair(noisy_spec(seed));
        EremConfig c;
        runs.full.push_back(run_with_truth(p, c));
        c.ablation = {true, false};
        runs.no_e.push_back(run_with_truth(p, c));
        c.ablation = {false, true};
        runs.no_m.push_back(run_with_truth(p, c));
    }
    return runs;
}

double mean_final_ea(const std::vector<EremResult>& runs) {
    double sum = 0.0;
    for (const auto& r : runs) sum += r.trace.back().ea->hits1;
    return sum / static_cast<double>(runs.size());
}

Verdict ablation_ordering(const NoisyRuns& runs) {
    const double full = mean_final_ea(runs.full);
    const double no_e = mean_final_ea(runs.no_e);
    const double no_m = mean_final_ea(runs.no_m);
    return {full >= no_e && full >= no_m,
            fmt::format("mean EA Hits@1 full {:.4f}, (-E) {:.4f}, (-M) {:.4f}", full, no_e, no_m)};
}

Verdict mutual_enhancement(const NoisyRuns& runs) {
    int rising = 0;
    for (const auto& r : runs.full) {
        const auto& first = r.trace.front();
        const auto& last = r.trace.back();
        if (last.ea->hits1 >= first.ea->hits1 && last.ra->hits1 >= first.ra->hits1) ++rising;
    }
    return {rising >= 8, fmt::format("{}/10 seeds with final >= first for both EA and RA", rising)};
}

Verdict objective_identity(const EremResult& clean, const NoisyRuns& runs) {
    std::size_t checked = 0, ok = 0;
    auto check = [&](const EremResult& r) {
        ++checked;
        ok += trace_laws_hold(r) ? 1 : 0;
    };
    check(clean);
    for (const auto* set : {&runs.full, &runs.no_e, &runs.no_m})
        for (const auto& r : *set) check(r);
    return {ok == checked, fmt::format("{}/{} traces satisfy the identity and monotone counts", ok, checked)};
}

Verdict metric_units() {
    std::vector<std::string> failures;
    auto expect = [&](const std::string& what, double got, double want) {
        if (got != want) failures.push_back(fmt::format("{} = {} (want {})", what, got, want));
    };
    const GroundTruth diag({{0, 0}, {1, 1}});
    expect("hits1 all first", hits_at_k({{0, {0, 1}}, {1, {1, 0}}}, diag, 1), 1.0);
    expect("hits2 none", hits_at_k({{0, {1, 2, 0}}, {1, {0, 2, 3, 1}}}, GroundTruth({{0, 0}, {1, 1}}), 2), 0.0);
    const GroundTruth four({{0, 0}, {1, 1}, {2, 2}, {3, 3}});
    expect("hits1 two of four", hits_at_k({{0, {0}}, {1, {0, 1}}, {2, {2}}, {3, {2, 3}}}, four, 1), 0.5);
    expect("mrr all first", mrr({{0, {0, 1}}, {1, {1, 0}}}, diag), 1.0);
    expect("mrr rank two", mrr({{0, {3, 7}}}, GroundTruth({{0, 7}})), 0.5);
    expect("mrr ranks 1 and 4", mrr({{0, {0}}, {1, {1, 2, 3, 4}}}, GroundTruth({{0, 0}, {1, 4}})), 0.625);
    Matrix plan(1, 3), cost(1, 3);
    plan << 0.4, 0.1, 0.0;
    cost << 0, 0, 0;
    const auto order = rank_targets(plan, cost, 0);
    if (order != std::vector<Index>{0, 1, 2}) failures.push_back("rank by plan");
    plan << 0.2, 0.2, 0.2;
    cost << 0.3, 0.1, 0.2;
    if (rank_targets(plan, cost, 0) != std::vector<Index>{1, 2, 0}) failures.push_back("rank by cost tie-break");
    return {failures.empty(), failures.empty() ? "8 fixed examples exact" : fmt::format("{}", fmt::join(failures, "; "))};
}

Verdict prompt_fidelity() {
    auto items = [](std::vector<std::string> names) {
        std::vector<NamedItem> out;
        for (auto& n : names) out.push_back({n, n});
        return out;
    };
    OracleQuery entity;
    entity.step = OracleStep::initial_entity_align;
    entity.subject = {"杜兰大学", "杜兰大学"};
    entity.candidates = items({"Durham University", "Tulane University", "University of Dundee",
                               "Duke University", "Lund University", "DePaul University", "Brown University",
                               "University of Delhi", "Auburn University", "Leiden University"});
    const std::string entity_expected =
        "Given entity “杜兰大学”, please choose a same entity from the candidate list [\"Durham University\", "
        "\"Tulane University\", \"University of Dundee\", \"Duke University\", \"Lund University\", \"DePaul "
        "University\", \"Brown University\", \"University of Delhi\", \"Auburn University\", \"Leiden "
        "University\"]. You must respond with one corresponding choice at most. If no answer from the "
        "candidate list, please answer None.";

    OracleQuery relation;
    relation.step = OracleStep::rethink_relation;
    relation.subject = {"国家", "国家"};
    relation.counterpart = NamedItem{"country", "country"};
    relation.candidates = items({"birthPlace", "deathPlace", "subdivisionName", "headquarters", "origin",
                                 "leaderName", "restingplace", "house", "burialPlace"});
    const std::string relation_expected =
        "Is the relation alignment pair (“国家”, “country”) satisfactory enough? (YES or NO ). If response "
        "No, reselect relation from relation candid list [ 'birthPlace', 'deathPlace', 'subdivisionName', "
        "'headquarters', 'origin', 'leaderName', 'restingplace', 'house', 'burialPlace'].";

    const bool a = build_prompt(entity) == entity_expected;
    const bool b = build_prompt(relation) == relation_expected;
    return {a && b, fmt::format("entity align prompt {}, relation rethink prompt {}", a ? "identical" : "differs",
                                b ? "identical" : "differs")};
}

}  // namespace

int main() {
    spdlog::set_level(spdlog::level::err);
    int failures = 0;
    auto report = [&](const char* name, const std::function<Verdict()>& check) {
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
        std::fflush(stdout);
        failures += v.pass ? 0 : 1;
    };

    report("sinkhorn-marginals", sinkhorn_marginals);
    report("ot-oracle-agreement", ot_oracle_agreement);
    report("hard-anchor-equivalence", hard_anchor_equivalence);
    report("kgt-equivalence", kgt_equivalence);
    EremResult clean;
    report("noise-free-recovery", [&] { return noise_free_recovery(clean); });
    NoisyRuns runs;
    bool have_runs = true;
    try {
        runs = noisy_benchmark();
    } catch (const std::exception& e) {
        std::printf("noisy benchmark failed: %s\n", e.what());
        have_runs = false;
    }
    report("ablation-ordering", [&] { return have_runs ? ablation_ordering(runs) : Verdict{false, "no runs"}; });
    report("mutual-enhancement-trace",
           [&] { return have_runs ? mutual_enhancement(runs) : Verdict{false, "no runs"}; });
    report("objective-identity", [&] {
        return have_runs && !clean.trace.empty() ? objective_identity(clean, runs) : Verdict{false, "no runs"};
    });
    report("metric-units", metric_units);
    report("prompt-fidelity", prompt_fidelity);
    return failures == 0 ? 0 : 1;
}
