#include "erem/driver.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>

#include <spdlog/spdlog.h>

#include "erem/error.hpp"

namespace erem {

ObjectiveValue anchor_objective(const Matrix& plan, const AnchorSet& anchors, double lambda) {
    ObjectiveValue out;
    double all = 0.0;
    double hard = 0.0;
    for (const auto& p : anchors.pairs()) {
        if (p.source >= plan.rows() || p.target >= plan.cols()) {
            throw ArgumentError("anchor_objective: anchor outside the plan");
        }
        const double mass = plan(p.source, p.target);
        if (!(mass > 0.0)) {
            out.zero_mass_pairs.emplace_back(p.source, p.target);
            continue;
        }
        const double log_mass = std::log(mass);
        all += log_mass;
        if (p.tier == Tier::hard) hard += log_mass;
    }
    out.value = out.zero_mass_pairs.empty() ? -all - lambda * hard
                                            : std::numeric_limits<double>::infinity();
    return out;
}

namespace {

struct Side {
    const KnowledgeGraph& source;
    const KnowledgeGraph& target;
    bool entities;

    const IdTable& source_table() const { return entities ? source.entities() : source.relations(); }
    const IdTable& target_table() const { return entities ? target.entities() : target.relations(); }

    NamedItem source_item(Index i) const {
        return {std::to_string(source_table().id(i)), source_table().name(i)};
    }
    NamedItem target_item(Index j) const {
        return {std::to_string(target_table().id(j)), target_table().name(j)};
    }
};

// Candidate row from a cost matrix, optionally dropping one target.
std::vector<NamedItem> candidates_for(const Side& side, const Matrix& cost, Index row,
                                      std::size_t k, std::optional<Index> exclude) {
    std::vector<double> values(cost.row(row).data(), cost.row(row).data() + cost.cols());
    const auto order = top_k_candidates(values, exclude ? k + 1 : k);
    std::vector<NamedItem> out;
    for (const auto j : order) {
        if (exclude && j == *exclude) continue;
        if (out.size() == k) break;
        out.push_back(side.target_item(static_cast<Index>(j)));
    }
    return out;
}

// Applies an oracle answer as a hard anchor; conflicts keep the existing pair.
void inject(AnchorSet& anchors, const Side& side, Index source, std::optional<Index> counterpart,
            const OracleQuery& query, const OracleAnswer& answer) {
    std::optional<Index> target;
    if (!answer_is_valid(query, answer)) {
        spdlog::warn("oracle: {} for {} names target {} outside the candidate list; ignored",
                     step_name(query.step), query.subject.id, answer.target_id);
        return;
    }
    switch (answer.verdict) {
        case OracleAnswer::Verdict::none:
            return;
        case OracleAnswer::Verdict::accept:
            target = counterpart;
            break;
        case OracleAnswer::Verdict::replace: {
            const RawId raw = std::stoull(answer.target_id);
            target = side.target_table().index_of(raw);
            break;
        }
    }
    if (!target) return;
    if (anchors.insert(source, *target, Tier::hard) == AnchorSet::InsertResult::conflict) {
        spdlog::warn("oracle: ({}, {}) conflicts with an existing anchor; dropped",
                     query.subject.id, side.target_item(*target).id);
    }
}

// Triples of `e` (as head or tail) whose relation satisfies pred, rendered with names.
template <typename Pred>
std::vector<NamedTriple> entity_triples(const KnowledgeGraph& g, Index e, Pred&& pred) {
    std::vector<NamedTriple> out;
    for (const auto& edge : g.out_edges(e)) {
        if (pred(edge.relation)) {
            out.push_back({g.entities().name(e), g.relations().name(edge.relation),
                           g.entities().name(edge.node)});
        }
    }
    for (const auto& edge : g.in_edges(e)) {
        if (pred(edge.relation)) {
            out.push_back({g.entities().name(edge.node), g.relations().name(edge.relation),
                           g.entities().name(e)});
        }
    }
    return out;
}

bool has_relation(const KnowledgeGraph& g, Index e, Index relation) {
    for (const auto& edge : g.out_edges(e)) {
        if (edge.relation == relation) return true;
    }
    for (const auto& edge : g.in_edges(e)) {
        if (edge.relation == relation) return true;
    }
    return false;
}

void initial_oracle_round(AnchorOracle& oracle, const Side& side, const Matrix& cost,
                          AnchorSet& anchors, std::size_t k) {
    const auto step = side.entities ? OracleStep::initial_entity_align
                                    : OracleStep::initial_relation_align;
    for (Index i = 0; i < cost.rows(); ++i) {
        OracleQuery q;
        q.step = step;
        q.subject = side.source_item(i);
        q.candidates = candidates_for(side, cost, i, k, std::nullopt);
        if (q.candidates.empty()) continue;
        inject(anchors, side, i, std::nullopt, q, oracle.answer(q));
    }
}

// Describe-then-rethink exchange for every source item.
void rethink_entities(AnchorOracle& oracle, const Side& side, const Matrix& cost,
                      AnchorSet& entities, const AnchorSet& relations, std::size_t k) {
    const auto& g = side.source;
    const auto& gp = side.target;
    for (Index i = 0; i < cost.rows(); ++i) {
        const auto current = entities.target_of(i);
        const Index counterpart = current ? *current : static_cast<Index>(top_k_candidates(
                                                          {cost.row(i).data(), static_cast<std::size_t>(cost.cols())}, 1)
                                                          .front());

        OracleQuery describe;
        describe.step = OracleStep::describe_entity_by_relation;
        describe.subject = side.source_item(i);
        describe.counterpart = side.target_item(counterpart);
        std::set<std::pair<Index, Index>> shared;
        for (const auto& p : relations.pairs()) {
            if (has_relation(g, i, p.source) && has_relation(gp, counterpart, p.target)) {
                shared.emplace(p.source, p.target);
            }
        }
        if (!shared.empty()) {
            describe.subject_triples = entity_triples(g, i, [&](Index r) {
                return relations.target_of(r) && shared.contains({r, *relations.target_of(r)});
            });
            describe.counterpart_triples = entity_triples(gp, counterpart, [&](Index r) {
                const auto s = relations.source_of(r);
                return s && shared.contains({*s, r});
            });
            for (const auto& [r, rp] : shared) {
                describe.aligned_pairs.emplace_back(g.relations().name(r), gp.relations().name(rp));
            }
            oracle.answer(describe);
        }

        OracleQuery q;
        q.step = OracleStep::rethink_entity;
        q.subject = side.source_item(i);
        q.counterpart = side.target_item(counterpart);
        q.candidates = candidates_for(side, cost, i, k, counterpart);
        if (q.candidates.empty()) continue;
        inject(entities, side, i, counterpart, q, oracle.answer(q));
    }
}

void rethink_relations(AnchorOracle& oracle, const Side& side, const Matrix& cost,
                       AnchorSet& relations, const AnchorSet& entities, std::size_t k) {
    const auto& g = side.source;
    const auto& gp = side.target;
    for (Index r = 0; r < cost.rows(); ++r) {
        const auto current = relations.target_of(r);
        const Index counterpart = current ? *current : static_cast<Index>(top_k_candidates(
                                                          {cost.row(r).data(), static_cast<std::size_t>(cost.cols())}, 1)
                                                          .front());

        OracleQuery describe;
        describe.step = OracleStep::describe_relation_by_entity;
        describe.subject = side.source_item(r);
        describe.counterpart = side.target_item(counterpart);
        std::map<Index, Index> aligned;  // entity pairs appearing on both sides
        for (const auto& t : g.triples()) {
            if (t.relation != r) continue;
            const auto h2 = entities.target_of(t.head);
            const auto t2 = entities.target_of(t.tail);
            if (h2 && t2 && gp.has_triple(*h2, counterpart, *t2)) {
                describe.subject_triples.push_back({g.entities().name(t.head), g.relations().name(r),
                                                    g.entities().name(t.tail)});
                describe.counterpart_triples.push_back({gp.entities().name(*h2),
                                                        gp.relations().name(counterpart),
                                                        gp.entities().name(*t2)});
                aligned.emplace(t.head, *h2);
                aligned.emplace(t.tail, *t2);
            }
        }
        if (!aligned.empty()) {
            for (const auto& [e, ep] : aligned) {
                describe.aligned_pairs.emplace_back(g.entities().name(e), gp.entities().name(ep));
            }
            oracle.answer(describe);
        }

        OracleQuery q;
        q.step = OracleStep::rethink_relation;
        q.subject = side.source_item(r);
        q.counterpart = side.target_item(counterpart);
        q.candidates = candidates_for(side, cost, r, k, counterpart);
        if (q.candidates.empty()) continue;
        inject(relations, side, r, counterpart, q, oracle.answer(q));
    }
}

template <typename Fn>
auto with_context(int iteration, const char* step, Fn&& fn) {
    const auto prefix = "iteration " + std::to_string(iteration) + " " + step + ": ";
    try {
        return fn();
    } catch (const ArgumentError& e) {
        throw ArgumentError(prefix + e.what());
    } catch (const DataError& e) {
        throw DataError(prefix + e.what());
    } catch (const Error& e) {
        throw Error(prefix + e.what());
    }
}

}  // namespace

EremResult run_erem(const EremConfig& config, const EremInputs& in, const EremHooks& hooks) {
    validate(config);
    if (in.source_entities.rows() != in.source.entity_count() ||
        in.target_entities.rows() != in.target.entity_count() ||
        in.source_relations.rows() != in.source.relation_count() ||
        in.target_relations.rows() != in.target.relation_count()) {
        throw ArgumentError("run_erem: embedding row counts do not match the graphs");
    }
    if (in.source.entity_count() == 0 || in.target.entity_count() == 0 ||
        in.source.relation_count() == 0 || in.target.relation_count() == 0) {
        throw ArgumentError("run_erem: both graphs need entities and relations");
    }

    const SinkhornOptions sinkhorn{config.sinkhorn_reg, config.max_sinkhorn_iters, config.sinkhorn_tol};
    const Side entity_side{in.source, in.target, true};
    const Side relation_side{in.source, in.target, false};

    const CostMatrix entity_embedding_cost = cosine_cost_matrix(in.source_entities, in.target_entities);
    const CostMatrix relation_embedding_cost =
        cosine_cost_matrix(in.source_relations, in.target_relations);

    AnchorSet entities = init_anchor_set(entity_embedding_cost, config.init_threshold);
    AnchorSet relations = init_anchor_set(relation_embedding_cost, config.init_threshold);
    const RelationGraph source_rkg = kgt_transform(in.source);
    const RelationGraph target_rkg = kgt_transform(in.target);
    spdlog::info("initial anchors: {} entity, {} relation", entities.size(), relations.size());

    if (hooks.oracle) {
        initial_oracle_round(*hooks.oracle, relation_side, relation_embedding_cost, relations,
                             config.candidate_count);
        initial_oracle_round(*hooks.oracle, entity_side, entity_embedding_cost, entities,
                             config.candidate_count);
    }

    EremResult result;
    const Matrix* entity_readout = &entity_embedding_cost;
    const Matrix* relation_readout = &relation_embedding_cost;

    for (int k = 1; k <= config.iterations; ++k) {
        IterationRecord record;
        record.iteration = k;

        // E-step: entity matching enhanced by relation anchors.
        with_context(k, "E-step", [&] {
            if (!config.ablation.disable_e_enhancement) {
                entities = derive_hard_entity_anchors(in.source, in.target, entities, relations);
            }
            if (hooks.oracle) {
                rethink_entities(*hooks.oracle, entity_side, *entity_readout, entities, relations,
                                 config.candidate_count);
            }
            const auto awards =
                entity_award_matrices(in.source, in.target, entities, relations, config.alpha);
            result.entity_cost =
                assemble_entity_cost(entity_embedding_cost, awards.structure, awards.relation);
            result.entity_plan = sinkhorn_plan(result.entity_cost, sinkhorn);
            entity_readout = &result.entity_cost.values;
            const auto objective = anchor_objective(result.entity_plan.values, entities, config.lambda);
            if (!objective.zero_mass_pairs.empty()) {
                spdlog::warn("iteration {}: {} entity anchors carry zero plan mass", k,
                             objective.zero_mass_pairs.size());
            }
            record.objective_entity = objective.value;
            record.entity_sinkhorn_iters = result.entity_plan.iterations_used;
            record.entity_sinkhorn_converged = result.entity_plan.converged;
            entities = promote_anchors(result.entity_plan.values, entities, config.epsilon);
            if (hooks.entity_truth) {
                record.ea = evaluate_plan(Task::EA, result.entity_plan.values,
                                          result.entity_cost.values, *hooks.entity_truth);
            }
            return 0;
        });

        // M-step: relation matching enhanced by hard entity anchors.
        with_context(k, "M-step", [&] {
            if (!config.ablation.disable_m_enhancement) {
                relations = derive_hard_relation_anchors(in.source, in.target,
                                                         entities.hard_subset(), relations);
            }
            if (hooks.oracle) {
                rethink_relations(*hooks.oracle, relation_side, *relation_readout, relations,
                                  entities, config.candidate_count);
            }
            const auto award = relation_award_matrix(source_rkg, target_rkg, relations, config.alpha);
            result.relation_cost = assemble_relation_cost(relation_embedding_cost, award);
            result.relation_plan = sinkhorn_plan(result.relation_cost, sinkhorn);
            relation_readout = &result.relation_cost.values;
            const auto objective =
                anchor_objective(result.relation_plan.values, relations, config.lambda);
            record.objective_relation = objective.value;
            record.relation_sinkhorn_iters = result.relation_plan.iterations_used;
            record.relation_sinkhorn_converged = result.relation_plan.converged;
            relations = promote_anchors(result.relation_plan.values, relations, config.epsilon);
            if (hooks.relation_truth) {
                record.ra = evaluate_plan(Task::RA, result.relation_plan.values,
                                          result.relation_cost.values, *hooks.relation_truth);
            }
            return 0;
        });

        record.objective_final = record.objective_entity + record.objective_relation;
        record.entity_anchors = entities.size();
        record.hard_entity_anchors = entities.hard_count();
        record.relation_anchors = relations.size();
        record.hard_relation_anchors = relations.hard_count();
        spdlog::debug("iteration {}: anchors e={} (hard {}), r={} (hard {}), O_final={}", k,
                      record.entity_anchors, record.hard_entity_anchors, record.relation_anchors,
                      record.hard_relation_anchors, record.objective_final);
        if (hooks.on_iteration) hooks.on_iteration(record);
        result.trace.push_back(std::move(record));
    }

    result.entity_anchors = std::move(entities);
    result.relation_anchors = std::move(relations);
    return result;
}

}  // namespace erem
