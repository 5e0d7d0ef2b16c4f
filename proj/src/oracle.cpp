#include "erem/oracle.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "erem/error.hpp"

namespace erem {

namespace {

constexpr std::string_view kOpen = "“";
constexpr std::string_view kClose = "”";
constexpr std::string_view kListSep = "、";

constexpr std::string_view kTaskDescription =
    "You are a good assistant to perform entity alignment and relation alignment. I will give a "
    "question and a list of candidate answers to this question. You need to choose the best "
    "answer from the candidate list based on its given description information and your own "
    "knowledge. If no answer from the candidate list, please answer None.";

constexpr std::string_view kChoiceTail =
    ". You must respond with one corresponding choice at most. If no answer from the candidate "
    "list, please answer None.";

struct StepName {
    OracleStep step;
    std::string_view name;
};
constexpr StepName kStepNames[] = {
    {OracleStep::task_description, "task_description"},
    {OracleStep::initial_relation_align, "initial_relation_align"},
    {OracleStep::initial_entity_align, "initial_entity_align"},
    {OracleStep::describe_entity_by_relation, "describe_entity_by_relation"},
    {OracleStep::rethink_entity, "rethink_entity"},
    {OracleStep::describe_relation_by_entity, "describe_relation_by_entity"},
    {OracleStep::rethink_relation, "rethink_relation"},
};

std::string quoted(std::string_view name) {
    std::string out;
    out.reserve(name.size() + kOpen.size() + kClose.size());
    out.append(kOpen).append(name).append(kClose);
    return out;
}

// Entity lists use double quotes, relation lists single quotes.
std::string candidate_list(const std::vector<NamedItem>& items, char quote, std::string_view open) {
    std::string out(open);
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += quote;
        out += items[i].name;
        out += quote;
    }
    out += ']';
    return out;
}

std::string triple_list(const std::vector<NamedTriple>& triples) {
    std::string out;
    for (std::size_t i = 0; i < triples.size(); ++i) {
        if (i) out += kListSep;
        out += '(' + quoted(triples[i].head) + ", " + quoted(triples[i].relation) + ", " +
               quoted(triples[i].tail) + ')';
    }
    return out;
}

void require(bool ok, OracleStep step, const char* what) {
    if (!ok) {
        throw ArgumentError("build_prompt(" + std::string(step_name(step)) + "): " + what);
    }
}

std::string describe(const OracleQuery& q, std::string_view first_end, std::string_view second_end,
                     std::string_view same_what) {
    require(q.counterpart.has_value(), q.step, "missing counterpart");
    require(!q.subject_triples.empty(), q.step, "missing subject triples");
    require(!q.counterpart_triples.empty(), q.step, "missing counterpart triples");
    require(!q.aligned_pairs.empty(), q.step, "missing aligned pairs");
    std::string out = "For " + quoted(q.subject.name) + ", contains triples: " +
                      triple_list(q.subject_triples);
    out += first_end;
    out += "\nFor " + quoted(q.counterpart->name) + ", contains triples: " +
           triple_list(q.counterpart_triples);
    out += second_end;
    for (const auto& [a, b] : q.aligned_pairs) {
        out += '\n' + quoted(a) + " and " + quoted(b) + " are the same ";
        out += same_what;
        out += '.';
    }
    return out;
}

}  // namespace

std::string_view step_name(OracleStep step) {
    for (const auto& s : kStepNames) {
        if (s.step == step) return s.name;
    }
    return "unknown";
}

OracleStep parse_step(std::string_view name) {
    for (const auto& s : kStepNames) {
        if (s.name == name) return s.step;
    }
    throw FormatError("unknown oracle step '" + std::string(name) + "'");
}

std::vector<std::size_t> top_k_candidates(std::span<const double> cost_row, std::size_t k) {
    if (k == 0) throw ArgumentError("top_k_candidates needs k >= 1");
    std::vector<std::size_t> order(cost_row.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto keep = std::min(k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (cost_row[a] != cost_row[b]) return cost_row[a] < cost_row[b];
                          return a < b;
                      });
    order.resize(keep);
    return order;
}

std::string build_prompt(const OracleQuery& q) {
    switch (q.step) {
        case OracleStep::task_description:
            return std::string(kTaskDescription);
        case OracleStep::initial_relation_align:
            require(!q.candidates.empty(), q.step, "empty candidate list");
            return "Given relation " + quoted(q.subject.name) +
                   ", please choose same relation from the candidate list " +
                   candidate_list(q.candidates, '\'', "[") + std::string(kChoiceTail);
        case OracleStep::initial_entity_align:
            require(!q.candidates.empty(), q.step, "empty candidate list");
            return "Given entity " + quoted(q.subject.name) +
                   ", please choose a same entity from the candidate list " +
                   candidate_list(q.candidates, '"', "[") + std::string(kChoiceTail);
        case OracleStep::describe_entity_by_relation:
            return describe(q, "", ".", "relation");
        case OracleStep::describe_relation_by_entity:
            return describe(q, ";", ";", "entity");
        case OracleStep::rethink_entity:
            require(q.counterpart.has_value(), q.step, "missing current pair");
            require(!q.candidates.empty(), q.step, "empty candidate list");
            return "Is the entity alignment pair (" + quoted(q.subject.name) + ", " +
                   quoted(q.counterpart->name) +
                   ") satisfactory enough? (YES or NO ). If response No, reselect entity from "
                   "entity candid list " +
                   candidate_list(q.candidates, '"', "[") + ".";
        case OracleStep::rethink_relation:
            require(q.counterpart.has_value(), q.step, "missing current pair");
            require(!q.candidates.empty(), q.step, "empty candidate list");
            return "Is the relation alignment pair (" + quoted(q.subject.name) + ", " +
                   quoted(q.counterpart->name) +
                   ") satisfactory enough? (YES or NO ). If response No, reselect relation from "
                   "relation candid list " +
                   candidate_list(q.candidates, '\'', "[ ") + ".";
    }
    throw ArgumentError("build_prompt: unknown step");
}

ReplayOracle ReplayOracle::load(std::istream& in, const std::string& source_name) {
    ReplayOracle store;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto a = line.find('\t');
        const auto b = a == std::string::npos ? a : line.find('\t', a + 1);
        if (b == std::string::npos || line.find('\t', b + 1) != std::string::npos) {
            throw FormatError(source_name + ":" + std::to_string(number) +
                              ": expected 'step<TAB>subject_id<TAB>verdict'");
        }
        const std::string_view view(line);
        OracleStep step{};
        try {
            step = parse_step(view.substr(0, a));
        } catch (const FormatError& e) {
            throw FormatError(source_name + ":" + std::to_string(number) + ": " + e.what());
        }
        std::string subject(view.substr(a + 1, b - a - 1));
        if (subject.empty()) {
            throw FormatError(source_name + ":" + std::to_string(number) + ": empty subject id");
        }
        const auto verdict = view.substr(b + 1);
        OracleAnswer answer;
        constexpr std::string_view kReplace = "replace:";
        if (verdict == "accept") {
            answer = OracleAnswer::accept();
        } else if (verdict == "none") {
            answer = OracleAnswer::none();
        } else if (verdict.starts_with(kReplace) && verdict.size() > kReplace.size()) {
            answer = OracleAnswer::replace(std::string(verdict.substr(kReplace.size())));
        } else {
            throw FormatError(source_name + ":" + std::to_string(number) + ": bad verdict '" +
                              std::string(verdict) + "'");
        }
        if (store.answers_.contains({step, subject})) {
            throw FormatError(source_name + ":" + std::to_string(number) +
                              ": duplicate entry for (" + std::string(step_name(step)) + ", " +
                              subject + ")");
        }
        store.add(step, std::move(subject), std::move(answer));
    }
    return store;
}

ReplayOracle ReplayOracle::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open replay store " + path);
    return load(in, path);
}

void ReplayOracle::add(OracleStep step, std::string subject_id, OracleAnswer answer) {
    answers_.insert_or_assign({step, std::move(subject_id)}, std::move(answer));
}

OracleAnswer ReplayOracle::lookup(const OracleQuery& query) const {
    const auto it = answers_.find({query.step, query.subject.id});
    if (it == answers_.end()) return OracleAnswer::none();
    return it->second;
}

OracleAnswer ReplayOracle::answer(const OracleQuery& query) { return lookup(query); }

OracleAnswer replay_oracle_answer(const ReplayOracle& store, const OracleQuery& query) {
    return store.lookup(query);
}

bool answer_is_valid(const OracleQuery& query, const OracleAnswer& answer) {
    if (answer.verdict != OracleAnswer::Verdict::replace) return true;
    return std::any_of(query.candidates.begin(), query.candidates.end(),
                       [&](const NamedItem& c) { return c.id == answer.target_id; });
}

}  // namespace erem
