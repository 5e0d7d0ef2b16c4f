#pragma once

#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace erem {

/// The chain-of-thought steps an external adviser is asked, in protocol order.
enum class OracleStep {
    task_description,
    initial_relation_align,
    initial_entity_align,
    describe_entity_by_relation,
    rethink_entity,
    describe_relation_by_entity,
    rethink_relation,
};

std::string_view step_name(OracleStep step);
/// Throws FormatError on an unknown name.
OracleStep parse_step(std::string_view name);

struct NamedItem {
    std::string id;
    std::string name;
};

/// A context triple rendered with surface names.
struct NamedTriple {
    std::string head;
    std::string relation;
    std::string tail;
};

struct OracleQuery {
    OracleStep step = OracleStep::task_description;
    NamedItem subject;
    /// Rethink steps: the currently paired target. Describe steps: the target-side
    /// item whose triples are listed second.
    std::optional<NamedItem> counterpart;
    /// Align/rethink steps only; at most k, best first.
    std::vector<NamedItem> candidates;
    std::vector<NamedTriple> subject_triples;
    std::vector<NamedTriple> counterpart_triples;
    /// Describe steps: (source name, target name) pairs stated as the same item.
    std::vector<std::pair<std::string, std::string>> aligned_pairs;
};

struct OracleAnswer {
    enum class Verdict { accept, replace, none };
    Verdict verdict = Verdict::none;
    std::string target_id;  // set for replace

    static OracleAnswer accept() { return {Verdict::accept, {}}; }
    static OracleAnswer none() { return {Verdict::none, {}}; }
    static OracleAnswer replace(std::string id) { return {Verdict::replace, std::move(id)}; }

    friend bool operator==(const OracleAnswer&, const OracleAnswer&) = default;
};

/// The k lowest-cost indices, ascending cost with index tie-break.
std::vector<std::size_t> top_k_candidates(std::span<const double> cost_row, std::size_t k = 10);

/// Renders the step's prompt template. Throws ArgumentError when the query lacks
/// what the step needs (e.g. an empty candidate list for an align step).
std::string build_prompt(const OracleQuery& query);

/// Pluggable adviser. Implementations may call a model with build_prompt(query).
class AnchorOracle {
public:
    virtual ~AnchorOracle() = default;
    virtual OracleAnswer answer(const OracleQuery& query) = 0;
};

/// Deterministic stand-in for a live model: looks answers up by (step, subject id).
class ReplayOracle final : public AnchorOracle {
public:
    ReplayOracle() = default;
    /// Lines "step<TAB>subject_id<TAB>{accept|none|replace:<target_id>}".
    static ReplayOracle load(std::istream& in, const std::string& source_name = "replay store");
    static ReplayOracle load(const std::string& path);

    void add(OracleStep step, std::string subject_id, OracleAnswer answer);
    std::size_t size() const noexcept { return answers_.size(); }

    OracleAnswer answer(const OracleQuery& query) override;
    OracleAnswer lookup(const OracleQuery& query) const;

private:
    std::map<std::pair<OracleStep, std::string>, OracleAnswer> answers_;
};

OracleAnswer replay_oracle_answer(const ReplayOracle& store, const OracleQuery& query);

/// True when the answer respects the query: a replace target must be one of
/// the query's candidates.
bool answer_is_valid(const OracleQuery& query, const OracleAnswer& answer);

}  // namespace erem
