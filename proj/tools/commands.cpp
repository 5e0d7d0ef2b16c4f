#include "commands.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "erem/anchors.hpp"
#include "erem/config.hpp"
#include "erem/driver.hpp"
#include "erem/embedding.hpp"
#include "erem/error.hpp"
#include "erem/eval.hpp"
#include "erem/kg.hpp"
#include "erem/oracle.hpp"
#include "erem/synth.hpp"

#ifndef EREM_VERSION
#define EREM_VERSION "0.0.0"
#endif

namespace erem::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public Error {
public:
    using Error::Error;
};

struct InputFile {
    std::string role;
    std::string path;
};

class InputLog {
public:
    const std::string& add(std::string role, std::string path) {
        files_.push_back({std::move(role), std::move(path)});
        return files_.back().path;
    }
    json to_json() const {
        json out = json::array();
        for (const auto& f : files_) {
            out.push_back({{"role", f.role},
                           {"path", fs::absolute(f.path).lexically_normal().string()},
                           {"sha256", sha256_file(f.path)}});
        }
        return out;
    }

private:
    std::vector<InputFile> files_;
};

// Builds the output directory next to its destination and moves it into place
// only when everything was written.
class StagedDir {
public:
    StagedDir(fs::path destination, bool force) : destination_(std::move(destination)), force_(force) {
        if (destination_.empty()) throw UsageError("--out is required");
        if (fs::exists(destination_) && !force_) {
            throw Error("output directory " + destination_.string() +
                        " already exists; pass --force to replace it");
        }
        const auto parent = destination_.has_parent_path() ? destination_.parent_path() : fs::path(".");
        fs::create_directories(parent);
        std::random_device rd;
        for (int attempt = 0; attempt < 100; ++attempt) {
            std::ostringstream name;
            name << '.' << destination_.filename().string() << ".partial-" << std::hex << rd();
            auto candidate = parent / name.str();
            if (fs::create_directory(candidate)) {
                staging_ = std::move(candidate);
                return;
            }
        }
        throw Error("cannot create a staging directory in " + parent.string());
    }
    StagedDir(const StagedDir&) = delete;
    StagedDir& operator=(const StagedDir&) = delete;
    ~StagedDir() {
        if (!committed_) {
            std::error_code ec;
            fs::remove_all(staging_, ec);
        }
    }

    const fs::path& path() const { return staging_; }

    void commit() {
        if (fs::exists(destination_)) fs::remove_all(destination_);
        fs::rename(staging_, destination_);
        committed_ = true;
    }

private:
    fs::path destination_;
    bool force_;
    fs::path staging_;
    bool committed_ = false;
};

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

void close_output(std::ofstream& out, const fs::path& path) {
    out.close();
    if (!out) throw Error("failed writing " + path.string());
}

void write_text(const fs::path& path, const std::string& text) {
    auto out = open_output(path);
    out << text;
    close_output(out, path);
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json metrics_json(const MetricsReport& r) {
    return {{"task", task_name(r.task)},
            {"hits1", r.hits1},
            {"hits10", r.hits10},
            {"mrr", r.mrr},
            {"pairs_evaluated", r.pairs_evaluated}};
}

json config_json(const EremConfig& c) {
    return {{"iterations", c.iterations},
            {"sinkhorn_reg", c.sinkhorn_reg},
            {"epsilon", c.epsilon},
            {"lambda", c.lambda},
            {"alpha", c.alpha},
            {"init_threshold", c.init_threshold},
            {"disable_e_enhancement", c.ablation.disable_e_enhancement},
            {"disable_m_enhancement", c.ablation.disable_m_enhancement},
            {"max_sinkhorn_iters", c.max_sinkhorn_iters},
            {"sinkhorn_tol", c.sinkhorn_tol},
            {"candidate_count", c.candidate_count}};
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

std::string or_default(const std::string& value, const std::string& dir, const char* file) {
    return value.empty() ? (fs::path(dir) / file).string() : value;
}

// Flags shared by the commands that run the engine.
struct EngineArgs {
    std::string source_dir;
    std::string target_dir;
    std::string source_ent_emb;
    std::string target_ent_emb;
    std::string source_rel_emb;
    std::string target_rel_emb;
    std::string config_path;
    std::string oracle_replay;
    std::string truth_entities;
    std::string truth_relations;
    std::optional<int> iterations;
    bool disable_e = false;
    bool disable_m = false;
    std::string out;
    bool force = false;
};

void add_engine_flags(CLI::App& cmd, EngineArgs& a) {
    cmd.add_option("--source", a.source_dir, "Source graph bundle directory")->required();
    cmd.add_option("--target", a.target_dir, "Target graph bundle directory")->required();
    cmd.add_option("--source-ent-emb", a.source_ent_emb, "Source entity embeddings (default SOURCE/ent_emb.bin)");
    cmd.add_option("--target-ent-emb", a.target_ent_emb, "Target entity embeddings (default TARGET/ent_emb.bin)");
    cmd.add_option("--source-rel-emb", a.source_rel_emb, "Source relation embeddings (default SOURCE/rel_emb.bin)");
    cmd.add_option("--target-rel-emb", a.target_rel_emb, "Target relation embeddings (default TARGET/rel_emb.bin)");
    cmd.add_option("--config", a.config_path, "key=value configuration file");
    cmd.add_option("--iterations", a.iterations, "Override the iteration count");
    cmd.add_flag("--disable-e", a.disable_e, "Ablate hard entity derivation (-E)");
    cmd.add_flag("--disable-m", a.disable_m, "Ablate hard relation derivation (-M)");
    cmd.add_option("--oracle-replay", a.oracle_replay, "Replay store of oracle answers");
    cmd.add_option("--truth-entities", a.truth_entities, "Reference entity pairs (raw ids)");
    cmd.add_option("--truth-relations", a.truth_relations, "Reference relation pairs (raw ids)");
    cmd.add_option("--out", a.out, "Output directory")->required();
    cmd.add_flag("--force", a.force, "Replace an existing output directory");
}

struct LoadedInputs {
    EremConfig config;
    KnowledgeGraph source;
    KnowledgeGraph target;
    EmbeddingTable source_entities;
    EmbeddingTable target_entities;
    EmbeddingTable source_relations;
    EmbeddingTable target_relations;
    std::optional<GroundTruth> entity_truth;
    std::optional<GroundTruth> relation_truth;
    std::optional<ReplayOracle> oracle;
    InputLog files;

    EremInputs view() const {
        return {source, target, source_entities, target_entities, source_relations, target_relations};
    }
};

GroundTruth load_truth(const std::string& path, const IdTable& source, const IdTable& target) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open truth file " + path);
    return resolve_truth(read_raw_pairs(in, path), source, target);
}

KnowledgeGraph load_bundle(const std::string& dir, const char* side, InputLog& files) {
    if (!fs::is_directory(dir)) throw Error(std::string(side) + " bundle " + dir + " is not a directory");
    auto g = load_graph_bundle(dir);
    for (const char* file : {"ent_ids", "rel_ids", "triples"}) {
        files.add(std::string(side) + "." + file, (fs::path(dir) / file).string());
    }
    return g;
}

LoadedInputs load_inputs(const EngineArgs& a) {
    LoadedInputs in;
    if (!a.config_path.empty()) {
        in.config = load_config_file(a.config_path);
        in.files.add("config", a.config_path);
    }
    if (a.iterations) in.config.iterations = *a.iterations;
    in.config.ablation.disable_e_enhancement |= a.disable_e;
    in.config.ablation.disable_m_enhancement |= a.disable_m;
    validate(in.config);

    in.source = load_bundle(a.source_dir, "source", in.files);
    in.target = load_bundle(a.target_dir, "target", in.files);

    auto embedding = [&](const std::string& override_path, const std::string& dir, const char* file,
                         const char* role, std::size_t count) {
        const auto path = or_default(override_path, dir, file);
        if (!fs::exists(path)) throw Error(std::string(role) + " embedding file not found: " + path);
        auto table = load_embedding_table(path, count);
        in.files.add(role, path);
        return table;
    };
    in.source_entities = embedding(a.source_ent_emb, a.source_dir, "ent_emb.bin", "source.ent_emb",
                                   in.source.entity_count());
    in.target_entities = embedding(a.target_ent_emb, a.target_dir, "ent_emb.bin", "target.ent_emb",
                                   in.target.entity_count());
    in.source_relations = embedding(a.source_rel_emb, a.source_dir, "rel_emb.bin", "source.rel_emb",
                                    in.source.relation_count());
    in.target_relations = embedding(a.target_rel_emb, a.target_dir, "rel_emb.bin", "target.rel_emb",
                                    in.target.relation_count());
    if (in.source_entities.dim() != in.target_entities.dim() ||
        in.source_relations.dim() != in.target_relations.dim()) {
        throw ConsistencyError("source and target embeddings differ in dimension");
    }

    if (!a.truth_entities.empty()) {
        in.entity_truth = load_truth(a.truth_entities, in.source.entities(), in.target.entities());
        in.files.add("truth_entities", a.truth_entities);
    }
    if (!a.truth_relations.empty()) {
        in.relation_truth = load_truth(a.truth_relations, in.source.relations(), in.target.relations());
        in.files.add("truth_relations", a.truth_relations);
    }
    if (!a.oracle_replay.empty()) {
        in.oracle = ReplayOracle::load(a.oracle_replay);
        in.files.add("oracle_replay", a.oracle_replay);
    }
    return in;
}

EremHooks hooks_for(LoadedInputs& in) {
    EremHooks hooks;
    if (in.oracle) hooks.oracle = &*in.oracle;
    if (in.entity_truth) hooks.entity_truth = &*in.entity_truth;
    if (in.relation_truth) hooks.relation_truth = &*in.relation_truth;
    return hooks;
}

json report_json(const EremConfig& config, const EremResult& result, bool has_ea, bool has_ra) {
    json trace = json::array();
    json ea_steps = json::array();
    json ra_steps = json::array();
    for (const auto& r : result.trace) {
        trace.push_back({{"iteration", r.iteration},
                         {"entity_anchors", r.entity_anchors},
                         {"hard_entity_anchors", r.hard_entity_anchors},
                         {"relation_anchors", r.relation_anchors},
                         {"hard_relation_anchors", r.hard_relation_anchors},
                         {"objective_entity", finite_or_null(r.objective_entity)},
                         {"objective_relation", finite_or_null(r.objective_relation)},
                         {"objective_final", finite_or_null(r.objective_final)},
                         {"entity_sinkhorn_iterations", r.entity_sinkhorn_iters},
                         {"relation_sinkhorn_iterations", r.relation_sinkhorn_iters},
                         {"entity_sinkhorn_converged", r.entity_sinkhorn_converged},
                         {"relation_sinkhorn_converged", r.relation_sinkhorn_converged}});
        if (r.ea) {
            auto step = metrics_json(*r.ea);
            step["iteration"] = r.iteration;
            ea_steps.push_back(std::move(step));
        }
        if (r.ra) {
            auto step = metrics_json(*r.ra);
            step["iteration"] = r.iteration;
            ra_steps.push_back(std::move(step));
        }
    }
    json report = {{"ablation", ablation_label(config.ablation)},
                   {"iterations", config.iterations},
                   {"entity_anchors", result.entity_anchors.size()},
                   {"relation_anchors", result.relation_anchors.size()},
                   {"trace", std::move(trace)}};
    if (has_ea && !result.trace.empty()) {
        report["entity"] = metrics_json(*result.trace.back().ea);
        report["entity"]["per_iteration"] = std::move(ea_steps);
    }
    if (has_ra && !result.trace.empty()) {
        report["relation"] = metrics_json(*result.trace.back().ra);
        report["relation"]["per_iteration"] = std::move(ra_steps);
    }
    return report;
}

int cmd_align(const EngineArgs& a, bool dump_plans, std::ostream& out) {
    // Refuse an existing directory before doing any work.
    StagedDir staged(a.out, a.force);
    auto in = load_inputs(a);
    const auto result = run_erem(in.config, in.view(), hooks_for(in));
    const auto& dir = staged.path();

    {
        auto f = open_output(dir / "entity_anchors.tsv");
        write_anchor_dump(f, result.entity_anchors, in.source.entities(), in.target.entities());
        close_output(f, dir / "entity_anchors.tsv");
    }
    {
        auto f = open_output(dir / "relation_anchors.tsv");
        write_anchor_dump(f, result.relation_anchors, in.source.relations(), in.target.relations());
        close_output(f, dir / "relation_anchors.tsv");
    }
    std::vector<std::string> outputs = {"entity_anchors.tsv", "relation_anchors.tsv", "report.json",
                                        "config.txt"};
    if (dump_plans) {
        auto f = open_output(dir / "entity_plan.txt");
        write_embedding_text(f, result.entity_plan.values);
        close_output(f, dir / "entity_plan.txt");
        auto g = open_output(dir / "relation_plan.txt");
        write_embedding_text(g, result.relation_plan.values);
        close_output(g, dir / "relation_plan.txt");
        outputs.push_back("entity_plan.txt");
        outputs.push_back("relation_plan.txt");
    }
    const auto report = report_json(in.config, result, in.entity_truth.has_value(),
                                    in.relation_truth.has_value());
    write_text(dir / "report.json", report.dump(2) + "\n");
    write_text(dir / "config.txt", to_config_text(in.config));

    json outputs_json = json::array();
    for (const auto& name : outputs) {
        outputs_json.push_back({{"path", name}, {"sha256", sha256_file((dir / name).string())}});
    }
    const json manifest = {{"tool", "erem"},
                           {"version", EREM_VERSION},
                           {"timestamp", utc_timestamp()},
                           {"command", "align"},
                           {"config", config_json(in.config)},
                           {"inputs", in.files.to_json()},
                           {"outputs", std::move(outputs_json)}};
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    staged.commit();

    out << "wrote " << a.out << " (" << result.entity_anchors.size() << " entity anchors, "
        << result.relation_anchors.size() << " relation anchors)\n";
    if (report.contains("entity")) {
        out << "EA hits1=" << report["entity"]["hits1"].get<double>()
            << " hits10=" << report["entity"]["hits10"].get<double>()
            << " mrr=" << report["entity"]["mrr"].get<double>() << '\n';
    }
    if (report.contains("relation")) {
        out << "RA hits1=" << report["relation"]["hits1"].get<double>()
            << " hits10=" << report["relation"]["hits10"].get<double>()
            << " mrr=" << report["relation"]["mrr"].get<double>() << '\n';
    }
    return kExitOk;
}

// Records every query and forwards to a replay store when one is given.
class RecordingOracle final : public AnchorOracle {
public:
    explicit RecordingOracle(const ReplayOracle* replay) : replay_(replay) {}
    OracleAnswer answer(const OracleQuery& query) override {
        queries_.push_back(query);
        return replay_ ? replay_->lookup(query) : OracleAnswer::none();
    }
    const std::vector<OracleQuery>& queries() const { return queries_; }

private:
    const ReplayOracle* replay_;
    std::vector<OracleQuery> queries_;
};

std::string safe_file_token(const std::string& s) {
    std::string out;
    for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-') ? c : '_';
    return out;
}

int cmd_export_prompts(const EngineArgs& a, std::size_t k, std::ostream& out) {
    if (k == 0) throw UsageError("--k must be at least 1");
    StagedDir staged(a.out, a.force);
    auto in = load_inputs(a);
    in.config.candidate_count = k;
    RecordingOracle recorder(in.oracle ? &*in.oracle : nullptr);
    auto hooks = hooks_for(in);
    hooks.oracle = &recorder;
    run_erem(in.config, in.view(), hooks);

    std::vector<OracleQuery> queries;
    queries.push_back(OracleQuery{});
    queries.insert(queries.end(), recorder.queries().begin(), recorder.queries().end());

    const auto& dir = staged.path();
    auto index = open_output(dir / "index.tsv");
    index << "file\tstep\tsubject_id\tcounterpart_id\tcandidates\n";
    for (std::size_t n = 0; n < queries.size(); ++n) {
        const auto& q = queries[n];
        std::ostringstream name;
        name << std::setw(6) << std::setfill('0') << n << '_' << step_name(q.step);
        if (q.step != OracleStep::task_description) name << '_' << safe_file_token(q.subject.id);
        name << ".txt";
        write_text(dir / name.str(), build_prompt(q) + "\n");
        index << name.str() << '\t' << step_name(q.step) << '\t' << q.subject.id << '\t'
              << (q.counterpart ? q.counterpart->id : "") << '\t';
        for (std::size_t c = 0; c < q.candidates.size(); ++c) {
            index << (c ? "," : "") << q.candidates[c].id;
        }
        index << '\n';
    }
    close_output(index, dir / "index.tsv");
    staged.commit();
    out << "wrote " << queries.size() << " prompts to " << a.out << '\n';
    return kExitOk;
}

struct EvalArgs {
    std::string anchors;
    std::string plan;
    std::string truth;
    std::string task = "EA";
    std::string source_dir;
    std::string target_dir;
};

Task parse_task(const std::string& s) {
    if (s == "EA") return Task::EA;
    if (s == "RA") return Task::RA;
    throw UsageError("--task must be EA or RA");
}

std::vector<std::pair<RawId, RawId>> read_truth_raw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open truth file " + path);
    return read_raw_pairs(in, path);
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
    if (a.anchors.empty() == a.plan.empty()) throw UsageError("give exactly one of --anchors or --plan");
    const Task task = parse_task(a.task);
    const auto raw_truth = read_truth_raw(a.truth);
    MetricsReport report;

    if (!a.anchors.empty()) {
        std::ifstream in(a.anchors, std::ios::binary);
        if (!in) throw Error("cannot open anchor dump " + a.anchors);
        const auto anchors = read_anchor_dump(in, a.anchors);
        // Dense local indices over every raw id seen on each side.
        std::map<RawId, Index> src_index;
        std::map<RawId, Index> tgt_index;
        auto intern = [](std::map<RawId, Index>& m, RawId id) {
            return m.emplace(id, static_cast<Index>(m.size())).first->second;
        };
        std::vector<std::pair<Index, Index>> truth_pairs;
        for (const auto& [s, t] : raw_truth) truth_pairs.emplace_back(intern(src_index, s), intern(tgt_index, t));
        const GroundTruth truth(std::move(truth_pairs));
        Rankings rankings;
        for (const auto& p : anchors) {
            const auto s = intern(src_index, p.source);
            if (rankings.contains(s)) throw FormatError(a.anchors + ": source " + std::to_string(p.source) + " listed twice");
            rankings[s] = {intern(tgt_index, p.target)};
        }
        report = {task, hits_at_k(rankings, truth, 1), hits_at_k(rankings, truth, 10),
                  mrr(rankings, truth), truth.size()};
    } else {
        const auto plan = load_embedding_table(a.plan).values();
        GroundTruth truth;
        if (!a.source_dir.empty() || !a.target_dir.empty()) {
            if (a.source_dir.empty() || a.target_dir.empty()) {
                throw UsageError("--source and --target go together");
            }
            const auto g = load_graph_bundle(a.source_dir);
            const auto gp = load_graph_bundle(a.target_dir);
            truth = task == Task::EA ? resolve_truth(raw_truth, g.entities(), gp.entities())
                                     : resolve_truth(raw_truth, g.relations(), gp.relations());
        } else {
            std::vector<std::pair<Index, Index>> pairs;
            for (const auto& [s, t] : raw_truth) {
                if (s >= static_cast<RawId>(plan.rows()) || t >= static_cast<RawId>(plan.cols())) {
                    throw ReferentialError("truth pair (" + std::to_string(s) + ", " + std::to_string(t) +
                                           ") lies outside the plan; pass --source/--target to map raw ids");
                }
                pairs.emplace_back(static_cast<Index>(s), static_cast<Index>(t));
            }
            truth = GroundTruth(std::move(pairs));
        }
        const Matrix no_fallback = Matrix::Zero(plan.rows(), plan.cols());
        report = evaluate_plan(task, plan, no_fallback, truth);
    }
    out << metrics_json(report).dump() << '\n';
    return kExitOk;
}

struct SynthArgs {
    SynthSpec spec;
    std::string out;
    bool force = false;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
    try {
        validate(a.spec);
    } catch (const ArgumentError& e) {
        throw UsageError(e.what());
    }
    StagedDir staged(a.out, a.force);
    const auto pair = generate_pair(a.spec);
    write_bundle(pair, staged.path().string());
    staged.commit();
    out << "wrote " << a.out << ": " << pair.source.triple_count() << " source triples, "
        << pair.target.triple_count() << " target triples (" << pair.dropped_triples << " dropped)\n";
    return kExitOk;
}

struct InspectArgs {
    std::string source_dir;
    std::string target_dir;
    std::string anchors;
};

json graph_stats(const KnowledgeGraph& g) {
    const auto rkg = kgt_transform(g);
    std::size_t max_degree = 0;
    std::size_t isolated = 0;
    for (Index e = 0; e < g.entity_count(); ++e) {
        const auto d = g.degree(e);
        max_degree = std::max(max_degree, d);
        if (d == 0) ++isolated;
    }
    return {{"entities", g.entity_count()},
            {"relations", g.relation_count()},
            {"triples", g.triple_count()},
            {"relation_triples", rkg.triples().size()},
            {"mean_degree", g.entity_count() ? 2.0 * static_cast<double>(g.triple_count()) /
                                                   static_cast<double>(g.entity_count())
                                             : 0.0},
            {"max_degree", max_degree},
            {"isolated_entities", isolated}};
}

int cmd_inspect(const InspectArgs& a, std::ostream& out) {
    if (a.source_dir.empty() && a.target_dir.empty() && a.anchors.empty()) {
        throw UsageError("nothing to inspect; give --source, --target or --anchors");
    }
    json report = json::object();
    if (!a.source_dir.empty()) report["source"] = graph_stats(load_graph_bundle(a.source_dir));
    if (!a.target_dir.empty()) report["target"] = graph_stats(load_graph_bundle(a.target_dir));
    if (!a.anchors.empty()) {
        std::ifstream in(a.anchors, std::ios::binary);
        if (!in) throw Error("cannot open anchor dump " + a.anchors);
        const auto anchors = read_anchor_dump(in, a.anchors);
        const auto hard = std::count_if(anchors.begin(), anchors.end(),
                                        [](const RawAnchor& p) { return p.tier == Tier::hard; });
        report["anchors"] = {{"pairs", anchors.size()}, {"hard", hard},
                             {"normal", anchors.size() - static_cast<std::size_t>(hard)}};
    }
    out << report.dump(2) << '\n';
    return kExitOk;
}

}  // namespace

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path + " for hashing");
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256 init failed");
    std::array<char, 1 << 16> buffer{};
    while (in) {
        in.read(buffer.data(), buffer.size());
        if (in.gcount() > 0 && EVP_DigestUpdate(ctx.get(), buffer.data(), static_cast<std::size_t>(in.gcount())) != 1) {
            throw Error("sha256 update failed");
        }
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int length = 0;
    if (EVP_DigestFinal_ex(ctx.get(), digest.data(), &length) != 1) throw Error("sha256 final failed");
    std::ostringstream hex;
    for (unsigned int i = 0; i < length; ++i) {
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return hex.str();
}

void configure_logging() {
    auto logger = spdlog::get("erem");
    if (!logger) logger = spdlog::stderr_color_mt("erem");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* level = std::getenv("EREM_LOG")) {
        const std::string name(level);
        if (name == "error") spdlog::set_level(spdlog::level::err);
        else if (name == "warn") spdlog::set_level(spdlog::level::warn);
        else if (name == "info") spdlog::set_level(spdlog::level::info);
        else if (name == "debug") spdlog::set_level(spdlog::level::debug);
        else spdlog::warn("EREM_LOG={} not recognized; using warn", name);
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Entity and relation alignment by iterative anchor refinement", "erem"};
    app.require_subcommand(1);
    app.set_version_flag("--version", EREM_VERSION);

    EngineArgs align_args;
    bool dump_plans = false;
    auto* align = app.add_subcommand("align", "Align two graph bundles");
    add_engine_flags(*align, align_args);
    align->add_flag("--dump-plans", dump_plans, "Also write the final transport plans");

    EngineArgs prompt_args;
    std::size_t k = 10;
    auto* prompts = app.add_subcommand("export-prompts", "Write one prompt file per oracle query");
    add_engine_flags(*prompts, prompt_args);
    prompts->add_option("--k", k, "Candidate list length")->capture_default_str();

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "Score an anchor dump or plan against reference pairs");
    eval->add_option("--anchors", eval_args.anchors, "Anchor dump (src<TAB>tgt<TAB>tier)");
    eval->add_option("--plan", eval_args.plan, "Plan matrix in embedding text or EREMEMB1 form");
    eval->add_option("--truth", eval_args.truth, "Reference pairs (raw ids)")->required();
    eval->add_option("--task", eval_args.task, "EA or RA")->capture_default_str();
    eval->add_option("--source", eval_args.source_dir, "Source bundle for raw id mapping (plans)");
    eval->add_option("--target", eval_args.target_dir, "Target bundle for raw id mapping (plans)");

    SynthArgs synth_args;
    auto& spec = synth_args.spec;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic bundle pair with reference pairs");
    synth->add_option("--entities", spec.entity_count, "Entities per graph")->capture_default_str();
    synth->add_option("--relations", spec.relation_count, "Relations per graph")->capture_default_str();
    synth->add_option("--triples", spec.triple_count, "Source triples")->capture_default_str();
    synth->add_option("--seed", spec.seed, "PRNG seed")->capture_default_str();
    synth->add_option("--dim", spec.embedding_dim, "Embedding dimension")->capture_default_str();
    synth->add_option("--sigma", spec.embedding_noise_sigma, "Target embedding noise")->capture_default_str();
    synth->add_option("--dropout", spec.triple_dropout, "Target triple dropout in [0,1)")->capture_default_str();
    synth->add_option("--name-scheme", spec.name_scheme, "Name pattern")->capture_default_str();
    synth->add_option("--out", synth_args.out, "Output directory")->required();
    synth->add_flag("--force", synth_args.force, "Replace an existing output directory");

    InspectArgs inspect_args;
    auto* inspect = app.add_subcommand("inspect", "Print graph and anchor statistics");
    inspect->add_option("--source", inspect_args.source_dir, "Graph bundle directory");
    inspect->add_option("--target", inspect_args.target_dir, "Second graph bundle directory");
    inspect->add_option("--anchors", inspect_args.anchors, "Anchor dump");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << EREM_VERSION << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*align) return cmd_align(align_args, dump_plans, out);
        if (*prompts) return cmd_export_prompts(prompt_args, k, out);
        if (*eval) return cmd_eval(eval_args, out);
        if (*synth) return cmd_synth(synth_args, out);
        if (*inspect) return cmd_inspect(inspect_args, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace erem::cli
