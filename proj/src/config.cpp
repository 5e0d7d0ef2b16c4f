#include "erem/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "erem/error.hpp"

namespace erem {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double parse_real(const std::string& key, const std::string& value) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size() || !std::isfinite(v)) {
        throw ConfigError(key, "expected a real number, got '" + value + "'");
    }
    return v;
}

int parse_int(const std::string& key, const std::string& value) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ConfigError(key, "expected an integer, got '" + value + "'");
    }
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError(key, "expected true/false, got '" + value + "'");
}

std::string format_real(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

void validate(const EremConfig& c) {
    if (c.iterations < 1) throw ConfigError("iterations", "must be >= 1");
    if (!(c.sinkhorn_reg > 0.0)) throw ConfigError("sinkhorn_reg", "must be positive");
    if (!(c.epsilon > 0.0)) throw ConfigError("epsilon", "must be positive");
    if (!(c.lambda >= 0.0 && c.lambda <= 1.0)) throw ConfigError("lambda", "must lie in [0, 1]");
    if (!(c.alpha >= 1.0)) throw ConfigError("alpha", "must be >= 1");
    if (!(c.init_threshold > 0.0)) throw ConfigError("init_threshold", "must be positive");
    if (c.max_sinkhorn_iters < 1) throw ConfigError("max_sinkhorn_iters", "must be >= 1");
    if (!(c.sinkhorn_tol > 0.0)) throw ConfigError("sinkhorn_tol", "must be positive");
    if (c.candidate_count < 1) throw ConfigError("candidate_count", "must be >= 1");
}

EremConfig load_config(std::istream& in) {
    EremConfig c;
    std::set<std::string> seen;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto text = trim(line);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(text, "line " + std::to_string(number) + " is not key=value");
        }
        const auto key = trim(std::string_view(text).substr(0, eq));
        const auto value = trim(std::string_view(text).substr(eq + 1));
        if (!seen.insert(key).second) throw ConfigError(key, "given more than once");

        if (key == "iterations") c.iterations = parse_int(key, value);
        else if (key == "sinkhorn_reg") c.sinkhorn_reg = parse_real(key, value);
        else if (key == "epsilon") c.epsilon = parse_real(key, value);
        else if (key == "lambda") c.lambda = parse_real(key, value);
        else if (key == "alpha") c.alpha = parse_real(key, value);
        else if (key == "init_threshold") c.init_threshold = parse_real(key, value);
        else if (key == "disable_e_enhancement") c.ablation.disable_e_enhancement = parse_bool(key, value);
        else if (key == "disable_m_enhancement") c.ablation.disable_m_enhancement = parse_bool(key, value);
        else if (key == "max_sinkhorn_iters") c.max_sinkhorn_iters = parse_int(key, value);
        else if (key == "sinkhorn_tol") c.sinkhorn_tol = parse_real(key, value);
        else throw ConfigError(key, "unknown key");
    }
    validate(c);
    return c;
}

EremConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open " + path);
    return load_config(in);
}

std::string to_config_text(const EremConfig& c) {
    std::ostringstream out;
    out << "iterations=" << c.iterations << '\n'
        << "sinkhorn_reg=" << format_real(c.sinkhorn_reg) << '\n'
        << "epsilon=" << format_real(c.epsilon) << '\n'
        << "lambda=" << format_real(c.lambda) << '\n'
        << "alpha=" << format_real(c.alpha) << '\n'
        << "init_threshold=" << format_real(c.init_threshold) << '\n'
        << "disable_e_enhancement=" << (c.ablation.disable_e_enhancement ? "true" : "false") << '\n'
        << "disable_m_enhancement=" << (c.ablation.disable_m_enhancement ? "true" : "false") << '\n'
        << "max_sinkhorn_iters=" << c.max_sinkhorn_iters << '\n'
        << "sinkhorn_tol=" << format_real(c.sinkhorn_tol) << '\n';
    return out.str();
}

std::string ablation_label(const AblationFlags& flags) {
    if (flags.disable_e_enhancement && flags.disable_m_enhancement) return "(-E,-M)";
    if (flags.disable_e_enhancement) return "(-E)";
    if (flags.disable_m_enhancement) return "(-M)";
    return "full";
}

}  // namespace erem
