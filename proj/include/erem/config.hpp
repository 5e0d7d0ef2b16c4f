#pragma once

#include <istream>
#include <string>

namespace erem {

struct AblationFlags {
    /// (-E): skip deriving hard entity anchors from relation anchors.
    bool disable_e_enhancement = false;
    /// (-M): skip deriving hard relation anchors from hard entity anchors.
    bool disable_m_enhancement = false;

    friend bool operator==(const AblationFlags&, const AblationFlags&) = default;
};

struct EremConfig {
    int iterations = 8;
    double sinkhorn_reg = 0.1;
    double epsilon = 1e-5;
    /// Weight of the hard-anchor term in the reported objectives, in [0, 1].
    double lambda = 1.0;
    double alpha = 2.0;
    double init_threshold = 0.3;
    AblationFlags ablation;
    int max_sinkhorn_iters = 1000;
    double sinkhorn_tol = 1e-9;
    /// Candidate list length for oracle queries.
    std::size_t candidate_count = 10;

    friend bool operator==(const EremConfig&, const EremConfig&) = default;
};

/// Throws ConfigError naming the first offending field.
void validate(const EremConfig& config);

/// "key=value" lines; '#' starts a comment. Unknown keys are rejected and
/// missing keys keep their defaults.
EremConfig load_config(std::istream& in);
EremConfig load_config_file(const std::string& path);

/// Serializes every file-settable key, one per line, in a stable order.
std::string to_config_text(const EremConfig& config);

/// "full", "(-E)", "(-M)" or "(-E,-M)".
std::string ablation_label(const AblationFlags& flags);

}  // namespace erem
