#pragma once

#include "circlefact/common.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace circlefact::cli {

// Schema or parse failure; maps to exit code 2.
class ConfigError : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitPrecondition = 2;
inline constexpr int kExitNumerical = 3;

const std::vector<std::string>& command_names();

// Root-coordinate specification.
//   terms: explicit w_1, w_2, ... (optionally applied in a custom ordering)
//   rule: deterministic magnitude rule such as "0.4/n@2"
//   random_phases: rule magnitudes with independent uniform phases
//   beta: |w_n|^2 ~ Beta(1, a_n), a_n = beta_slope * n + beta_offset, uniform phases
struct ModelSpec {
    std::string kind = "terms";
    std::vector<cplx> terms;
    std::vector<std::size_t> ordering;
    std::string rule;
    double beta_slope = 1.0;
    double beta_offset = 0.0;

    bool operator==(const ModelSpec&) const = default;
};

// One factor of a word: index 0 is a rotation by value, index n >= 1 is phi_n(value).
struct WordItem {
    unsigned n = 0;
    cplx value{1.0, 0.0};

    bool operator==(const WordItem&) const = default;
};

using ChainSpec = std::vector<WordItem>;

struct ExperimentConfig {
    std::string command;
    std::optional<ModelSpec> model;
    std::size_t grid = 4096;
    std::vector<std::size_t> truncation;
    std::uint64_t seed = 0;
    double tol = 1e-8;
    std::size_t trials = 200;
    double theta = 0.0;
    double x0 = 0.01;
    std::string output = ".";
    // derive
    unsigned order = 4;
    // mc
    std::string mode = "collapse";
    double threshold = 1e-6;
    // weld
    std::string method = "solve";
    std::size_t m_start = 32;
    std::size_t m_max = 256;
    // opuc
    std::vector<cplx> alphas;
    std::size_t coefficients = 8;
    // word
    ChainSpec word;
    // cocycle
    std::vector<ChainSpec> chains;

    bool operator==(const ExperimentConfig&) const = default;
};

// Parses and validates; fills defaults. `source` and `text` are used for line context.
ExperimentConfig parse_config(const nlohmann::json& j, const std::string& source = "<config>",
                              const std::string& text = "");
ExperimentConfig parse_config_text(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

// Canonical JSON for a config: keys relevant to its command, defaults explicit,
// complex numbers as [re, im].
nlohmann::json serialize(const ExperimentConfig& cfg);
nlohmann::json normalize(const nlohmann::json& j);

// Default configuration for a command.
ExperimentConfig default_config(const std::string& command);

struct RunOutput {
    std::string csv;
    nlohmann::json summary;
};

// Runs a validated config; `threads` bounds Monte Carlo workers.
RunOutput run(const ExperimentConfig& cfg, unsigned threads = 1);

// Writes <out>/<command>.csv and <out>/<command>.json.
void write_outputs(const ExperimentConfig& cfg, const RunOutput& out, const std::string& out_dir);

// Full pipeline with exit-code mapping; errors go to `err`.
int run_command(const ExperimentConfig& cfg, const std::string& out_dir, unsigned threads,
                std::ostream& err);

// 17 significant digits.
std::string format_double(double x);

// Reads CIRCLEFACT_THREADS; defaults to hardware concurrency.
unsigned threads_from_env();

} // namespace circlefact::cli
