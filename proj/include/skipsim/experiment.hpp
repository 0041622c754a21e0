#ifndef SKIPSIM_EXPERIMENT_HPP
#define SKIPSIM_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skipsim/methods.hpp"
#include "skipsim/problems.hpp"
#include "skipsim/trace.hpp"

namespace skipsim {

struct MethodEntry {
    Method method = Method::gradskip;
    bool derived = true; // explicit overrides below when false
    std::optional<double> gamma;
    std::optional<double> p;
    std::optional<std::vector<double>> q;
};

/// Parsed experiment description. Sections: [problem], repeated [method],
/// [run], [output]; "key = value" lines, '#' comments. See README for the
/// full grammar.
struct ExperimentConfig {
    // [problem]
    std::string kind;                   // quadratic | logistic | libsvm
    std::size_t n = 0;
    std::size_t d = 0;
    double lambda = 0.1;                // strong-convexity / regularization weight
    double l_large = 0.0;               // smoothness profile: one client pinned here
    double l_lo = 0.0;
    double l_hi = 0.0;
    std::uint64_t problem_seed = 1;
    std::size_t samples_per_client = 100;
    std::string data_path;              // libsvm only
    bool normalize = true;              // libsvm only

    std::vector<MethodEntry> methods;

    // [run]
    std::uint64_t T = 0;
    std::vector<std::uint64_t> seeds;
    bool strict_stepsize = true;
    std::string times_profile = "uniform"; // uniform | random | t-opt
    double t_com = 1.0;
    double target = 1e-9;               // psi_t/psi_0 threshold for round counting

    // [output]
    std::string out_dir = "out";
};

std::string method_name(Method m);
Method method_from_name(const std::string& name);

/// Throws std::invalid_argument listing every violation found.
ExperimentConfig parse_experiment_config(std::string_view text);
ExperimentConfig load_experiment_config(const std::string& path);

/// Builds the shared problem instance described by the [problem] section.
LiftedObjective build_problem(const ExperimentConfig& cfg);

/// Stable one-line description of the problem; traces from different
/// problems carry different tags and refuse to aggregate.
std::string problem_tag(const ExperimentConfig& cfg);

std::string trace_to_csv(const Trace& trace, const std::string& tag, const std::string& method,
                         std::uint64_t seed, double target);

struct ExperimentResult {
    std::vector<std::string> trace_files;
    std::string summary_file;
};

/// Runs every (method, seed) pair on the shared problem, writes one trace CSV
/// per pair plus summary.csv. The SKIPSIM_OUT_DIR environment variable
/// overrides the configured output directory.
ExperimentResult run_experiment(const std::string& config_path);

/// Re-aggregates a directory of trace files into summary.csv. Throws on
/// traces with mismatched problem tags.
std::string emit_summary(const std::string& trace_dir);

} // namespace skipsim

#endif
