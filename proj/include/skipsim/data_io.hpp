#ifndef SKIPSIM_DATA_IO_HPP
#define SKIPSIM_DATA_IO_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "skipsim/problems.hpp"

namespace skipsim {

/// Sparse binary-classification dataset. Indices are 0-based internally
/// (LibSVM text is 1-based), labels are -1/+1.
struct Dataset {
    struct Sample {
        std::vector<std::pair<std::size_t, double>> features; // strictly increasing indices
        double label = 0.0;
    };
    std::vector<Sample> samples;
    std::size_t dim = 0;
};

/// Parses LibSVM text: "<label> <idx>:<val> ...". Accepts -1/+1 and 0/1 label
/// conventions, LF or CRLF line endings, and '#' comments at line end.
/// Throws std::runtime_error with the line number on malformed input.
Dataset parse_libsvm(std::string_view text);

std::string serialize_libsvm(const Dataset& ds);

Dataset load_libsvm_file(const std::string& path);

/// Contiguous equal-size shards, remainder to the last shard.
std::vector<Dataset> partition(const Dataset& ds, std::size_t n);

/// Dense logistic objective from a shard. With normalize, features are scaled
/// per coordinate into [-1,1] using the shard's own maxima.
LocalObjective objective_from_shard(const Dataset& shard, double reg_lambda, bool normalize);

/// Smoothness-target profile: one client pinned at l_large, the rest drawn
/// from Uniform(lo, hi). Deterministic in the seed.
std::vector<double> heterogeneous_profile(std::size_t n, double l_large, double lo, double hi,
                                          std::uint64_t seed);

/// n quadratics with exact constants (mu, L_i = targets[i]).
std::vector<LocalObjective> synthesize_quadratics(std::size_t n, std::size_t d,
                                                  const std::vector<double>& targets, double mu,
                                                  std::uint64_t seed);

/// n logistic objectives whose certified L_i hit the targets by rescaling the
/// generated features (L scales quadratically with feature scale). Requires
/// targets[i] > reg_lambda.
std::vector<LocalObjective> synthesize_logistic(std::size_t n, std::size_t d,
                                                const std::vector<double>& targets,
                                                double reg_lambda, std::size_t samples_per_client,
                                                std::uint64_t seed);

} // namespace skipsim

#endif
