#include "skipsim/data_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace skipsim {

namespace {

double standard_normal(RngStream& stream) {
    double u1 = stream.uniform();
    const double u2 = stream.uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& why) {
    throw std::runtime_error("libsvm parse error at line " + std::to_string(line_no) + ": " + why);
}

} // namespace

Dataset parse_libsvm(std::string_view text) {
    Dataset ds;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        const std::size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);

        std::istringstream in{std::string(line)};
        std::string token;
        if (!(in >> token)) continue; // blank line

        Dataset::Sample sample;
        if (token == "+1" || token == "1") {
            sample.label = 1.0;
        } else if (token == "-1" || token == "0") {
            sample.label = -1.0;
        } else {
            parse_fail(line_no, "label must be one of -1, +1, 0, 1 (got '" + token + "')");
        }

        std::size_t prev_index = 0;
        while (in >> token) {
            const std::size_t colon = token.find(':');
            if (colon == std::string::npos) parse_fail(line_no, "expected <index>:<value>");
            std::size_t idx = 0;
            double val = 0.0;
            try {
                idx = std::stoull(token.substr(0, colon));
                val = std::stod(token.substr(colon + 1));
            } catch (const std::exception&) {
                parse_fail(line_no, "malformed feature token '" + token + "'");
            }
            if (idx < 1) parse_fail(line_no, "feature indices start at 1");
            if (idx <= prev_index) parse_fail(line_no, "feature indices must be strictly increasing");
            prev_index = idx;
            sample.features.emplace_back(idx - 1, val);
            ds.dim = std::max(ds.dim, idx);
        }
        ds.samples.push_back(std::move(sample));
    }
    return ds;
}

std::string serialize_libsvm(const Dataset& ds) {
    std::ostringstream out;
    out.precision(17);
    for (const auto& s : ds.samples) {
        out << (s.label > 0.0 ? "+1" : "-1");
        for (const auto& [idx, val] : s.features) out << ' ' << (idx + 1) << ':' << val;
        out << '\n';
    }
    return out.str();
}

Dataset load_libsvm_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_libsvm(buf.str());
}

std::vector<Dataset> partition(const Dataset& ds, std::size_t n) {
    if (n == 0 || n > ds.samples.size()) {
        throw std::invalid_argument("partition: need 1 <= n <= sample count");
    }
    const std::size_t base = ds.samples.size() / n;
    std::vector<Dataset> shards(n);
    std::size_t at = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t count = i + 1 == n ? ds.samples.size() - at : base;
        shards[i].dim = ds.dim;
        shards[i].samples.assign(ds.samples.begin() + static_cast<std::ptrdiff_t>(at),
                                 ds.samples.begin() + static_cast<std::ptrdiff_t>(at + count));
        at += count;
    }
    return shards;
}

LocalObjective objective_from_shard(const Dataset& shard, double reg_lambda, bool normalize) {
    std::vector<double> scale(shard.dim, 1.0);
    if (normalize) {
        std::vector<double> max_abs(shard.dim, 0.0);
        for (const auto& s : shard.samples) {
            for (const auto& [idx, val] : s.features) {
                max_abs[idx] = std::max(max_abs[idx], std::abs(val));
            }
        }
        for (std::size_t j = 0; j < shard.dim; ++j) {
            if (max_abs[j] > 0.0) scale[j] = 1.0 / max_abs[j];
        }
    }
    std::vector<LogisticSample> samples;
    samples.reserve(shard.samples.size());
    for (const auto& s : shard.samples) {
        LogisticSample ls;
        ls.features.assign(shard.dim, 0.0);
        for (const auto& [idx, val] : s.features) ls.features[idx] = val * scale[idx];
        ls.label = s.label;
        samples.push_back(std::move(ls));
    }
    return LocalObjective::logistic(std::move(samples), reg_lambda);
}

std::vector<double> heterogeneous_profile(std::size_t n, double l_large, double lo, double hi,
                                          std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("heterogeneous_profile: n must be >= 1");
    if (!(lo > 0.0 && hi >= lo)) throw std::invalid_argument("heterogeneous_profile: need 0 < lo <= hi");
    RngStream stream(seed, 0, "profile");
    std::vector<double> out(n);
    out[0] = l_large;
    for (std::size_t i = 1; i < n; ++i) out[i] = lo + (hi - lo) * stream.uniform();
    return out;
}

std::vector<LocalObjective> synthesize_quadratics(std::size_t n, std::size_t d,
                                                  const std::vector<double>& targets, double mu,
                                                  std::uint64_t seed) {
    if (n == 0 || d == 0 || targets.size() != n) {
        throw std::invalid_argument("synthesize_quadratics: bad n/d/targets");
    }
    std::vector<LocalObjective> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(targets[i] >= mu)) {
            throw std::invalid_argument("synthesize_quadratics: target L_i must be >= mu");
        }
        RngStream stream(seed, static_cast<std::uint32_t>(i), "quad-gen");
        Vector v(d);
        for (double& e : v) e = standard_normal(stream);
        const double shift = 2.0 * stream.uniform() - 1.0;
        out.push_back(LocalObjective::quadratic(mu, targets[i], std::move(v), shift));
    }
    return out;
}

std::vector<LocalObjective> synthesize_logistic(std::size_t n, std::size_t d,
                                                const std::vector<double>& targets,
                                                double reg_lambda, std::size_t samples_per_client,
                                                std::uint64_t seed) {
    if (n == 0 || d == 0 || targets.size() != n || samples_per_client == 0) {
        throw std::invalid_argument("synthesize_logistic: bad n/d/targets/samples");
    }
    std::vector<LocalObjective> out;
    out.reserve(n);
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    for (std::size_t i = 0; i < n; ++i) {
        if (!(targets[i] > reg_lambda)) {
            throw std::invalid_argument("synthesize_logistic: target L_i must exceed reg_lambda");
        }
        RngStream stream(seed, static_cast<std::uint32_t>(i), "logistic-gen");
        std::vector<LogisticSample> samples(samples_per_client);
        for (auto& s : samples) {
            s.features.resize(d);
            for (double& f : s.features) f = standard_normal(stream) * inv_sqrt_d;
            s.label = stream.flip(0.5) ? 1.0 : -1.0;
        }
        // The certified L is lambda_max of the scaled Gram plus lambda; it
        // scales quadratically in the feature scale, so one rescale is exact.
        const LocalObjective probe = LocalObjective::logistic(samples, reg_lambda);
        const double data_term = probe.smoothness_constant() - reg_lambda;
        if (!(data_term > 0.0)) {
            throw std::runtime_error("synthesize_logistic: degenerate features");
        }
        const double alpha = std::sqrt((targets[i] - reg_lambda) / data_term);
        for (auto& s : samples) {
            for (double& f : s.features) f *= alpha;
        }
        out.push_back(LocalObjective::logistic(std::move(samples), reg_lambda));
    }
    return out;
}

} // namespace skipsim
