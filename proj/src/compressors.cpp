#include "skipsim/compressors.hpp"

#include <cmath>
#include <stdexcept>

namespace skipsim {

CompressorSpec CompressorSpec::identity(std::size_t dim) {
    CompressorSpec c;
    c.kind_ = Kind::identity;
    c.dim_ = dim;
    return c;
}

CompressorSpec CompressorSpec::bernoulli(double p, std::size_t dim) {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("bernoulli compressor: p must lie in (0,1]");
    CompressorSpec c;
    c.kind_ = Kind::bernoulli;
    c.dim_ = dim;
    c.probs_ = {p};
    return c;
}

CompressorSpec CompressorSpec::coordinate_prob(std::vector<double> probs) {
    for (double p : probs) {
        if (!(p > 0.0 && p <= 1.0)) {
            throw std::invalid_argument("coordinate_prob compressor: probabilities must lie in (0,1]");
        }
    }
    CompressorSpec c;
    c.kind_ = Kind::coordinate_prob;
    c.dim_ = probs.size();
    c.probs_ = std::move(probs);
    return c;
}

CompressorSpec CompressorSpec::block_bernoulli(std::vector<double> block_probs, std::size_t block_dim) {
    if (block_dim == 0) throw std::invalid_argument("block_bernoulli compressor: block_dim must be positive");
    for (double p : block_probs) {
        if (!(p > 0.0 && p <= 1.0)) {
            throw std::invalid_argument("block_bernoulli compressor: probabilities must lie in (0,1]");
        }
    }
    CompressorSpec c;
    c.kind_ = Kind::block_bernoulli;
    c.dim_ = block_probs.size() * block_dim;
    c.block_dim_ = block_dim;
    c.probs_ = std::move(block_probs);
    return c;
}

std::size_t CompressorSpec::stream_count() const {
    return kind_ == Kind::block_bernoulli ? probs_.size() : (kind_ == Kind::identity ? 0 : 1);
}

Vector CompressorSpec::apply_pattern(const Vector& x, std::uint32_t pattern) const {
    switch (kind_) {
    case Kind::identity:
        return x;
    case Kind::bernoulli:
        return (pattern & 1u) ? scale(1.0 / probs_[0], x) : Vector(x.size(), 0.0);
    case Kind::coordinate_prob: {
        Vector out(x.size(), 0.0);
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (pattern & (1u << j)) out[j] = x[j] / probs_[j];
        }
        return out;
    }
    case Kind::block_bernoulli: {
        Vector out(x.size(), 0.0);
        for (std::size_t i = 0; i < probs_.size(); ++i) {
            if (pattern & (1u << i)) {
                for (std::size_t j = 0; j < block_dim_; ++j) {
                    out[i * block_dim_ + j] = x[i * block_dim_ + j] / probs_[i];
                }
            }
        }
        return out;
    }
    }
    throw std::logic_error("compressor: unknown kind");
}

Vector CompressorSpec::compress(RngStream& stream, const Vector& x) const {
    if (x.size() != dim_) throw std::invalid_argument("compress: dimension mismatch");
    std::uint32_t pattern = 0;
    for (std::size_t k = 0; k < coin_count(); ++k) {
        if (stream.flip(probs_[k])) pattern |= (1u << k);
    }
    return apply_pattern(x, pattern);
}

Vector CompressorSpec::compress(const std::vector<RngStream*>& streams, const Vector& x) const {
    if (x.size() != dim_) throw std::invalid_argument("compress: dimension mismatch");
    if (kind_ != Kind::block_bernoulli) {
        if (coin_count() == 0) return x;
        if (streams.empty() || streams[0] == nullptr) {
            throw std::invalid_argument("compress: missing stream");
        }
        return compress(*streams[0], x);
    }
    if (streams.size() != probs_.size()) {
        throw std::invalid_argument("compress: block_bernoulli needs one stream per block");
    }
    std::uint32_t pattern = 0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
        if (streams[i]->flip(probs_[i])) pattern |= (1u << i);
    }
    return apply_pattern(x, pattern);
}

DiagMatrix CompressorSpec::variance_matrix() const {
    std::vector<double> d(dim_, 0.0);
    switch (kind_) {
    case Kind::identity:
        break;
    case Kind::bernoulli:
        std::fill(d.begin(), d.end(), 1.0 / probs_[0] - 1.0);
        break;
    case Kind::coordinate_prob:
        for (std::size_t j = 0; j < dim_; ++j) d[j] = 1.0 / probs_[j] - 1.0;
        break;
    case Kind::block_bernoulli:
        for (std::size_t i = 0; i < probs_.size(); ++i) {
            std::fill(d.begin() + static_cast<std::ptrdiff_t>(i * block_dim_),
                      d.begin() + static_cast<std::ptrdiff_t>((i + 1) * block_dim_),
                      1.0 / probs_[i] - 1.0);
        }
        break;
    }
    return DiagMatrix(std::move(d));
}

double CompressorSpec::scalar_omega() const {
    if (kind_ == Kind::identity) return 0.0;
    return scalar_bound(variance_matrix());
}

double CompressorSpec::exact_weighted_second_moment(const Vector& x) const {
    if (x.size() != dim_) throw std::invalid_argument("exact moment: dimension mismatch");
    if (coin_count() > 20) throw std::invalid_argument("exact moment: enumeration too large");
    const DiagMatrix omega = variance_matrix();
    DiagMatrix inv_weight;
    inv_weight.diag.resize(dim_);
    for (std::size_t j = 0; j < dim_; ++j) inv_weight.diag[j] = 1.0 / (1.0 + omega.diag[j]);

    double total = 0.0;
    const std::uint32_t outcomes = 1u << coin_count();
    for (std::uint32_t pattern = 0; pattern < outcomes; ++pattern) {
        double prob = 1.0;
        for (std::size_t k = 0; k < coin_count(); ++k) {
            prob *= (pattern & (1u << k)) ? probs_[k] : (1.0 - probs_[k]);
        }
        if (prob == 0.0) continue;
        const Vector out = apply_pattern(x, pattern);
        double val = 0.0;
        for (std::size_t j = 0; j < dim_; ++j) {
            const double w = inv_weight.diag[j] * out[j];
            val += w * w;
        }
        total += prob * val;
    }
    return total;
}

double CompressorSpec::exact_second_moment(const Vector& x) const {
    if (x.size() != dim_) throw std::invalid_argument("exact moment: dimension mismatch");
    if (coin_count() > 20) throw std::invalid_argument("exact moment: enumeration too large");
    double total = 0.0;
    const std::uint32_t outcomes = 1u << coin_count();
    for (std::uint32_t pattern = 0; pattern < outcomes; ++pattern) {
        double prob = 1.0;
        for (std::size_t k = 0; k < coin_count(); ++k) {
            prob *= (pattern & (1u << k)) ? probs_[k] : (1.0 - probs_[k]);
        }
        if (prob == 0.0) continue;
        total += prob * norm_sq(apply_pattern(x, pattern));
    }
    return total;
}

double scalar_bound(const DiagMatrix& omega) {
    const double lmax = omega.lambda_max();
    const double lmin = omega.lambda_min();
    return (1.0 + lmax) * (1.0 + lmax) / (1.0 + lmin) - 1.0;
}

VarianceReport verify_variance_bound(const CompressorSpec& spec, RngStream& stream,
                                     const Vector& x, std::size_t trials) {
    if (trials < 10'000) throw std::invalid_argument("verify_variance_bound: trials must be >= 10^4");
    const DiagMatrix omega = spec.variance_matrix();
    std::vector<double> inv_weight(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) inv_weight[j] = 1.0 / (1.0 + omega.diag[j]);

    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        const Vector out = spec.compress(stream, x);
        double val = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double w = inv_weight[j] * out[j];
            val += w * w;
        }
        sum += val;
        sum_sq += val * val;
    }
    const double mean = sum / static_cast<double>(trials);
    const double var = std::max(0.0, sum_sq / static_cast<double>(trials) - mean * mean);

    VarianceReport r;
    r.lhs_estimate = mean;
    r.lhs_stderr = std::sqrt(var / static_cast<double>(trials));
    double rhs = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) rhs += inv_weight[j] * x[j] * x[j];
    r.rhs = rhs;
    r.holds = mean <= rhs + 3.0 * r.lhs_stderr + 1e-12;
    return r;
}

} // namespace skipsim
