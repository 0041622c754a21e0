#ifndef SKIPSIM_COMPRESSORS_HPP
#define SKIPSIM_COMPRESSORS_HPP

#include <vector>

#include "skipsim/numerics.hpp"

namespace skipsim {

/// Unbiased compression operators with diagonal variance descriptors.
/// Coin layout is part of the contract: bernoulli consumes exactly one flip
/// per call, coordinate_prob consumes d flips in coordinate order, and
/// block_bernoulli consumes one flip per block, block i from streams[i].
/// Fixed consumption order is what couples GradSkip and GradSkip+ runs.
class CompressorSpec {
public:
    enum class Kind { identity, bernoulli, coordinate_prob, block_bernoulli };

    static CompressorSpec identity(std::size_t dim);
    static CompressorSpec bernoulli(double p, std::size_t dim);
    static CompressorSpec coordinate_prob(std::vector<double> probs);
    static CompressorSpec block_bernoulli(std::vector<double> block_probs, std::size_t block_dim);

    Kind kind() const { return kind_; }
    std::size_t dim() const { return dim_; }
    std::size_t stream_count() const;

    Vector compress(RngStream& stream, const Vector& x) const;
    Vector compress(const std::vector<RngStream*>& streams, const Vector& x) const;

    /// Omega such that the operator lies in B^d(Omega).
    DiagMatrix variance_matrix() const;
    /// Scalar omega such that the operator lies in B^d(omega), via the
    /// (1+lmax)^2/(1+lmin) - 1 inclusion bound (tight for uniform Omega).
    double scalar_omega() const;

    /// Exact E||(I+Omega)^{-1} C(x)||^2 and E||C(x)||^2 by enumerating every
    /// outcome pattern. Enumeration size is 2^(number of coins); rejected
    /// above 2^20 outcomes.
    double exact_weighted_second_moment(const Vector& x) const;
    double exact_second_moment(const Vector& x) const;

private:
    Kind kind_ = Kind::identity;
    std::size_t dim_ = 0;
    std::size_t block_dim_ = 0;
    std::vector<double> probs_; // per coin

    std::size_t coin_count() const { return probs_.size(); }
    Vector apply_pattern(const Vector& x, std::uint32_t pattern) const;
};

/// Scalar collapse of a diagonal variance matrix:
/// (1+lmax)^2/(1+lmin) - 1.
double scalar_bound(const DiagMatrix& omega);

struct VarianceReport {
    double lhs_estimate = 0.0; // Monte Carlo E||(I+Omega)^{-1} C(x)||^2
    double lhs_stderr = 0.0;
    double rhs = 0.0; // ||x||^2_{(I+Omega)^{-1}}
    bool holds = false;
};

/// Monte Carlo check of the matrix variance bound; holds when the estimate is
/// below rhs plus three standard errors. trials must be >= 10^4.
VarianceReport verify_variance_bound(const CompressorSpec& spec, RngStream& stream,
                                     const Vector& x, std::size_t trials);

} // namespace skipsim

#endif
