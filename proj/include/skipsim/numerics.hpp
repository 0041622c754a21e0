#ifndef SKIPSIM_NUMERICS_HPP
#define SKIPSIM_NUMERICS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace skipsim {

using Vector = std::vector<double>;

/// Diagonal matrix with non-negative entries. The only matrix shape the
/// simulator ever needs (variance matrices, smoothness matrices, norm weights).
struct DiagMatrix {
    std::vector<double> diag;

    DiagMatrix() = default;
    explicit DiagMatrix(std::vector<double> d);
    static DiagMatrix constant(double value, std::size_t dim);
    static DiagMatrix zero(std::size_t dim) { return constant(0.0, dim); }

    std::size_t dim() const { return diag.size(); }
    double lambda_min() const;
    double lambda_max() const;
};

/// Counter-based random stream keyed by (seed, client, purpose). Streams with
/// equal keys replay identically on any platform; distinct keys are
/// independent. Draw order across streams does not matter, which is what makes
/// the coupled-coin equivalence runs possible.
class RngStream {
public:
    RngStream() = default;
    RngStream(std::uint64_t seed, std::uint32_t client, std::string_view purpose);

    /// Uniform draw in [0,1); advances the counter by exactly one.
    double uniform();

    /// Bernoulli coin: 1 with probability prob. One draw.
    bool flip(double prob);

    /// Number of Bernoulli(success_prob) trials up to and including the first
    /// success. Consumes one flip per trial against this same stream.
    std::uint64_t sample_geometric(double success_prob);

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }
    void seek(std::uint64_t counter) { counter_ = counter; }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

// Vector arithmetic. All operations validate dimensions and keep entries finite.

double dot(const Vector& a, const Vector& b);
double norm_sq(const Vector& a);
double weighted_norm_sq(const Vector& x, const DiagMatrix& m);

Vector add(const Vector& a, const Vector& b);
Vector sub(const Vector& a, const Vector& b);
Vector scale(double s, const Vector& a);
/// a + s*b
Vector axpy(const Vector& a, double s, const Vector& b);

void check_finite(const Vector& v, const char* what);
void check_same_dim(const Vector& a, const Vector& b, const char* what);

} // namespace skipsim

#endif
