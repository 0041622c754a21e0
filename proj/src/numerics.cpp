#include "skipsim/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace skipsim {

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

DiagMatrix::DiagMatrix(std::vector<double> d) : diag(std::move(d)) {
    for (double v : diag) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("DiagMatrix: entries must be finite and >= 0");
        }
    }
}

DiagMatrix DiagMatrix::constant(double value, std::size_t dim) {
    return DiagMatrix(std::vector<double>(dim, value));
}

double DiagMatrix::lambda_min() const {
    if (diag.empty()) throw std::invalid_argument("DiagMatrix: empty");
    return *std::min_element(diag.begin(), diag.end());
}

double DiagMatrix::lambda_max() const {
    if (diag.empty()) throw std::invalid_argument("DiagMatrix: empty");
    return *std::max_element(diag.begin(), diag.end());
}

RngStream::RngStream(std::uint64_t seed, std::uint32_t client, std::string_view purpose)
    : key_(mix64(mix64(seed) ^ mix64(0x636c69656e740000ULL + client) ^ fnv1a(purpose))),
      counter_(0) {}

double RngStream::uniform() {
    const std::uint64_t word = mix64(key_ ^ mix64(counter_++));
    return static_cast<double>(word >> 11) * 0x1.0p-53;
}

bool RngStream::flip(double prob) {
    if (!(prob >= 0.0 && prob <= 1.0)) {
        throw std::invalid_argument("flip: probability must lie in [0,1]");
    }
    return uniform() < prob;
}

std::uint64_t RngStream::sample_geometric(double success_prob) {
    if (!(success_prob > 0.0 && success_prob <= 1.0)) {
        throw std::invalid_argument("sample_geometric: success probability must lie in (0,1]");
    }
    std::uint64_t trials = 1;
    while (!flip(success_prob)) ++trials;
    return trials;
}

double dot(const Vector& a, const Vector& b) {
    check_same_dim(a, b, "dot");
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
    return s;
}

double norm_sq(const Vector& a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return s;
}

double weighted_norm_sq(const Vector& x, const DiagMatrix& m) {
    if (x.size() != m.dim()) {
        throw std::invalid_argument("weighted_norm_sq: dimension mismatch");
    }
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += m.diag[j] * x[j] * x[j];
    return s;
}

Vector add(const Vector& a, const Vector& b) {
    check_same_dim(a, b, "add");
    Vector r(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) r[j] = a[j] + b[j];
    return r;
}

Vector sub(const Vector& a, const Vector& b) {
    check_same_dim(a, b, "sub");
    Vector r(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) r[j] = a[j] - b[j];
    return r;
}

Vector scale(double s, const Vector& a) {
    Vector r(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) r[j] = s * a[j];
    return r;
}

Vector axpy(const Vector& a, double s, const Vector& b) {
    check_same_dim(a, b, "axpy");
    Vector r(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) r[j] = a[j] + s * b[j];
    return r;
}

void check_finite(const Vector& v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw std::runtime_error(std::string(what) + ": non-finite entry");
        }
    }
}

void check_same_dim(const Vector& a, const Vector& b, const char* what) {
    if (a.size() != b.size()) {
        throw std::invalid_argument(std::string(what) + ": dimension mismatch");
    }
}

} // namespace skipsim
