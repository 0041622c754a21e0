#include "skipsim/regularizers.hpp"

#include <cmath>
#include <stdexcept>

namespace skipsim {

Regularizer Regularizer::zero() { return Regularizer{}; }

Regularizer Regularizer::l1(double weight) {
    if (!(weight >= 0.0)) throw std::invalid_argument("l1 regularizer: weight must be >= 0");
    Regularizer r;
    r.kind_ = Kind::l1;
    r.weight_ = weight;
    return r;
}

Regularizer Regularizer::consensus(std::size_t n, std::size_t d) {
    if (n == 0 || d == 0) throw std::invalid_argument("consensus regularizer: n, d must be positive");
    Regularizer r;
    r.kind_ = Kind::consensus;
    r.n_ = n;
    r.d_ = d;
    return r;
}

Vector Regularizer::prox(double step, const Vector& v) const {
    if (!(step > 0.0)) throw std::invalid_argument("prox: step must be > 0");
    switch (kind_) {
    case Kind::zero:
        return v;
    case Kind::l1: {
        const double thresh = step * weight_;
        Vector out(v.size());
        for (std::size_t j = 0; j < v.size(); ++j) {
            const double a = std::abs(v[j]) - thresh;
            out[j] = a > 0.0 ? std::copysign(a, v[j]) : 0.0;
        }
        return out;
    }
    case Kind::consensus: {
        if (v.size() != n_ * d_) throw std::invalid_argument("consensus prox: dimension mismatch");
        Vector mean(d_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < d_; ++j) mean[j] += v[i * d_ + j];
        }
        const double invn = 1.0 / static_cast<double>(n_);
        for (double& m : mean) m *= invn;
        Vector out(v.size());
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < d_; ++j) out[i * d_ + j] = mean[j];
        }
        return out;
    }
    }
    throw std::logic_error("prox: unknown regularizer kind");
}

} // namespace skipsim
