#ifndef SKIPSIM_REGULARIZERS_HPP
#define SKIPSIM_REGULARIZERS_HPP

#include "skipsim/numerics.hpp"

namespace skipsim {

/// Proximable regularizers: the consensus indicator over n blocks of size d
/// (prox = blockwise averaging, step-invariant), the l1 penalty (prox =
/// soft-threshold) and the zero regularizer (prox = identity).
class Regularizer {
public:
    enum class Kind { zero, l1, consensus };

    static Regularizer zero();
    static Regularizer l1(double weight);
    static Regularizer consensus(std::size_t n, std::size_t d);

    Kind kind() const { return kind_; }

    /// argmin_u { psi(u) + (1/(2 step)) ||u - v||^2 }, step > 0.
    Vector prox(double step, const Vector& v) const;

private:
    Kind kind_ = Kind::zero;
    double weight_ = 0.0;
    std::size_t n_ = 0;
    std::size_t d_ = 0;
};

} // namespace skipsim

#endif
