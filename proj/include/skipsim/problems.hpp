#ifndef SKIPSIM_PROBLEMS_HPP
#define SKIPSIM_PROBLEMS_HPP

#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include "skipsim/numerics.hpp"

namespace skipsim {

/// One labeled sample of a logistic loss: feature vector and label in {-1,+1}.
struct LogisticSample {
    Vector features;
    double label;
};

/// A client's local loss with certified strong-convexity and smoothness
/// constants. Two families:
///   quadratic: f(x) = (mu/2)||x||^2 + ((L-mu)/2) (v'x - s)^2 with unit v,
///              so the Hessian spectrum is exactly {mu, L}.
///   logistic:  f(x) = (1/m) sum_j log(1+exp(-b_j a_j'x)) + (lambda/2)||x||^2,
///              mu = lambda, L = lambda_max((1/(4m)) sum a a') + lambda.
class LocalObjective {
public:
    static LocalObjective quadratic(double mu, double L, Vector direction, double shift);
    static LocalObjective logistic(std::vector<LogisticSample> samples, double reg_lambda);

    std::size_t dim() const { return dim_; }
    double mu() const { return mu_; }
    /// The certified Lipschitz constant L_i of the gradient.
    double smoothness_constant() const { return L_; }

    double value(const Vector& x) const;
    Vector gradient(const Vector& x) const;

    /// f(x) - f(y) - <grad f(y), x - y>.
    double bregman(const Vector& x, const Vector& y) const;

private:
    struct Quadratic {
        double mu;
        double L;
        Vector direction; // unit vector
        double shift;
    };
    struct Logistic {
        std::vector<LogisticSample> samples;
        double reg_lambda;
    };

    LocalObjective() = default;

    std::variant<Quadratic, Logistic> payload_;
    std::size_t dim_ = 0;
    double mu_ = 0.0;
    double L_ = 0.0;
};

/// Stacked objective over R^{n*d}: block i holds f_i. The gradient is the
/// per-block concatenation of the local gradients, and the smoothness matrix
/// is Diag(L_1 I, ..., L_n I). All locals must share d and mu.
class LiftedObjective {
public:
    explicit LiftedObjective(std::vector<LocalObjective> locals);

    std::size_t n() const { return locals_.size(); }
    std::size_t dim() const { return dim_; }
    std::size_t lifted_dim() const { return locals_.size() * dim_; }
    double mu() const { return locals_.front().mu(); }
    const LocalObjective& local(std::size_t i) const { return locals_.at(i); }

    Vector gradient(const Vector& stacked) const;
    DiagMatrix smoothness_matrix() const;
    double l_max() const;
    std::vector<double> smoothness_constants() const;
    /// kappa_i = L_i / mu.
    std::vector<double> condition_numbers() const;

    Vector block(const Vector& stacked, std::size_t i) const;
    Vector stack(const std::vector<Vector>& blocks) const;

private:
    std::vector<LocalObjective> locals_;
    std::size_t dim_ = 0;
};

/// Minimizer of the consensus problem min_x (1/n) sum f_i(x) together with the
/// optimal shifts h_{i,*} = grad f_i(x_*).
struct Minimizer {
    Vector x_star;
    std::vector<Vector> h_star;
};

/// Computes x_* to ||mean gradient|| <= tol (default 1e-12). Quadratic-only
/// instances are solved in closed form; otherwise plain gradient descent with
/// step 1/L_avg up to max_iters. Throws on non-convergence.
Minimizer reference_minimizer(const LiftedObjective& lifted, double tol = 1e-12,
                              std::uint64_t max_iters = 10'000'000);

} // namespace skipsim

#endif
