#include "skipsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace skipsim {

double lyapunov(const std::vector<Vector>& xs, const std::vector<Vector>& hs,
                const Vector& x_star, const std::vector<Vector>& h_star,
                double gamma, double p) {
    if (xs.size() != hs.size() || xs.size() != h_star.size() || xs.empty()) {
        throw std::invalid_argument("lyapunov: client count mismatch");
    }
    if (!(gamma > 0.0) || !(p > 0.0)) throw std::invalid_argument("lyapunov: gamma, p must be > 0");
    double dist = 0.0;
    double shifts = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        dist += norm_sq(sub(xs[i], x_star));
        shifts += norm_sq(sub(hs[i], h_star[i]));
    }
    return dist + (gamma * gamma) / (p * p) * shifts;
}

double gradskip_stepsize_bound(const std::vector<double>& L, double p, const std::vector<double>& q) {
    if (L.size() != q.size() || L.empty()) {
        throw std::invalid_argument("gradskip_stepsize_bound: L and q must match and be non-empty");
    }
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("gradskip_stepsize_bound: p must lie in (0,1]");
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < L.size(); ++i) {
        if (!(L[i] > 0.0)) throw std::invalid_argument("gradskip_stepsize_bound: L_i must be > 0");
        if (!(q[i] >= 0.0 && q[i] <= 1.0)) {
            throw std::invalid_argument("gradskip_stepsize_bound: q_i must lie in [0,1]");
        }
        bound = std::min(bound, (1.0 / L[i]) * p * p / (1.0 - q[i] * (1.0 - p * p)));
    }
    return bound;
}

RatePrediction gradskip_rate(double gamma, double mu, double p, const std::vector<double>& q,
                             const std::vector<double>& L) {
    const double bound = gradskip_stepsize_bound(L, p, q);
    if (gamma > bound * (1.0 + 1e-9)) {
        throw std::invalid_argument("gradskip_rate: gamma exceeds the step-size bound");
    }
    double q_max = 0.0;
    for (double qi : q) q_max = std::max(q_max, qi);

    RatePrediction r;
    r.gamma_max = bound;
    r.rho = std::min(gamma * mu, 1.0 - q_max * (1.0 - p * p));
    if (!(r.rho > 0.0)) throw std::invalid_argument("gradskip_rate: rho must be positive");
    r.iteration_complexity = 1.0 / r.rho;
    r.communication_complexity = p / r.rho;
    return r;
}

RatePrediction plus_rate(double gamma, double mu, double omega, const DiagMatrix& Omega,
                         const DiagMatrix& L) {
    if (Omega.dim() != L.dim() || Omega.dim() == 0) {
        throw std::invalid_argument("plus_rate: dimension mismatch");
    }
    if (!(omega >= 0.0)) throw std::invalid_argument("plus_rate: omega must be >= 0");
    double lmax = 0.0;
    for (std::size_t j = 0; j < L.dim(); ++j) {
        const double tilde = 1.0 + omega * (omega + 2.0) * Omega.diag[j] / (1.0 + Omega.diag[j]);
        lmax = std::max(lmax, L.diag[j] * tilde);
    }
    RatePrediction r;
    r.gamma_max = 1.0 / lmax;
    if (gamma > r.gamma_max * (1.0 + 1e-9)) {
        throw std::invalid_argument("plus_rate: gamma exceeds the step-size bound");
    }
    const double one_plus_w = 1.0 + omega;
    const double delta =
        1.0 - (1.0 / (1.0 + Omega.lambda_min())) * (1.0 - 1.0 / (one_plus_w * one_plus_w));
    r.rho = std::min(gamma * mu, delta);
    r.iteration_complexity = r.rho > 0.0 ? 1.0 / r.rho : std::numeric_limits<double>::infinity();
    r.communication_complexity = r.iteration_complexity / one_plus_w;
    return r;
}

double expected_local_steps(double p, double q_i) {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("expected_local_steps: p must lie in (0,1]");
    if (!(q_i >= 0.0 && q_i <= 1.0)) {
        throw std::invalid_argument("expected_local_steps: q_i must lie in [0,1]");
    }
    return 1.0 / (1.0 - q_i * (1.0 - p));
}

OptimalParams optimal_parameters(const std::vector<double>& kappas) {
    if (kappas.empty()) throw std::invalid_argument("optimal_parameters: empty kappa list");
    double kmax = 1.0;
    for (double k : kappas) {
        if (!(k >= 1.0)) throw std::invalid_argument("optimal_parameters: kappa_i must be >= 1");
        kmax = std::max(kmax, k);
    }
    OptimalParams out;
    out.p = 1.0 / std::sqrt(kmax);
    const double sk = std::sqrt(kmax);
    out.q.reserve(kappas.size());
    out.expected_steps.reserve(kappas.size());
    for (double k : kappas) {
        const double qi = kmax > 1.0 ? (1.0 - 1.0 / k) / (1.0 - 1.0 / kmax) : 1.0;
        out.q.push_back(qi);
        const double steps = k * (1.0 + sk) / (k + sk);
        if (steps > std::min(k, sk) * (1.0 + 1e-12)) {
            throw std::logic_error("optimal_parameters: expected steps exceed min(kappa_i, sqrt(kappa_max))");
        }
        out.expected_steps.push_back(steps);
    }
    return out;
}

OneStepExpectation one_step_expectation(const std::vector<Vector>& xs, const std::vector<Vector>& hs,
                                        const LiftedObjective& lifted, double gamma, double p,
                                        const std::vector<double>& q, const Vector& x_star,
                                        const std::vector<Vector>& h_star) {
    const std::size_t n = xs.size();
    if (n == 0 || n > 12) throw std::invalid_argument("one_step_expectation: n must lie in [1,12]");
    if (hs.size() != n || q.size() != n || h_star.size() != n || lifted.n() != n) {
        throw std::invalid_argument("one_step_expectation: client count mismatch");
    }
    const std::size_t d = lifted.dim();

    std::vector<Vector> grads(n);
    for (std::size_t i = 0; i < n; ++i) grads[i] = lifted.local(i).gradient(xs[i]);

    OneStepExpectation out;
    out.psi_now = lyapunov(xs, hs, x_star, h_star, gamma, p);

    // Exhaustive enumeration over (theta, eta_1..eta_n).
    const std::uint32_t outcomes = 1u << (n + 1);
    double enumerated = 0.0;
    std::vector<Vector> x_hat(n), h_hat(n);
    for (std::uint32_t pattern = 0; pattern < outcomes; ++pattern) {
        const bool theta = (pattern & 1u) != 0;
        double prob = theta ? p : 1.0 - p;
        for (std::size_t i = 0; i < n; ++i) {
            const bool eta = (pattern & (2u << i)) != 0;
            prob *= eta ? q[i] : 1.0 - q[i];
        }
        if (prob == 0.0) continue;

        for (std::size_t i = 0; i < n; ++i) {
            const bool eta = (pattern & (2u << i)) != 0;
            h_hat[i] = eta ? hs[i] : grads[i];
            x_hat[i] = axpy(xs[i], -gamma, sub(grads[i], h_hat[i]));
        }
        double psi_next = 0.0;
        if (theta) {
            Vector avg(d, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < d; ++j) {
                    avg[j] += x_hat[i][j] - (gamma / p) * h_hat[i][j];
                }
            }
            for (double& v : avg) v /= static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) {
                const Vector h_next = axpy(h_hat[i], p / gamma, sub(avg, x_hat[i]));
                psi_next += norm_sq(sub(avg, x_star)) +
                            (gamma * gamma) / (p * p) * norm_sq(sub(h_next, h_star[i]));
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                psi_next += norm_sq(sub(x_hat[i], x_star)) +
                            (gamma * gamma) / (p * p) * norm_sq(sub(h_hat[i], h_star[i]));
            }
        }
        enumerated += prob * psi_next;
    }
    out.enumerated = enumerated;

    // Closed form: per-client shifted distances plus the two variance terms.
    double closed = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vector w = axpy(sub(xs[i], x_star), -gamma, sub(grads[i], h_star[i]));
        closed += norm_sq(w);
        const double factor = (1.0 - p * p) * (gamma * gamma) / (p * p);
        closed += (1.0 - q[i]) * factor * norm_sq(sub(grads[i], h_star[i]));
        closed += q[i] * factor * norm_sq(sub(hs[i], h_star[i]));
    }
    out.closed_form = closed;
    return out;
}

WaitingTime waiting_time(double p, const std::vector<double>& q, const std::vector<double>& times,
                         std::size_t trials, std::uint64_t seed) {
    if (trials < 10'000) throw std::invalid_argument("waiting_time: trials must be >= 10^4");
    if (q.size() != times.size() || q.empty()) {
        throw std::invalid_argument("waiting_time: q and times must match and be non-empty");
    }
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("waiting_time: p must lie in (0,1]");
    double t_max = 0.0;
    for (double t : times) {
        if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("waiting_time: t_i must lie in (0,1]");
        t_max = std::max(t_max, t);
    }

    const std::size_t n = q.size();
    RngStream server(seed, 0, "wait-theta");
    std::vector<RngStream> coins;
    coins.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        coins.emplace_back(seed, static_cast<std::uint32_t>(i), "wait-eta");
    }

    double sum = 0.0;
    double sum_sq = 0.0;
    std::vector<std::uint64_t> stop_at(n);
    for (std::size_t trial = 0; trial < trials; ++trial) {
        std::fill(stop_at.begin(), stop_at.end(), 0);
        std::uint64_t k = 0;
        bool theta = false;
        while (!theta) {
            ++k;
            theta = server.flip(p);
            for (std::size_t i = 0; i < n; ++i) {
                if (stop_at[i] == 0 && !coins[i].flip(q[i])) stop_at[i] = k;
            }
        }
        double round = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint64_t local = stop_at[i] == 0 ? k : std::min(stop_at[i], k);
            round = std::max(round, times[i] * static_cast<double>(local));
        }
        sum += round;
        sum_sq += round * round;
    }

    WaitingTime wt;
    wt.t_p = t_max / p;
    wt.t_g = sum / static_cast<double>(trials);
    const double var = std::max(0.0, sum_sq / static_cast<double>(trials) - wt.t_g * wt.t_g);
    wt.t_g_stderr = std::sqrt(var / static_cast<double>(trials));
    return wt;
}

std::vector<double> optimal_compute_times(const std::vector<double>& kappas, double t_max) {
    if (kappas.empty()) throw std::invalid_argument("optimal_compute_times: empty kappa list");
    if (!(t_max > 0.0 && t_max <= 1.0)) {
        throw std::invalid_argument("optimal_compute_times: t_max must lie in (0,1]");
    }
    double kmax = 1.0;
    double kmin = std::numeric_limits<double>::infinity();
    for (double k : kappas) {
        if (!(k >= 1.0)) throw std::invalid_argument("optimal_compute_times: kappa_i must be >= 1");
        kmax = std::max(kmax, k);
        kmin = std::min(kmin, k);
    }
    const double sk = std::sqrt(kmax);
    std::vector<double> out;
    out.reserve(kappas.size());
    for (double k : kappas) {
        const double t = t_max * (1.0 + sk / k) / (1.0 + sk / kmin);
        out.push_back(std::min(t_max, std::max(t, std::numeric_limits<double>::min())));
    }
    return out;
}

double gradient_ratio(const std::vector<double>& kappas) {
    const OptimalParams params = optimal_parameters(kappas);
    const double sk = std::sqrt(*std::max_element(kappas.begin(), kappas.end()));
    double denom = 0.0;
    for (double s : params.expected_steps) denom += s;
    const double ratio = static_cast<double>(kappas.size()) * sk / denom;
    if (ratio >= static_cast<double>(kappas.size()) * (1.0 + 1e-12)) {
        throw std::logic_error("gradient_ratio: ratio must stay below n");
    }
    return ratio;
}

std::vector<double> simulate_round_gradient_calls(double p, const std::vector<double>& q,
                                                  std::size_t rounds, std::uint64_t seed) {
    if (!(p > 0.0 && p <= 1.0)) {
        throw std::invalid_argument("simulate_round_gradient_calls: p must lie in (0,1]");
    }
    const std::size_t n = q.size();
    for (double qi : q) {
        if (!(qi >= 0.0 && qi <= 1.0)) {
            throw std::invalid_argument("simulate_round_gradient_calls: q_i must lie in [0,1]");
        }
    }
    RngStream server(seed, 0, "round-theta");
    std::vector<RngStream> coins;
    coins.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        coins.emplace_back(seed, static_cast<std::uint32_t>(i), "round-eta");
    }

    std::vector<double> totals(n, 0.0);
    std::vector<std::uint64_t> stop_at(n);
    for (std::size_t r = 0; r < rounds; ++r) {
        std::fill(stop_at.begin(), stop_at.end(), 0);
        std::uint64_t k = 0;
        bool theta = false;
        while (!theta) {
            ++k;
            theta = server.flip(p);
            for (std::size_t i = 0; i < n; ++i) {
                if (stop_at[i] == 0 && !coins[i].flip(q[i])) stop_at[i] = k;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            totals[i] += static_cast<double>(stop_at[i] == 0 ? k : std::min(stop_at[i], k));
        }
    }
    for (double& t : totals) t /= static_cast<double>(rounds);
    return totals;
}

} // namespace skipsim
