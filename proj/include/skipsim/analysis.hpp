#ifndef SKIPSIM_ANALYSIS_HPP
#define SKIPSIM_ANALYSIS_HPP

#include <cstdint>
#include <vector>

#include "skipsim/numerics.hpp"
#include "skipsim/problems.hpp"

namespace skipsim {

/// Lyapunov value sum_i ||x_i - x_*||^2 + (gamma^2/p^2) sum_i ||h_i - h_{i,*}||^2.
double lyapunov(const std::vector<Vector>& xs, const std::vector<Vector>& hs,
                const Vector& x_star, const std::vector<Vector>& h_star,
                double gamma, double p);

struct RatePrediction {
    double rho = 0.0;
    double gamma_max = 0.0;
    double iteration_complexity = 0.0;     // 1/rho, up to the log(1/eps) factor
    double communication_complexity = 0.0; // p/rho, up to the log factor
};

/// min_i (1/L_i) p^2 / (1 - q_i(1 - p^2)).
double gradskip_stepsize_bound(const std::vector<double>& L, double p, const std::vector<double>& q);

/// rho = min{gamma*mu, 1 - q_max(1 - p^2)}. Throws if gamma exceeds the
/// step-size bound for the supplied L.
RatePrediction gradskip_rate(double gamma, double mu, double p, const std::vector<double>& q,
                             const std::vector<double>& L);

/// Rate 1 - min{gamma*mu, delta} with
/// delta = 1 - (1/(1+lmin(Omega)))(1 - 1/(1+omega)^2) and step bound
/// 1/lambda_max(L * (I + omega(omega+2) Omega (I+Omega)^{-1})).
RatePrediction plus_rate(double gamma, double mu, double omega, const DiagMatrix& Omega,
                         const DiagMatrix& L);

/// Expected gradient computations per communication round: 1/(1 - q_i(1-p)).
double expected_local_steps(double p, double q_i);

struct OptimalParams {
    double p = 0.0;
    std::vector<double> q;
    std::vector<double> expected_steps; // kappa_i(1+sqrt(kmax))/(kappa_i+sqrt(kmax))
};

/// q_i = (1 - 1/kappa_i)/(1 - 1/kappa_max), p = 1/sqrt(kappa_max). Asserts
/// expected steps <= min(kappa_i, sqrt(kappa_max)).
OptimalParams optimal_parameters(const std::vector<double>& kappas);

struct OneStepExpectation {
    double enumerated = 0.0;  // sum over all 2^(n+1) coin outcomes
    double closed_form = 0.0; // per-client shifted-distance formula
    double psi_now = 0.0;
};

/// Exhaustive one-step expectation of the Lyapunov function for GradSkip,
/// checked against the closed form. n <= 12.
OneStepExpectation one_step_expectation(const std::vector<Vector>& xs, const std::vector<Vector>& hs,
                                        const LiftedObjective& lifted, double gamma, double p,
                                        const std::vector<double>& q, const Vector& x_star,
                                        const std::vector<Vector>& h_star);

struct WaitingTime {
    double t_p = 0.0;        // closed form t_max / p
    double t_g = 0.0;        // Monte Carlo estimate
    double t_g_stderr = 0.0;
};

/// Expected waiting time between communication rounds. The round length Theta
/// is shared across clients; client i works t_i * min(Theta, H_i) where H_i is
/// its first eta=0 toss. Monte Carlo with trials >= 10^4.
WaitingTime waiting_time(double p, const std::vector<double>& q, const std::vector<double>& times,
                         std::size_t trials, std::uint64_t seed = 0);

/// t_i = t_max (1 + sqrt(kmax)/kappa_i) / (1 + sqrt(kmax)/kappa_min),
/// clipped into (0, t_max].
std::vector<double> optimal_compute_times(const std::vector<double>& kappas, double t_max);

/// Ratio of expected gradient computations per round, all-clients total,
/// of the q_i = 1 schedule over the optimal-q schedule. Always < n.
double gradient_ratio(const std::vector<double>& kappas);

/// Simulated mean gradient calls per communication round per client, over the
/// given number of rounds, drawing theta/eta coins exactly as the algorithm does.
std::vector<double> simulate_round_gradient_calls(double p, const std::vector<double>& q,
                                                  std::size_t rounds, std::uint64_t seed = 0);

} // namespace skipsim

#endif
