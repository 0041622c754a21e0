#ifndef SKIPSIM_METHODS_HPP
#define SKIPSIM_METHODS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "skipsim/compressors.hpp"
#include "skipsim/numerics.hpp"
#include "skipsim/problems.hpp"
#include "skipsim/regularizers.hpp"
#include "skipsim/trace.hpp"

namespace skipsim {

enum class Method { gradskip, gradskip_plus, proxskip, proxgd, randprox_fb };

enum class ShiftInit { gradient, zero };

/// Per-client algorithm state. While idle, h == cached_grad == grad f_i(x) and
/// the client performs fake local steps without gradient computation.
struct ClientState {
    Vector x;
    Vector h;
    Vector cached_grad;
    bool idle = false;
    std::uint64_t grad_calls = 0;
};

struct RunConfig {
    double gamma = 0.0;
    double p = 0.0;
    std::vector<double> q; // one per client; empty means all ones
    std::uint64_t T = 0;
    std::uint64_t seed = 0;
    Method method = Method::gradskip;

    /// Reject step-sizes above the theoretical bound. Permissive mode allows
    /// exploration runs outside the guaranteed-contraction regime.
    bool strict_stepsize = true;
    /// Lazy mode skips gradient evaluations for idle clients; eager mode
    /// recomputes everything (debug cross-check). Trajectories are identical.
    bool lazy = true;
    ShiftInit shift_init = ShiftInit::gradient;

    std::optional<CompressorSpec> c_omega;
    std::optional<CompressorSpec> c_Omega;

    std::vector<double> times; // per-client gradient compute time t_i, empty = all 1
    double t_com = 0.0;
};

/// Largest step-size with a convergence guarantee for the gradskip family:
/// min_i (1/L_i) p^2 / (1 - q_i (1 - p^2)).
double gradskip_gamma_bound(const std::vector<double>& L, double p, const std::vector<double>& q);

/// Throws std::invalid_argument on any violated config invariant, including
/// the step-size bound in strict mode.
void validate_config(const RunConfig& cfg, const LiftedObjective& lifted);

struct StepReport {
    bool communicated = false;
    std::vector<std::uint8_t> fresh_gradient; // per client
};

std::vector<ClientState> init_states(const LiftedObjective& lifted, const Vector& x0,
                                     ShiftInit shift_init);

/// Executes one GradSkip iteration: the server theta coin first, then the
/// per-client eta coins in client-index order, each from its own stream.
/// Idle clients still advance their coin stream so lazy and eager runs consume
/// identical randomness.
StepReport gradskip_step(std::vector<ClientState>& states, const RunConfig& cfg,
                         const LiftedObjective& lifted, RngStream& server,
                         std::vector<RngStream>& client_coins);

/// Full GradSkip run with Lyapunov tracking against the reference minimizer.
/// x0 empty means the zero vector.
Trace run_gradskip(const LiftedObjective& lifted, const RunConfig& cfg,
                   const Minimizer& minimizer, const Vector& x0 = {});

struct PlusState {
    Vector x;
    Vector h;
};

struct PlusStepReport {
    bool prox_applied = false; // the prox-gradient estimate was nonzero (or exact)
};

using GradientFn = std::function<Vector(const Vector&)>;

/// One GradSkip+ iteration over a generic smooth term and proximable
/// regularizer. omega_streams feed C_omega, Omega_streams feed C_Omega
/// (one stream per block for block_bernoulli).
PlusStepReport gradskip_plus_step(PlusState& state, double gamma,
                                  const CompressorSpec& c_omega, const CompressorSpec& c_Omega,
                                  const Regularizer& reg, const GradientFn& grad,
                                  const std::vector<RngStream*>& omega_streams,
                                  const std::vector<RngStream*>& Omega_streams);

/// GradSkip+ on the lifted consensus problem, with the same stream layout as
/// run_gradskip so coupled-coin comparisons are possible.
Trace run_gradskip_plus(const LiftedObjective& lifted, const RunConfig& cfg,
                        const Regularizer& reg, const Minimizer& minimizer,
                        const Vector& x0 = {});

/// Parameter presets derived from the certified constants of the lifted
/// consensus problem.
RunConfig preset_config(Method method, const LiftedObjective& lifted);

} // namespace skipsim

#endif
