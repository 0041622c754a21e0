#include "skipsim/methods.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace skipsim {

namespace {

std::vector<double> effective_q(const RunConfig& cfg, std::size_t n) {
    if (cfg.q.empty()) return std::vector<double>(n, 1.0);
    return cfg.q;
}

std::vector<double> effective_times(const RunConfig& cfg, std::size_t n) {
    if (cfg.times.empty()) return std::vector<double>(n, 1.0);
    return cfg.times;
}

bool uses_plus_engine(Method m) {
    return m == Method::gradskip_plus || m == Method::proxgd || m == Method::randprox_fb;
}

double plus_gamma_bound(const DiagMatrix& L, double omega, const DiagMatrix& Omega) {
    double lmax = 0.0;
    for (std::size_t j = 0; j < L.dim(); ++j) {
        const double tilde = 1.0 + omega * (omega + 2.0) * Omega.diag[j] / (1.0 + Omega.diag[j]);
        lmax = std::max(lmax, L.diag[j] * tilde);
    }
    return 1.0 / lmax;
}

double lyapunov_gradskip(const std::vector<ClientState>& states, const Minimizer& m,
                         double gamma, double p, double* dist_sq_out) {
    double dist = 0.0;
    double shifts = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        dist += norm_sq(sub(states[i].x, m.x_star));
        shifts += norm_sq(sub(states[i].h, m.h_star[i]));
    }
    if (dist_sq_out) *dist_sq_out = dist;
    return dist + (gamma * gamma) / (p * p) * shifts;
}

} // namespace

double gradskip_gamma_bound(const std::vector<double>& L, double p, const std::vector<double>& q) {
    if (L.size() != q.size() || L.empty()) {
        throw std::invalid_argument("gradskip_gamma_bound: L and q must match and be non-empty");
    }
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < L.size(); ++i) {
        bound = std::min(bound, (1.0 / L[i]) * p * p / (1.0 - q[i] * (1.0 - p * p)));
    }
    return bound;
}

void validate_config(const RunConfig& cfg, const LiftedObjective& lifted) {
    const std::size_t n = lifted.n();
    if (!(cfg.gamma > 0.0)) throw std::invalid_argument("config: gamma must be > 0");
    if (!(cfg.p > 0.0 && cfg.p <= 1.0)) throw std::invalid_argument("config: p must lie in (0,1]");
    if (!cfg.q.empty() && cfg.q.size() != n) {
        throw std::invalid_argument("config: q must have one entry per client");
    }
    for (double qi : cfg.q) {
        if (!(qi >= 0.0 && qi <= 1.0)) throw std::invalid_argument("config: q_i must lie in [0,1]");
    }
    if (!cfg.times.empty()) {
        if (cfg.times.size() != n) throw std::invalid_argument("config: times must have one entry per client");
        for (double ti : cfg.times) {
            if (!(ti > 0.0 && ti <= 1.0)) throw std::invalid_argument("config: t_i must lie in (0,1]");
        }
    }
    if (!(cfg.t_com >= 0.0)) throw std::invalid_argument("config: t_com must be >= 0");

    if (uses_plus_engine(cfg.method)) {
        if (!cfg.c_omega || !cfg.c_Omega) {
            throw std::invalid_argument("config: GradSkip+ style methods need both compressor specs");
        }
        if (cfg.c_omega->dim() != lifted.lifted_dim() || cfg.c_Omega->dim() != lifted.lifted_dim()) {
            throw std::invalid_argument("config: compressor dimension must equal the lifted dimension");
        }
        if (cfg.strict_stepsize) {
            const double bound = plus_gamma_bound(lifted.smoothness_matrix(),
                                                  cfg.c_omega->scalar_omega(),
                                                  cfg.c_Omega->variance_matrix());
            if (cfg.gamma > bound * (1.0 + 1e-9)) {
                throw std::invalid_argument("config: gamma exceeds the GradSkip+ step-size bound");
            }
        }
    } else if (cfg.strict_stepsize) {
        const double bound =
            gradskip_gamma_bound(lifted.smoothness_constants(), cfg.p, effective_q(cfg, n));
        if (cfg.gamma > bound * (1.0 + 1e-9)) {
            throw std::invalid_argument("config: gamma exceeds the GradSkip step-size bound");
        }
    }
}

std::vector<ClientState> init_states(const LiftedObjective& lifted, const Vector& x0,
                                     ShiftInit shift_init) {
    const Vector start = x0.empty() ? Vector(lifted.dim(), 0.0) : x0;
    if (start.size() != lifted.dim()) throw std::invalid_argument("init_states: bad x0 dimension");
    std::vector<ClientState> states(lifted.n());
    for (std::size_t i = 0; i < states.size(); ++i) {
        states[i].x = start;
        states[i].h = shift_init == ShiftInit::gradient ? lifted.local(i).gradient(start)
                                                        : Vector(lifted.dim(), 0.0);
        states[i].cached_grad = Vector(lifted.dim(), 0.0);
    }
    return states;
}

StepReport gradskip_step(std::vector<ClientState>& states, const RunConfig& cfg,
                         const LiftedObjective& lifted, RngStream& server,
                         std::vector<RngStream>& client_coins) {
    const std::size_t n = states.size();
    if (n != lifted.n() || client_coins.size() != n) {
        throw std::invalid_argument("gradskip_step: state/stream count mismatch");
    }
    const std::vector<double> q = effective_q(cfg, n);

    const bool theta = server.flip(cfg.p);

    StepReport report;
    report.communicated = theta;
    report.fresh_gradient.assign(n, 0);

    std::vector<Vector> x_hat(n);
    std::vector<Vector> h_hat(n);
    std::vector<bool> eta(n);

    for (std::size_t i = 0; i < n; ++i) {
        ClientState& s = states[i];
        eta[i] = client_coins[i].flip(q[i]);

        if (s.idle && cfg.lazy) {
            // Fake local step: nothing moves, no gradient computed.
            x_hat[i] = s.x;
            h_hat[i] = s.h;
            continue;
        }

        const Vector grad = lifted.local(i).gradient(s.x);
        if (!s.idle) {
            s.grad_calls += 1;
            report.fresh_gradient[i] = 1;
            s.cached_grad = grad;
        }
        h_hat[i] = eta[i] ? s.h : grad;
        x_hat[i] = axpy(s.x, -cfg.gamma, sub(grad, h_hat[i]));
    }

    if (theta) {
        Vector avg(lifted.dim(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const Vector shifted = axpy(x_hat[i], -cfg.gamma / cfg.p, h_hat[i]);
            for (std::size_t j = 0; j < avg.size(); ++j) avg[j] += shifted[j];
        }
        const double invn = 1.0 / static_cast<double>(n);
        for (double& v : avg) v *= invn;
        for (std::size_t i = 0; i < n; ++i) {
            ClientState& s = states[i];
            s.h = axpy(h_hat[i], cfg.p / cfg.gamma, sub(avg, x_hat[i]));
            s.x = avg;
            s.idle = false;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            ClientState& s = states[i];
            s.x = x_hat[i];
            s.h = h_hat[i];
            s.idle = s.idle || !eta[i];
        }
    }
    return report;
}

Trace run_gradskip(const LiftedObjective& lifted, const RunConfig& cfg,
                   const Minimizer& minimizer, const Vector& x0) {
    validate_config(cfg, lifted);
    const std::size_t n = lifted.n();
    const std::vector<double> times = effective_times(cfg, n);

    std::vector<ClientState> states = init_states(lifted, x0, cfg.shift_init);
    RngStream server(cfg.seed, 0, "theta");
    std::vector<RngStream> coins;
    coins.reserve(n);
    for (std::size_t i = 0; i < n; ++i) coins.emplace_back(cfg.seed, static_cast<std::uint32_t>(i), "eta");

    Trace trace;
    trace.n = n;
    trace.records.reserve(cfg.T + 1);

    TraceRecord rec;
    rec.grad_calls.assign(n, 0);
    rec.psi = lyapunov_gradskip(states, minimizer, cfg.gamma, cfg.p, &rec.dist_sq);
    trace.records.push_back(rec);

    for (std::uint64_t t = 0; t < cfg.T; ++t) {
        const StepReport step = gradskip_step(states, cfg, lifted, server, coins);
        rec.t = t + 1;
        rec.comm_rounds += step.communicated ? 1 : 0;
        double iter_time = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            rec.grad_calls[i] = states[i].grad_calls;
            if (step.fresh_gradient[i]) iter_time = std::max(iter_time, times[i]);
        }
        rec.sim_time += iter_time + (step.communicated ? cfg.t_com : 0.0);
        rec.psi = lyapunov_gradskip(states, minimizer, cfg.gamma, cfg.p, &rec.dist_sq);
        trace.records.push_back(rec);
    }
    return trace;
}

PlusStepReport gradskip_plus_step(PlusState& state, double gamma,
                                  const CompressorSpec& c_omega, const CompressorSpec& c_Omega,
                                  const Regularizer& reg, const GradientFn& grad,
                                  const std::vector<RngStream*>& omega_streams,
                                  const std::vector<RngStream*>& Omega_streams) {
    if (!(gamma > 0.0)) throw std::invalid_argument("gradskip_plus_step: gamma must be > 0");
    const double omega = c_omega.scalar_omega();
    const double gw = gamma * (1.0 + omega);

    const Vector g = grad(state.x);

    // Shift update via shifted compression.
    const Vector compressed = c_Omega.compress(Omega_streams, sub(g, state.h));
    const DiagMatrix Omega = c_Omega.variance_matrix();
    Vector h_hat(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
        h_hat[j] = g[j] - compressed[j] / (1.0 + Omega.diag[j]);
    }

    const Vector x_hat = axpy(state.x, -gamma, sub(g, h_hat));

    // Proximal gradient estimate.
    const Vector prox_arg = axpy(x_hat, -gw, h_hat);
    const Vector prox_point = reg.prox(gw, prox_arg);
    const Vector g_hat = scale(1.0 / gw, c_omega.compress(omega_streams, sub(x_hat, prox_point)));

    state.x = axpy(x_hat, -gamma, g_hat);
    state.h = axpy(h_hat, 1.0 / gw, sub(state.x, x_hat));

    PlusStepReport report;
    report.prox_applied = c_omega.kind() == CompressorSpec::Kind::identity || norm_sq(g_hat) > 0.0;
    return report;
}

Trace run_gradskip_plus(const LiftedObjective& lifted, const RunConfig& cfg,
                        const Regularizer& reg, const Minimizer& minimizer,
                        const Vector& x0) {
    validate_config(cfg, lifted);
    const std::size_t n = lifted.n();
    const std::size_t nd = lifted.lifted_dim();
    const std::vector<double> times = effective_times(cfg, n);
    const double omega = cfg.c_omega->scalar_omega();

    const Vector start_block = x0.empty() ? Vector(lifted.dim(), 0.0) : x0;
    PlusState state;
    state.x.reserve(nd);
    for (std::size_t i = 0; i < n; ++i) {
        state.x.insert(state.x.end(), start_block.begin(), start_block.end());
    }
    state.h = cfg.shift_init == ShiftInit::gradient ? lifted.gradient(state.x) : Vector(nd, 0.0);

    Vector x_star_lifted;
    Vector h_star_lifted;
    x_star_lifted.reserve(nd);
    h_star_lifted.reserve(nd);
    for (std::size_t i = 0; i < n; ++i) {
        x_star_lifted.insert(x_star_lifted.end(), minimizer.x_star.begin(), minimizer.x_star.end());
        h_star_lifted.insert(h_star_lifted.end(), minimizer.h_star[i].begin(), minimizer.h_star[i].end());
    }

    RngStream server(cfg.seed, 0, "theta");
    std::vector<RngStream> coins;
    coins.reserve(n);
    for (std::size_t i = 0; i < n; ++i) coins.emplace_back(cfg.seed, static_cast<std::uint32_t>(i), "eta");

    std::vector<RngStream*> omega_streams{&server};
    std::vector<RngStream*> Omega_streams;
    if (cfg.c_Omega->kind() == CompressorSpec::Kind::block_bernoulli) {
        for (auto& c : coins) Omega_streams.push_back(&c);
    } else {
        Omega_streams.push_back(&coins[0]);
    }

    const GradientFn grad = [&lifted](const Vector& x) { return lifted.gradient(x); };

    const auto snapshot = [&](TraceRecord& rec) {
        rec.dist_sq = norm_sq(sub(state.x, x_star_lifted));
        rec.psi = rec.dist_sq +
                  cfg.gamma * cfg.gamma * (1.0 + omega) * (1.0 + omega) *
                      norm_sq(sub(state.h, h_star_lifted));
    };

    Trace trace;
    trace.n = n;
    trace.records.reserve(cfg.T + 1);
    TraceRecord rec;
    rec.grad_calls.assign(n, 0);
    snapshot(rec);
    trace.records.push_back(rec);

    double iter_time = 0.0;
    for (double ti : times) iter_time = std::max(iter_time, ti);

    for (std::uint64_t t = 0; t < cfg.T; ++t) {
        const PlusStepReport step = gradskip_plus_step(state, cfg.gamma, *cfg.c_omega, *cfg.c_Omega,
                                                       reg, grad, omega_streams, Omega_streams);
        rec.t = t + 1;
        rec.comm_rounds += step.prox_applied ? 1 : 0;
        // The plus engine evaluates the full lifted gradient every iteration.
        for (std::size_t i = 0; i < n; ++i) rec.grad_calls[i] += 1;
        rec.sim_time += iter_time + (step.prox_applied ? cfg.t_com : 0.0);
        snapshot(rec);
        trace.records.push_back(rec);
    }
    return trace;
}

RunConfig preset_config(Method method, const LiftedObjective& lifted) {
    const std::vector<double> kappas = lifted.condition_numbers();
    double kmax = 1.0;
    for (double k : kappas) {
        if (k < 1.0 - 1e-12) throw std::invalid_argument("preset_config: condition numbers must be >= 1");
        kmax = std::max(kmax, k);
    }

    RunConfig cfg;
    cfg.method = method;
    cfg.gamma = 1.0 / lifted.l_max();
    cfg.p = 1.0 / std::sqrt(kmax);

    std::vector<double> q(kappas.size(), 1.0);
    if (kmax > 1.0) {
        for (std::size_t i = 0; i < kappas.size(); ++i) {
            q[i] = (1.0 - 1.0 / kappas[i]) / (1.0 - 1.0 / kmax);
        }
    }

    const std::size_t nd = lifted.lifted_dim();
    switch (method) {
    case Method::gradskip:
        cfg.q = q;
        break;
    case Method::proxskip:
        cfg.q.assign(kappas.size(), 1.0);
        break;
    case Method::gradskip_plus:
        cfg.q = q;
        cfg.c_omega = CompressorSpec::bernoulli(cfg.p, nd);
        cfg.c_Omega = CompressorSpec::block_bernoulli(q, lifted.dim());
        break;
    case Method::proxgd:
        cfg.p = 1.0;
        cfg.c_omega = CompressorSpec::identity(nd);
        cfg.c_Omega = CompressorSpec::identity(nd);
        break;
    case Method::randprox_fb:
        cfg.c_omega = CompressorSpec::bernoulli(cfg.p, nd);
        cfg.c_Omega = CompressorSpec::identity(nd);
        break;
    }
    return cfg;
}

} // namespace skipsim
