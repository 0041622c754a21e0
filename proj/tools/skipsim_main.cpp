// skipsim command line: run experiment configs, summarize trace directories,
// and verify the analytic machinery against independent oracles.

#include <cmath>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "skipsim/analysis.hpp"
#include "skipsim/compressors.hpp"
#include "skipsim/experiment.hpp"
#include "skipsim/methods.hpp"
#include "skipsim/problems.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitOracle = 2;

skipsim::Vector central_fd_gradient(const skipsim::LocalObjective& f, const skipsim::Vector& x,
                                    double h) {
    skipsim::Vector g(x.size());
    skipsim::Vector xp = x, xm = x;
    for (std::size_t j = 0; j < x.size(); ++j) {
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        g[j] = (f.value(xp) - f.value(xm)) / (2.0 * h);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    return g;
}

bool check(const char* name, bool ok, int& failures) {
    std::printf("%-34s %s\n", name, ok ? "ok" : "FAIL");
    if (!ok) ++failures;
    return ok;
}

int verify(const std::string& config_path) {
    const auto cfg = skipsim::load_experiment_config(config_path);
    const auto lifted = skipsim::build_problem(cfg);
    const auto minimizer = skipsim::reference_minimizer(lifted);
    int failures = 0;

    {
        // Analytic gradients against central finite differences.
        bool ok = true;
        for (std::size_t i = 0; i < lifted.n(); ++i) {
            const auto& f = lifted.local(i);
            skipsim::RngStream stream(cfg.problem_seed, static_cast<std::uint32_t>(i), "verify-x");
            for (int trial = 0; trial < 5; ++trial) {
                skipsim::Vector x(f.dim());
                for (double& e : x) e = 2.0 * stream.uniform() - 1.0;
                const auto ga = f.gradient(x);
                const auto gn = central_fd_gradient(f, x, 1e-6);
                const double err = std::sqrt(skipsim::norm_sq(skipsim::sub(ga, gn)));
                const double scale = std::max(1.0, std::sqrt(skipsim::norm_sq(ga)));
                if (err / scale > 1e-6) ok = false;
            }
        }
        check("gradient-vs-finite-difference", ok, failures);
    }

    {
        // Reference minimizer: stacked gradient equals the mean gradient's fixed point.
        skipsim::Vector mean(lifted.local(0).dim(), 0.0);
        for (std::size_t i = 0; i < lifted.n(); ++i) {
            const auto g = lifted.local(i).gradient(minimizer.x_star);
            for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += g[j];
        }
        double norm = 0.0;
        for (const double v : mean) norm += v * v;
        check("minimizer-stationarity", std::sqrt(norm) / lifted.n() < 1e-7, failures);
    }

    if (lifted.n() <= 12) {
        // One-step Lyapunov expectation: exhaustive coin enumeration vs closed form.
        const auto kappas = lifted.condition_numbers();
        const auto opt = skipsim::optimal_parameters(kappas);
        const double gamma = skipsim::gradskip_stepsize_bound(lifted.smoothness_constants(),
                                                              opt.p, opt.q);
        skipsim::RngStream stream(cfg.problem_seed, 0, "verify-state");
        std::vector<skipsim::Vector> xs(lifted.n()), hs(lifted.n());
        std::vector<skipsim::Vector> h_star(lifted.n());
        for (std::size_t i = 0; i < lifted.n(); ++i) {
            xs[i].resize(lifted.local(i).dim());
            hs[i].resize(lifted.local(i).dim());
            for (double& e : xs[i]) e = 2.0 * stream.uniform() - 1.0;
            for (double& e : hs[i]) e = 2.0 * stream.uniform() - 1.0;
            h_star[i] = lifted.local(i).gradient(minimizer.x_star);
        }
        const auto one = skipsim::one_step_expectation(xs, hs, lifted, gamma, opt.p, opt.q,
                                                       minimizer.x_star, h_star);
        const double rel = std::abs(one.enumerated - one.closed_form) /
                           std::max(1e-30, std::abs(one.closed_form));
        check("one-step-expectation", rel <= 1e-10, failures);
        const auto rate = skipsim::gradskip_rate(gamma, lifted.local(0).mu(), opt.p, opt.q,
                                                 lifted.smoothness_constants());
        check("one-step-contraction", one.enumerated <= (1.0 - rate.rho) * one.psi_now + 1e-12,
              failures);
    }

    {
        // Expected gradient calls per round vs simulation.
        const auto opt = skipsim::optimal_parameters(lifted.condition_numbers());
        const auto sim = skipsim::simulate_round_gradient_calls(opt.p, opt.q, 100000,
                                                                cfg.problem_seed);
        bool ok = true;
        for (std::size_t i = 0; i < sim.size(); ++i) {
            const double expect = skipsim::expected_local_steps(opt.p, opt.q[i]);
            if (std::abs(sim[i] - expect) / expect > 0.02) ok = false;
        }
        check("local-steps-expectation", ok, failures);
    }

    {
        // Unbiased-compressor variance bound, Monte Carlo.
        const auto spec = skipsim::CompressorSpec::bernoulli(0.3, 4);
        skipsim::RngStream stream(cfg.problem_seed, 0, "verify-compress");
        const auto report = skipsim::verify_variance_bound(spec, stream, {1.0, -2.0, 0.5, 3.0}, 20000);
        check("compressor-variance-bound", report.holds, failures);
    }

    std::printf("verify: %d check(s) failed\n", failures);
    return failures == 0 ? kExitOk : kExitOracle;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local gradient method simulation lab"};
    app.require_subcommand(1);

    std::string run_config, verify_config, summarize_dir;
    auto* run_cmd = app.add_subcommand("run", "Execute an experiment config");
    run_cmd->add_option("config", run_config, "Config file path")->required();
    auto* sum_cmd = app.add_subcommand("summarize", "Aggregate a directory of trace files");
    sum_cmd->add_option("dir", summarize_dir, "Trace directory")->required();
    auto* ver_cmd = app.add_subcommand("verify", "Run oracle checks for a config's problem");
    ver_cmd->add_option("config", verify_config, "Config file path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            const auto result = skipsim::run_experiment(run_config);
            for (const auto& f : result.trace_files) std::printf("trace   %s\n", f.c_str());
            std::printf("summary %s\n", result.summary_file.c_str());
            return kExitOk;
        }
        if (sum_cmd->parsed()) {
            std::printf("summary %s\n", skipsim::emit_summary(summarize_dir).c_str());
            return kExitOk;
        }
        return verify(verify_config);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    }
}
