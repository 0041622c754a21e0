#include "skipsim/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "skipsim/analysis.hpp"
#include "skipsim/data_io.hpp"

namespace fs = std::filesystem;

namespace skipsim {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    return out;
}

bool uses_plus_engine(Method m) {
    return m == Method::gradskip_plus || m == Method::proxgd || m == Method::randprox_fb;
}

struct TraceStats {
    std::string tag;
    std::string method;
    std::uint64_t seed = 0;
    double target = 0.0;
    double psi0 = 0.0;
    double psi_final = 0.0;
    std::uint64_t comm_rounds = 0;
    std::uint64_t grad_total = 0;
    double sim_time = 0.0;
    double comm_to_target = -1.0; // -1: target ratio never reached
};

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

TraceStats parse_trace_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace file: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("# skipsim-trace ", 0) != 0) {
        throw std::runtime_error("not a trace file (missing metadata line): " + path.string());
    }
    TraceStats st;
    {
        std::istringstream meta(line.substr(16));
        std::string kv;
        while (meta >> kv) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
            if (key == "tag") st.tag = val;
            else if (key == "method") st.method = val;
            else if (key == "seed") st.seed = std::stoull(val);
            else if (key == "target") st.target = std::stod(val);
        }
    }
    if (!std::getline(in, line)) throw std::runtime_error("trace missing header row: " + path.string());
    const auto header = split(line, ',');
    std::size_t psi_col = 0, comm_col = 0, grad_col = 0, time_col = 0;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == "psi") psi_col = j;
        else if (header[j] == "comm_rounds") comm_col = j;
        else if (header[j] == "grad_calls_total") grad_col = j;
        else if (header[j] == "sim_time") time_col = j;
    }
    bool first = true;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto cells = split(line, ',');
        const double psi = std::stod(cells.at(psi_col));
        const double comm = std::stod(cells.at(comm_col));
        if (first) {
            st.psi0 = psi;
            first = false;
        }
        if (st.comm_to_target < 0.0 && st.psi0 > 0.0 && psi <= st.target * st.psi0) {
            st.comm_to_target = comm;
        }
        st.psi_final = psi;
        st.comm_rounds = static_cast<std::uint64_t>(comm);
        st.grad_total = static_cast<std::uint64_t>(std::stod(cells.at(grad_col)));
        st.sim_time = std::stod(cells.at(time_col));
    }
    if (first) throw std::runtime_error("trace has no records: " + path.string());
    return st;
}

std::string write_summary(const fs::path& dir, const std::vector<TraceStats>& stats) {
    if (stats.empty()) throw std::runtime_error("no traces to summarize in " + dir.string());
    for (const auto& st : stats) {
        if (st.tag != stats.front().tag) {
            throw std::runtime_error("traces from different problems cannot be aggregated: '" +
                                     st.tag + "' vs '" + stats.front().tag + "'");
        }
    }
    // Per-method medians across seeds, in first-seen method order.
    std::vector<std::string> order;
    std::map<std::string, std::vector<const TraceStats*>> by_method;
    for (const auto& st : stats) {
        if (!by_method.count(st.method)) order.push_back(st.method);
        by_method[st.method].push_back(&st);
    }
    std::ostringstream out;
    out << "method,runs,comm_to_target,comm_rounds,grad_calls_total,sim_time,final_psi_ratio\n";
    std::map<std::string, double> med_grad, med_time;
    for (const auto& m : order) {
        const auto& group = by_method[m];
        std::vector<double> ct, cr, gc, tm, fr;
        for (const auto* st : group) {
            ct.push_back(st->comm_to_target);
            cr.push_back(static_cast<double>(st->comm_rounds));
            gc.push_back(static_cast<double>(st->grad_total));
            tm.push_back(st->sim_time);
            fr.push_back(st->psi0 > 0.0 ? st->psi_final / st->psi0 : 0.0);
        }
        med_grad[m] = median(gc);
        med_time[m] = median(tm);
        out << csv_field(m) << ',' << group.size() << ',' << fmt(median(ct)) << ','
            << fmt(median(cr)) << ',' << fmt(median(gc)) << ',' << fmt(median(tm)) << ','
            << fmt(median(fr)) << '\n';
    }
    if (med_grad.count("proxskip") && med_grad.count("gradskip") && med_grad["gradskip"] > 0.0) {
        out << "proxskip/gradskip,,,," << fmt(med_grad["proxskip"] / med_grad["gradskip"]) << ','
            << fmt(med_time["gradskip"] > 0.0 ? med_time["proxskip"] / med_time["gradskip"] : 0.0)
            << ",\n";
    }
    const fs::path file = dir / "summary.csv";
    std::ofstream f(file, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + file.string());
    f << out.str();
    return file.string();
}

} // namespace

std::string method_name(Method m) {
    switch (m) {
        case Method::gradskip: return "gradskip";
        case Method::gradskip_plus: return "gradskip_plus";
        case Method::proxskip: return "proxskip";
        case Method::proxgd: return "proxgd";
        case Method::randprox_fb: return "randprox_fb";
    }
    throw std::logic_error("unknown method");
}

Method method_from_name(const std::string& name) {
    if (name == "gradskip") return Method::gradskip;
    if (name == "gradskip_plus") return Method::gradskip_plus;
    if (name == "proxskip") return Method::proxskip;
    if (name == "proxgd") return Method::proxgd;
    if (name == "randprox_fb") return Method::randprox_fb;
    throw std::invalid_argument("unknown method name: " + name);
}

ExperimentConfig parse_experiment_config(std::string_view text) {
    ExperimentConfig cfg;
    std::vector<std::string> errors;
    std::string section;
    MethodEntry* current_method = nullptr;

    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;

        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            if (section == "method") {
                cfg.methods.emplace_back();
                current_method = &cfg.methods.back();
            } else if (section != "problem" && section != "run" && section != "output") {
                errors.push_back("line " + std::to_string(line_no) + ": unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(line_no) + ": expected 'key = value'");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        auto bad = [&](const std::string& why) {
            errors.push_back("line " + std::to_string(line_no) + ": " + key + ": " + why);
        };
        auto as_double = [&](double& dst) {
            try { dst = std::stod(val); } catch (const std::exception&) { bad("not a number"); }
        };
        auto as_size = [&](std::size_t& dst) {
            try { dst = std::stoull(val); } catch (const std::exception&) { bad("not an integer"); }
        };
        auto as_bool = [&](bool& dst) {
            if (val == "true" || val == "1") dst = true;
            else if (val == "false" || val == "0") dst = false;
            else bad("expected true/false");
        };

        try {
            if (section == "problem") {
                if (key == "kind") cfg.kind = val;
                else if (key == "n") as_size(cfg.n);
                else if (key == "d") as_size(cfg.d);
                else if (key == "lambda") as_double(cfg.lambda);
                else if (key == "l_large") as_double(cfg.l_large);
                else if (key == "l_lo") as_double(cfg.l_lo);
                else if (key == "l_hi") as_double(cfg.l_hi);
                else if (key == "seed") cfg.problem_seed = std::stoull(val);
                else if (key == "samples_per_client") as_size(cfg.samples_per_client);
                else if (key == "data") cfg.data_path = val;
                else if (key == "normalize") as_bool(cfg.normalize);
                else bad("unknown key in [problem]");
            } else if (section == "method") {
                if (!current_method) { bad("key outside a [method] section"); continue; }
                if (key == "name") current_method->method = method_from_name(val);
                else if (key == "params") {
                    if (val == "derived") current_method->derived = true;
                    else if (val == "explicit") current_method->derived = false;
                    else bad("expected derived or explicit");
                } else if (key == "gamma") { double g = 0; as_double(g); current_method->gamma = g; }
                else if (key == "p") { double p = 0; as_double(p); current_method->p = p; }
                else if (key == "q") {
                    std::vector<double> q;
                    for (const auto& tok : split(val, ',')) q.push_back(std::stod(tok));
                    current_method->q = std::move(q);
                } else bad("unknown key in [method]");
            } else if (section == "run") {
                if (key == "T") { std::size_t t = 0; as_size(t); cfg.T = t; }
                else if (key == "seeds") {
                    cfg.seeds.clear();
                    for (const auto& tok : split(val, ',')) cfg.seeds.push_back(std::stoull(tok));
                } else if (key == "strict") as_bool(cfg.strict_stepsize);
                else if (key == "times") cfg.times_profile = val;
                else if (key == "t_com") as_double(cfg.t_com);
                else if (key == "target") as_double(cfg.target);
                else bad("unknown key in [run]");
            } else if (section == "output") {
                if (key == "dir") cfg.out_dir = val;
                else bad("unknown key in [output]");
            } else {
                errors.push_back("line " + std::to_string(line_no) + ": key before any section");
            }
        } catch (const std::exception& e) {
            bad(e.what());
        }
    }

    if (cfg.kind != "quadratic" && cfg.kind != "logistic" && cfg.kind != "libsvm") {
        errors.push_back("[problem] kind must be quadratic, logistic, or libsvm (got '" + cfg.kind + "')");
    }
    if (cfg.kind == "libsvm") {
        if (cfg.data_path.empty()) errors.push_back("[problem] libsvm requires data = <path>");
        else if (!fs::exists(cfg.data_path)) errors.push_back("[problem] data file does not exist: " + cfg.data_path);
    } else {
        if (cfg.d == 0) errors.push_back("[problem] d must be >= 1");
        if (!(cfg.l_large > cfg.lambda)) errors.push_back("[problem] l_large must exceed lambda");
        if (cfg.n > 1 && !(cfg.l_lo > 0.0 && cfg.l_hi >= cfg.l_lo)) {
            errors.push_back("[problem] need 0 < l_lo <= l_hi for the smoothness profile");
        }
    }
    if (cfg.n == 0) errors.push_back("[problem] n must be >= 1");
    if (!(cfg.lambda > 0.0)) errors.push_back("[problem] lambda must be > 0");
    if (cfg.methods.empty()) errors.push_back("at least one [method] section is required");
    if (cfg.seeds.empty()) errors.push_back("[run] seeds must be non-empty");
    if (cfg.times_profile != "uniform" && cfg.times_profile != "random" && cfg.times_profile != "t-opt") {
        errors.push_back("[run] times must be uniform, random, or t-opt");
    }
    if (!(cfg.target > 0.0 && cfg.target <= 1.0)) errors.push_back("[run] target must be in (0,1]");
    if (!(cfg.t_com >= 0.0)) errors.push_back("[run] t_com must be >= 0");

    if (!errors.empty()) {
        std::string msg = "invalid experiment config:";
        for (const auto& e : errors) msg += "\n  - " + e;
        throw std::invalid_argument(msg);
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_experiment_config(buf.str());
}

LiftedObjective build_problem(const ExperimentConfig& cfg) {
    if (cfg.kind == "libsvm") {
        const Dataset ds = load_libsvm_file(cfg.data_path);
        std::vector<LocalObjective> locals;
        for (const auto& shard : partition(ds, cfg.n)) {
            locals.push_back(objective_from_shard(shard, cfg.lambda, cfg.normalize));
        }
        return LiftedObjective(std::move(locals));
    }
    const auto targets = heterogeneous_profile(cfg.n, cfg.l_large, cfg.l_lo, cfg.l_hi, cfg.problem_seed);
    if (cfg.kind == "quadratic") {
        return LiftedObjective(synthesize_quadratics(cfg.n, cfg.d, targets, cfg.lambda, cfg.problem_seed));
    }
    return LiftedObjective(synthesize_logistic(cfg.n, cfg.d, targets, cfg.lambda,
                                               cfg.samples_per_client, cfg.problem_seed));
}

std::string problem_tag(const ExperimentConfig& cfg) {
    std::ostringstream tag;
    tag << cfg.kind << ";n=" << cfg.n << ";lambda=" << fmt(cfg.lambda);
    if (cfg.kind == "libsvm") {
        std::string path = cfg.data_path;
        std::replace(path.begin(), path.end(), ' ', '_');
        tag << ";data=" << path << ";norm=" << (cfg.normalize ? 1 : 0);
    } else {
        tag << ";d=" << cfg.d << ";L=" << fmt(cfg.l_large) << '/' << fmt(cfg.l_lo) << '/'
            << fmt(cfg.l_hi) << ";seed=" << cfg.problem_seed;
        if (cfg.kind == "logistic") tag << ";m=" << cfg.samples_per_client;
    }
    return tag.str();
}

std::string trace_to_csv(const Trace& trace, const std::string& tag, const std::string& method,
                         std::uint64_t seed, double target) {
    std::ostringstream out;
    out << "# skipsim-trace tag=" << tag << " method=" << method << " seed=" << seed
        << " target=" << fmt(target) << '\n';
    out << "t,psi,dist_sq,comm_rounds,grad_calls_total";
    for (std::size_t i = 0; i < trace.n; ++i) out << ",grad_calls_client_" << i;
    out << ",sim_time\n";
    for (const auto& r : trace.records) {
        out << r.t << ',' << fmt(r.psi) << ',' << fmt(r.dist_sq) << ',' << r.comm_rounds << ','
            << r.grad_calls_total();
        for (const auto c : r.grad_calls) out << ',' << c;
        out << ',' << fmt(r.sim_time) << '\n';
    }
    return out.str();
}

ExperimentResult run_experiment(const std::string& config_path) {
    const ExperimentConfig cfg = load_experiment_config(config_path);
    const LiftedObjective lifted = build_problem(cfg);
    const Minimizer minimizer = reference_minimizer(lifted);
    const std::string tag = problem_tag(cfg);

    std::vector<double> times; // empty means t_i = 1 for all clients
    if (cfg.times_profile == "random") {
        RngStream stream(cfg.problem_seed, 0, "times");
        times.resize(lifted.n());
        for (double& t : times) t = 0.1 + 0.9 * stream.uniform();
    } else if (cfg.times_profile == "t-opt") {
        times = optimal_compute_times(lifted.condition_numbers(), 1.0);
    }

    fs::path out_dir = cfg.out_dir;
    if (const char* env = std::getenv("SKIPSIM_OUT_DIR"); env && *env) out_dir = env;
    fs::create_directories(out_dir);

    const Regularizer consensus = Regularizer::consensus(lifted.n(), lifted.local(0).dim());

    ExperimentResult result;
    for (const auto& entry : cfg.methods) {
        RunConfig run = preset_config(entry.method, lifted);
        if (!entry.derived) {
            if (entry.gamma) run.gamma = *entry.gamma;
            if (entry.p) run.p = *entry.p;
            if (entry.q) run.q = *entry.q;
            // Compressor probabilities track (p, q); rebuild after overrides.
            const std::size_t n = lifted.n(), d = lifted.local(0).dim();
            if (entry.method == Method::gradskip_plus) {
                run.c_omega = CompressorSpec::bernoulli(run.p, n * d);
                run.c_Omega = CompressorSpec::block_bernoulli(run.q, d);
            } else if (entry.method == Method::randprox_fb) {
                run.c_omega = CompressorSpec::bernoulli(run.p, n * d);
            }
        }
        run.T = cfg.T;
        run.strict_stepsize = cfg.strict_stepsize;
        run.times = times;
        run.t_com = cfg.t_com;

        for (const auto seed : cfg.seeds) {
            run.seed = seed;
            const Trace trace = uses_plus_engine(entry.method)
                ? run_gradskip_plus(lifted, run, consensus, minimizer)
                : run_gradskip(lifted, run, minimizer);
            const std::string name = method_name(entry.method);
            const fs::path file = out_dir / ("trace_" + name + "_" + std::to_string(seed) + ".csv");
            std::ofstream f(file, std::ios::binary);
            if (!f) throw std::runtime_error("cannot write " + file.string());
            f << trace_to_csv(trace, tag, name, seed, cfg.target);
            result.trace_files.push_back(file.string());
        }
    }
    result.summary_file = emit_summary(out_dir.string());
    return result;
}

std::string emit_summary(const std::string& trace_dir) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(trace_dir)) {
        if (e.path().extension() == ".csv" && e.path().filename() != "summary.csv") {
            files.push_back(e.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<TraceStats> stats;
    for (const auto& f : files) stats.push_back(parse_trace_file(f));
    return write_summary(trace_dir, stats);
}

} // namespace skipsim
