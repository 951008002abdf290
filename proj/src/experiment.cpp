#include "sandlab/experiment.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "sandlab/exact.hpp"

namespace sandlab {

namespace fs = std::filesystem;
using nlohmann::json;

const char* model_name(Model model) {
    switch (model) {
    case Model::lll: return "lll";
    case Model::lllsp: return "lllsp";
    case Model::asm_model: return "asm";
    case Model::ssp: return "ssp";
    }
    return "unknown";
}

Model model_from_name(const std::string& name) {
    if (name == "lll") return Model::lll;
    if (name == "lllsp") return Model::lllsp;
    if (name == "asm") return Model::asm_model;
    if (name == "ssp") return Model::ssp;
    throw std::invalid_argument("unknown model: " + name);
}

namespace {

const char* policy_name(Policy p) {
    switch (p) {
    case Policy::lowest: return "lowest";
    case Policy::random: return "random";
    case Policy::highest: return "highest";
    }
    return "unknown";
}

Policy policy_from_name(const std::string& name) {
    if (name == "lowest") return Policy::lowest;
    if (name == "random") return Policy::random;
    if (name == "highest") return Policy::highest;
    throw std::invalid_argument("unknown policy: " + name);
}

void validate(const ExperimentConfig& config) {
    if (config.trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (config.generator.n < 2) throw std::invalid_argument("n must be >= 2");
    switch (config.model) {
    case Model::lll:
    case Model::lllsp:
        if (!(config.delta > 0.0 && config.delta <= 0.75))
            throw std::invalid_argument("delta must lie in (0, 3/4]");
        if (config.generator.kind == GeneratorKind::sandpile_uniform)
            throw std::invalid_argument(
                "lll/lllsp need a knapsack or direct-gso generator");
        break;
    case Model::asm_model:
    case Model::ssp: {
        SandpileParams sp{config.T, config.I, config.policy, config.max_steps};
        sp.validate();
        const bool uses_generator =
            config.model == Model::asm_model || !config.ssp_chain;
        if (uses_generator &&
            config.generator.kind != GeneratorKind::sandpile_uniform)
            throw std::invalid_argument(
                "independent sandpile runs need a sandpile-uniform generator");
        break;
    }
    }
}

GsoState make_gso_input(const ExperimentConfig& config, SplitMix64& rng) {
    if (config.generator.kind == GeneratorKind::knapsack) {
        const IntegerBasis basis = knapsack_basis(config.generator, rng);
        return gso_log_project(exact_gso(basis));
    }
    return direct_gso_sample(config.generator, rng);
}

TrialResult run_one_trial(const ExperimentConfig& config, std::int64_t t,
                          RunTrace* trace_out) {
    auto input_rng = SplitMix64::stream(config.seed, 2 * t);
    auto run_rng = SplitMix64::stream(config.seed, 2 * t + 1);
    TrialResult res;
    res.trial = t;
    const bool record = trace_out != nullptr;

    switch (config.model) {
    case Model::lll: {
        GsoState state = make_gso_input(config, input_rng);
        ReductionParams params{config.delta, config.policy, config.max_steps};
        RunTrace trace = lll_reduce(state, params, &run_rng, record);
        res.final_r = state.r;
        res.steps = trace.steps;
        res.terminated = trace.terminated;
        res.initial_energy = trace.initial_energy;
        res.final_energy = trace.final_energy;
        if (trace_out) *trace_out = std::move(trace);
        break;
    }
    case Model::lllsp: {
        GsoState state = make_gso_input(config, input_rng);
        size_reduce(state);
        RealConfig real = RealConfig::from_gso(state);
        ReductionParams params{config.delta, config.policy, config.max_steps};
        RunTrace trace = lllsp_stabilize(real, params, run_rng, record);
        res.final_r = real.heights;
        res.steps = trace.steps;
        res.terminated = trace.terminated;
        res.initial_energy = trace.initial_energy;
        res.final_energy = trace.final_energy;
        if (trace_out) *trace_out = std::move(trace);
        break;
    }
    case Model::asm_model: {
        const IntConfig input = sandpile_input(config.generator, input_rng);
        SandpileParams sp{config.T, config.I, config.policy, config.max_steps};
        res.initial_energy = static_cast<double>(energy(input));
        AsmResult out = asm_stabilize(input, sp, &run_rng);
        res.final_r.assign(out.config.heights.begin(), out.config.heights.end());
        res.steps = out.total_topples;
        res.terminated = out.terminated;
        res.final_energy = static_cast<double>(energy(out.config));
        break;
    }
    case Model::ssp: {
        const IntConfig input = sandpile_input(config.generator, input_rng);
        SandpileParams sp{config.T, config.I, config.policy, config.max_steps};
        SspResult out = ssp_stabilize(input, sp, run_rng, record);
        res.final_r.assign(out.config.heights.begin(), out.config.heights.end());
        res.steps = out.total_topples;
        res.terminated = out.trace.terminated;
        res.initial_energy = out.trace.initial_energy;
        res.final_energy = out.trace.final_energy;
        if (trace_out) *trace_out = std::move(out.trace);
        break;
    }
    }
    res.log_rhf_value = log_rhf(res.final_r, config.generator.n);
    res.rhf_value = std::exp(res.log_rhf_value);
    return res;
}

ExperimentResult aggregate(std::vector<TrialResult> trials) {
    ExperimentResult result;
    std::vector<RunShape> shapes;
    std::vector<std::pair<std::int64_t, double>> keyed_rhf;
    shapes.reserve(trials.size());
    keyed_rhf.reserve(trials.size());
    for (const auto& t : trials) {
        shapes.push_back({t.trial, t.final_r});
        keyed_rhf.emplace_back(t.trial, t.rhf_value);
        result.all_terminated = result.all_terminated && t.terminated;
    }
    result.shape = average_shape(std::move(shapes));
    result.rhf_hist = rhf_histogram(std::move(keyed_rhf));
    result.trials = std::move(trials);
    return result;
}

}  // namespace

ExperimentResult execute_experiment(const ExperimentConfig& config) {
    validate(config);

    if (config.model == Model::ssp && config.ssp_chain) {
        // Steady-state sampling is a single sequential chain.
        SandpileParams sp{config.T, config.I, config.policy, config.max_steps};
        IntConfig g{config.generator.n,
                    std::vector<std::int64_t>(config.generator.n - 1, 0)};
        g.heights[0] = 1;
        auto rng = SplitMix64::stream(config.seed, 0);
        SteadyStateRun run =
            ssp_steady_state_sample(config.generator.n, sp, g, config.burn_in,
                                    config.trials, rng, config.thin);
        std::vector<TrialResult> trials;
        trials.reserve(run.samples.size());
        for (std::size_t i = 0; i < run.samples.size(); ++i) {
            TrialResult t;
            t.trial = static_cast<std::int64_t>(i);
            t.final_r.assign(run.samples[i].heights.begin(),
                             run.samples[i].heights.end());
            t.log_rhf_value = log_rhf(t.final_r, config.generator.n);
            t.rhf_value = std::exp(t.log_rhf_value);
            t.final_energy = static_cast<double>(energy(run.samples[i]));
            t.initial_energy = t.final_energy;
            trials.push_back(std::move(t));
        }
        ExperimentResult result = aggregate(std::move(trials));
        result.burn_in_used = run.burn_in_used;
        return result;
    }

    std::vector<TrialResult> trials(static_cast<std::size_t>(config.trials));
    const int workers =
        std::max(1, std::min<int>(config.parallelism,
                                  static_cast<int>(config.trials)));
    std::atomic<std::int64_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::int64_t t = next.fetch_add(1);
            if (t >= config.trials) return;
            trials[static_cast<std::size_t>(t)] =
                run_one_trial(config, t, nullptr);
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    return aggregate(std::move(trials));
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

json generator_to_json(const GeneratorSpec& g) {
    return json{{"kind", generator_kind_name(g.kind)},
                {"n", g.n},
                {"bits", g.bits},
                {"r_range", {g.r_lo, g.r_hi}},
                {"height_range", {g.h_lo, g.h_hi}},
                {"seed", g.seed}};
}

GeneratorSpec generator_from_json(const json& j) {
    GeneratorSpec g;
    g.kind = generator_kind_from_name(j.at("kind").get<std::string>());
    g.n = j.at("n").get<int>();
    g.bits = j.at("bits").get<int>();
    g.r_lo = j.at("r_range")[0].get<double>();
    g.r_hi = j.at("r_range")[1].get<double>();
    g.h_lo = j.at("height_range")[0].get<std::int64_t>();
    g.h_hi = j.at("height_range")[1].get<std::int64_t>();
    g.seed = j.at("seed").get<std::uint64_t>();
    return g;
}

json config_to_json_obj(const ExperimentConfig& c) {
    return json{{"model", model_name(c.model)},
                {"generator", generator_to_json(c.generator)},
                {"delta", c.delta},
                {"T", c.T},
                {"I", c.I},
                {"policy", policy_name(c.policy)},
                {"trials", c.trials},
                {"seed", c.seed},
                {"parallelism", c.parallelism},
                {"max_steps", c.max_steps},
                {"trace_first_trial", c.trace_first_trial},
                {"ssp_chain", c.ssp_chain},
                {"burn_in", c.burn_in},
                {"thin", c.thin}};
}

ExperimentConfig config_from_json_obj(const json& j) {
    ExperimentConfig c;
    c.model = model_from_name(j.at("model").get<std::string>());
    c.generator = generator_from_json(j.at("generator"));
    c.delta = j.at("delta").get<double>();
    c.T = j.at("T").get<std::int64_t>();
    c.I = j.at("I").get<std::int64_t>();
    c.policy = policy_from_name(j.at("policy").get<std::string>());
    c.trials = j.at("trials").get<std::int64_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.parallelism = j.at("parallelism").get<int>();
    c.max_steps = j.at("max_steps").get<std::int64_t>();
    c.trace_first_trial = j.at("trace_first_trial").get<bool>();
    c.ssp_chain = j.at("ssp_chain").get<bool>();
    c.burn_in = j.at("burn_in").get<std::int64_t>();
    c.thin = j.at("thin").get<std::int64_t>();
    return c;
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::string shape_csv(const ShapeProfile& shape) {
    std::string s = "site,mean,stderr\n";
    for (std::size_t i = 0; i < shape.mean_r.size(); ++i) {
        s += std::to_string(i + 1);
        s += ',';
        s += format_double(shape.mean_r[i]);
        s += ',';
        s += format_double(shape.stderr_r[i]);
        s += '\n';
    }
    return s;
}

std::string hist_csv(const Histogram& hist) {
    std::string s = "bin_lo,bin_hi,count\n";
    for (std::size_t b = 0; b < hist.counts.size(); ++b) {
        s += format_double(hist.bin_edges[b]);
        s += ',';
        s += format_double(hist.bin_edges[b + 1]);
        s += ',';
        s += std::to_string(hist.counts[b]);
        s += '\n';
    }
    return s;
}

std::string runs_csv(const std::vector<TrialResult>& trials) {
    std::string s =
        "trial,rhf,log_rhf,steps,terminated,initial_energy,final_energy\n";
    for (const auto& t : trials) {
        s += std::to_string(t.trial);
        s += ',';
        s += format_double(t.rhf_value);
        s += ',';
        s += format_double(t.log_rhf_value);
        s += ',';
        s += std::to_string(t.steps);
        s += ',';
        s += t.terminated ? "1" : "0";
        s += ',';
        s += format_double(t.initial_energy);
        s += ',';
        s += format_double(t.final_energy);
        s += '\n';
    }
    return s;
}

std::string trace_csv(const RunTrace& trace) {
    std::string s = "step,site,increment_or_gamma,mu_abs,q_inv_sq,energy_after\n";
    double e = trace.initial_energy;
    for (const auto& ev : trace.events) {
        e -= ev.energy_drop;
        s += std::to_string(ev.step);
        s += ',';
        s += std::to_string(ev.site + 1);
        s += ',';
        s += format_double(ev.increment);
        s += ',';
        s += format_double(ev.mu_abs);
        s += ',';
        s += format_double(ev.q_inv_sq);
        s += ',';
        s += format_double(e);
        s += '\n';
    }
    return s;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& config) {
    return config_to_json_obj(config).dump(2) + "\n";
}

ExperimentConfig config_from_json(const std::string& text) {
    return config_from_json_obj(json::parse(text));
}

std::string gso_state_to_json(const GsoState& state) {
    json j{{"n", state.n}, {"r", state.r}};
    auto rows = json::array();
    for (int i = 1; i < state.n; ++i) rows.push_back(state.mu[i]);
    j["mu"] = rows;
    return j.dump();
}

GsoState gso_state_from_json(const std::string& text) {
    const json j = json::parse(text);
    GsoState s = GsoState::zero(j.at("n").get<int>());
    s.r = j.at("r").get<std::vector<double>>();
    const auto& rows = j.at("mu");
    for (int i = 1; i < s.n; ++i)
        s.mu[i] = rows.at(i - 1).get<std::vector<double>>();
    return s;
}

std::string int_config_to_json(const IntConfig& config) {
    return json(config.heights).dump();
}

IntConfig int_config_from_json(const std::string& text) {
    IntConfig c;
    c.heights = json::parse(text).get<std::vector<std::int64_t>>();
    c.n = static_cast<int>(c.heights.size()) + 1;
    return c;
}

std::string real_config_to_json(const RealConfig& config) {
    return json{{"heights", config.heights}, {"mu", config.mu}}.dump();
}

RealConfig real_config_from_json(const std::string& text) {
    const json j = json::parse(text);
    RealConfig c;
    c.heights = j.at("heights").get<std::vector<double>>();
    c.mu = j.at("mu").get<std::vector<double>>();
    c.n = static_cast<int>(c.heights.size()) + 1;
    return c;
}

int run_experiment(const ExperimentConfig& config) {
    try {
        validate(config);
    } catch (const std::invalid_argument& err) {
        std::fprintf(stderr, "invalid configuration: %s\n", err.what());
        return 2;
    }
    if (config.output_dir.empty()) {
        std::fprintf(stderr, "invalid configuration: no output directory\n");
        return 2;
    }

    ExperimentResult result = execute_experiment(config);

    RunTrace first_trace;
    // Traces exist for the stochastic models and the reduction loop; the
    // chain sampler and ASM have none.
    const bool want_trace =
        config.trace_first_trial && config.model != Model::asm_model &&
        !(config.model == Model::ssp && config.ssp_chain);
    if (want_trace) run_one_trial(config, 0, &first_trace);

    const fs::path dir(config.output_dir);
    fs::create_directories(dir);

    // The manifest omits the output directory so a rerun into a different
    // location produces byte-identical files.
    ExperimentConfig canonical = config;
    canonical.output_dir.clear();
    json manifest{{"format", 1},
                  {"tool", "sandlab"},
                  {"rng", "splitmix64-streams-v1"},
                  {"config", config_to_json_obj(canonical)}};
    write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
    write_text_file(dir / "shape.csv", shape_csv(result.shape));
    write_text_file(dir / "rhf_hist.csv", hist_csv(result.rhf_hist));
    write_text_file(dir / "runs.csv", runs_csv(result.trials));
    if (want_trace) write_text_file(dir / "trace.csv", trace_csv(first_trace));

    double mean_log_rhf = 0.0;
    for (const auto& t : result.trials) mean_log_rhf += t.log_rhf_value;
    mean_log_rhf /= static_cast<double>(result.trials.size());
    json summary{{"model", model_name(config.model)},
                 {"n", config.generator.n},
                 {"trials", result.shape.trials},
                 {"seed", config.seed},
                 {"mean_rhf", result.rhf_hist.mean},
                 {"stddev_rhf", result.rhf_hist.stddev},
                 {"mean_log_rhf", mean_log_rhf},
                 {"all_terminated", result.all_terminated},
                 {"burn_in_used", result.burn_in_used}};
    if (config.model == Model::lll || config.model == Model::lllsp) {
        summary["delta"] = config.delta;
        summary["threshold"] = -0.5 * std::log(config.delta);
    } else {
        summary["T"] = config.T;
        summary["I"] = config.I;
    }
    if (config.generator.n >= 40) {
        const double T_for_metrics =
            (config.model == Model::lll || config.model == Model::lllsp)
                ? -0.5 * std::log(config.delta)
                : static_cast<double>(config.T);
        const ShapeMetrics sm = shape_metrics(result.shape, T_for_metrics);
        summary["shape_metrics"] = {{"plateau", sm.plateau},
                                    {"threshold_gap", sm.threshold_gap},
                                    {"boundary_gap", sm.boundary_gap},
                                    {"onset_left", sm.onset_left},
                                    {"onset_right", sm.onset_right}};
    }
    write_text_file(dir / "summary.json", summary.dump(2) + "\n");

    return result.all_terminated ? 0 : 3;
}

double ks_critical_value(std::size_t m, std::size_t n, double alpha) {
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    const double mm = static_cast<double>(m), nn = static_cast<double>(n);
    return c * std::sqrt((mm + nn) / (mm * nn));
}

namespace {

json load_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    json j;
    in >> j;
    return j;
}

struct LoadedRun {
    int n = 0;
    std::string model;
    std::vector<double> mean_r;
    std::vector<double> rhf_samples;
};

LoadedRun load_run_dir(const fs::path& dir) {
    LoadedRun run;
    const json manifest = load_json_file(dir / "manifest.json");
    run.n = manifest.at("config").at("generator").at("n").get<int>();
    run.model = manifest.at("config").at("model").get<std::string>();

    std::ifstream shape(dir / "shape.csv");
    if (!shape) throw std::runtime_error("cannot open shape.csv in " + dir.string());
    std::string line;
    std::getline(shape, line);  // header
    while (std::getline(shape, line)) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        run.mean_r.push_back(std::stod(line.substr(c1 + 1, c2 - c1 - 1)));
    }

    std::ifstream runs(dir / "runs.csv");
    if (!runs) throw std::runtime_error("cannot open runs.csv in " + dir.string());
    std::getline(runs, line);  // header
    while (std::getline(runs, line)) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        run.rhf_samples.push_back(std::stod(line.substr(c1 + 1, c2 - c1 - 1)));
    }
    return run;
}

}  // namespace

int compare_runs(const std::string& dir_a, const std::string& dir_b,
                 const CompareTolerances& tol, std::ostream& out,
                 CompareReport* report) {
    LoadedRun a, b;
    try {
        a = load_run_dir(dir_a);
        b = load_run_dir(dir_b);
    } catch (const std::exception& err) {
        out << "compare: " << err.what() << "\n";
        return 2;
    }
    if (a.n != b.n || a.mean_r.size() != b.mean_r.size()) {
        out << "compare: dimension mismatch (" << a.n << " vs " << b.n << ")\n";
        return 2;
    }

    CompareReport rep;
    rep.n = a.n;
    rep.site_diff.resize(a.mean_r.size());
    for (std::size_t i = 0; i < a.mean_r.size(); ++i)
        rep.site_diff[i] = std::abs(a.mean_r[i] - b.mean_r[i]);
    const auto [lo, hi] = middle_third(a.n);
    for (int i = lo; i < hi; ++i)
        rep.max_middle_diff = std::max(rep.max_middle_diff, rep.site_diff[i]);

    double mean_a = 0.0, mean_b = 0.0;
    for (double v : a.rhf_samples) mean_a += v;
    for (double v : b.rhf_samples) mean_b += v;
    mean_a /= static_cast<double>(a.rhf_samples.size());
    mean_b /= static_cast<double>(b.rhf_samples.size());
    rep.mean_rhf_diff = std::abs(mean_a - mean_b);

    rep.ks_statistic = ks_distance(a.rhf_samples, b.rhf_samples);
    rep.ks_critical = ks_critical_value(a.rhf_samples.size(),
                                        b.rhf_samples.size(), tol.ks_level);
    rep.pass = rep.max_middle_diff <= tol.shape_middle &&
               rep.mean_rhf_diff <= tol.mean_rhf &&
               rep.ks_statistic < rep.ks_critical;

    out << "n                 " << rep.n << "\n"
        << "max middle diff   " << format_double(rep.max_middle_diff)
        << "  (tol " << format_double(tol.shape_middle) << ")\n"
        << "mean RHF a        " << format_double(mean_a) << "\n"
        << "mean RHF b        " << format_double(mean_b) << "\n"
        << "mean RHF diff     " << format_double(rep.mean_rhf_diff)
        << "  (tol " << format_double(tol.mean_rhf) << ")\n"
        << "KS statistic      " << format_double(rep.ks_statistic)
        << "  (critical " << format_double(rep.ks_critical) << ")\n"
        << (rep.pass ? "PASS" : "FAIL") << "\n";
    if (report) *report = rep;
    return rep.pass ? 0 : 1;
}

}  // namespace sandlab
