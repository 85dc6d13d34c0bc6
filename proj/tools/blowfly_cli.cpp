#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "blowfly/arma.hpp"
#include "blowfly/blowfly.hpp"
#include "blowfly/criteria.hpp"
#include "blowfly/data.hpp"
#include "blowfly/io.hpp"
#include "blowfly/mif.hpp"
#include "blowfly/parallel.hpp"
#include "blowfly/smc.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace blowfly;

namespace {

struct Global {
    std::string data;
    std::optional<std::uint64_t> seed;
    std::string out = "results";
    unsigned threads = 0;
    std::string loglik_scale = "count";
};

// Natural-scale overrides applied on top of a params file.
struct ParamOverrides {
    std::string params_file;
    std::optional<double> P, N0, delta_rate, sigma_p, sigma_d, sigma_y;
    std::optional<int> delta, tau;

    void attach(CLI::App* cmd, const std::string& file_flag = "--params") {
        cmd->add_option(file_flag, params_file, "JSON file with BlowflyParams fields (default: published MLE)")
            ->check(CLI::ExistingFile);
        cmd->add_option("--P", P, "recruitment rate");
        cmd->add_option("--N0", N0, "competition scale");
        cmd->add_option("--delta-rate", delta_rate, "adult death rate");
        cmd->add_option("--sigma-p", sigma_p, "recruitment noise");
        cmd->add_option("--sigma-d", sigma_d, "survival noise");
        cmd->add_option("--sigma-y", sigma_y, "measurement overdispersion");
        cmd->add_option("--delta", delta, "Euler step in days (1 or 2)");
        cmd->add_option("--tau", tau, "maturation delay in days");
    }

    BlowflyParams resolve() const {
        BlowflyParams p = params_file.empty() ? published_mle() : blowfly_params_from_json(read_json(params_file));
        if (P) p.P = *P;
        if (N0) p.N0 = *N0;
        if (delta_rate) p.delta_rate = *delta_rate;
        if (sigma_p) p.sigma_p = *sigma_p;
        if (sigma_d) p.sigma_d = *sigma_d;
        if (sigma_y) p.sigma_y = *sigma_y;
        if (delta) p.delta = *delta;
        if (tau) p.tau = *tau;
        p.validate();
        return p;
    }
};

class Run {
public:
    Run(const Global& g, std::string command) : g_(g), command_(std::move(command)), start_(clock::now()) {
        config_["command"] = command_;
        config_["data"] = g.data.empty() ? json(nullptr) : json(g.data);
        config_["seed"] = *g.seed;
        config_["out"] = g.out;
        config_["threads"] = g.threads;
        config_["loglik_scale"] = g.loglik_scale;
    }

    json& config() { return config_; }

    fs::path path(const std::string& name) const {
        fs::create_directories(g_.out);
        return fs::path(g_.out) / name;
    }

    void finish(json result, const std::string& file) {
        json envelope;
        envelope["schema_version"] = kSchemaVersion;
        envelope["command"] = command_;
        envelope["git_describe"] = git_describe();
        envelope["config"] = config_;
        envelope["seed"] = *g_.seed;
        envelope["runtime_seconds"] = std::chrono::duration<double>(clock::now() - start_).count();
        for (auto& [k, v] : result.items()) envelope[k] = v;
        const auto p = path(file);
        write_json(p, envelope);
        check_schema(read_json(p), p.string());
        std::cout << p.string() << '\n';
    }

private:
    using clock = std::chrono::steady_clock;
    const Global& g_;
    std::string command_;
    std::chrono::time_point<clock> start_;
    json config_;
};

ObservationSeries require_data(const Global& g) {
    if (g.data.empty()) throw Error(ErrorCode::MissingFile, "this command needs --data PATH");
    return load_series(g.data);
}

LoglikScale scale_of(const Global& g) { return g.loglik_scale == "log" ? LoglikScale::Log : LoglikScale::Count; }

// Initial delay state from the data window, or a constant history.
DelayState start_state(const Global& g, std::optional<double> level, const BlowflyParams& p, json& config) {
    if (level) {
        config["init"] = {{"level", *level}};
        const auto v = static_cast<std::int64_t>(std::llround(*level));
        return DelayState(std::vector<std::int64_t>(static_cast<std::size_t>(p.tau / p.delta) + 1, v), 16, p.delta);
    }
    const auto series = require_data(g);
    config["init"] = "data window";
    return initial_state(init_window(series), p.delta, p.tau);
}

FitResult pomp_fit(const std::string& label, const BlowflyParams& p, double loglik, std::optional<double> se) {
    FitResult r;
    r.model = label.empty() ? "pomp-delta" + std::to_string(p.delta) : label;
    const auto v = p.estimated();
    for (std::size_t i = 0; i < v.size(); ++i) r.params.emplace_back(BlowflyParams::kNames[i], v[i]);
    r.loglik = loglik;
    r.loglik_se = se;
    r.k = BlowflyParams::kEstimated;
    r.aic = aic(loglik, r.k);
    r.scale = LoglikScale::Count;
    return r;
}

struct SimulateOpts {
    ParamOverrides params;
    std::size_t steps = 400;
    bool no_measurement = false;
    std::optional<double> init_level;
};

void cmd_simulate(const Global& g, const SimulateOpts& o) {
    Run run(g, "simulate");
    const auto p = o.params.resolve();
    run.config()["params"] = to_json(p);
    run.config()["steps"] = o.steps;
    run.config()["measurement"] = !o.no_measurement;
    const DelayState init = start_state(g, o.init_level, p, run.config());
    const auto traj = simulate(p, init, o.steps, *g.seed, !o.no_measurement);
    std::ofstream csv(run.path("simulate.csv"));
    write_trajectory_csv(csv, traj);
    csv.close();
    json result{{"rows", o.steps}, {"csv", "simulate.csv"}};
    if (!o.no_measurement) {
        // the measured series alone, loadable again through --data
        std::ofstream obs(run.path("observations.csv"));
        obs << "day,count\n";
        for (std::size_t i = 1; i < traj.times.size(); ++i)
            if (traj.observed[i]) obs << traj.times[i] << ',' << traj.y[i] << '\n';
        result["observations_csv"] = "observations.csv";
    }
    run.finish(result, "simulate.json");
}

struct SkeletonOpts {
    ParamOverrides params;
    std::size_t steps = 400;
    std::optional<double> init_level;
};

void cmd_skeleton(const Global& g, const SkeletonOpts& o) {
    Run run(g, "skeleton");
    const auto p = o.params.resolve();
    run.config()["params"] = to_json(p);
    run.config()["steps"] = o.steps;
    const DelayState init = start_state(g, o.init_level, p, run.config());
    const auto path = skeleton_trajectory(to_skeleton_state(init), p, o.steps);
    std::vector<int> days(path.size());
    for (std::size_t i = 0; i < days.size(); ++i) days[i] = init.current_time() + static_cast<int>(i) * p.delta;
    std::ofstream csv(run.path("skeleton.csv"));
    write_skeleton_csv(csv, days, path);
    csv.close();
    json result{{"csv", "skeleton.csv"}, {"fixed_point", skeleton_fixed_point(p)}};
    if (!g.data.empty()) {
        const auto series = load_series(g.data);
        std::ofstream data_csv(run.path("data.csv"));
        data_csv << "day,count\n";
        for (std::size_t i = 0; i < series.size(); ++i) data_csv << series.times[i] << ',' << series.counts[i] << '\n';
        result["data_csv"] = "data.csv";
    }
    run.finish(result, "skeleton.json");
}

struct PfilterOpts {
    ParamOverrides params;
    std::size_t particles = 1000;
    std::size_t reps = 1;
    std::string label;
};

void cmd_pfilter(const Global& g, const PfilterOpts& o) {
    Run run(g, "pfilter");
    const auto p = o.params.resolve();
    run.config()["params"] = to_json(p);
    run.config()["particles"] = o.particles;
    run.config()["reps"] = o.reps;
    const auto series = require_data(g);
    const BlowflyModel model(initial_state(init_window(series), p.delta, p.tau), p.delta, p.tau);
    const auto y = fit_observations(series);
    const auto theta = p.estimated();

    const auto seeds = replicate_seeds(*g.seed, o.reps);
    FilterResult first = pfilter(model, theta, y, FilterOptions{o.particles, seeds[0], 0, g.threads});
    double loglik = first.loglik;
    std::optional<double> se;
    json reps = json::array({first.loglik});
    if (o.reps >= 2) {
        std::vector<double> lls{first.loglik};
        for (std::size_t r = 1; r < o.reps; ++r) {
            lls.push_back(pfilter(model, theta, y, FilterOptions{o.particles, seeds[r], 0, g.threads}).loglik);
            reps.push_back(lls.back());
        }
        const auto est = combine_replicates(lls);
        loglik = est.loglik;
        se = est.se;
        first.loglik_se = est.se;
    }
    json result{{"filter", to_json(first)}, {"replicate_logliks", reps}};
    result["fit"] = to_json(pomp_fit(o.label, p, loglik, se));
    run.finish(result, "pfilter.json");
}

struct MifOpts {
    ParamOverrides params;
    std::size_t particles = 5000;
    std::size_t iterations = 60;
    double cooling = 0.95;
    std::vector<double> rw_sd{0.02};
    std::size_t restarts = 5;
    std::size_t final_reps = 10;
    double jitter = 10.0;
    std::string label;
};

void cmd_mif(const Global& g, const MifOpts& o) {
    Run run(g, "mif");
    const auto start = o.params.resolve();
    const auto series = require_data(g);
    const BlowflyModel model(initial_state(init_window(series), start.delta, start.tau), start.delta, start.tau);
    const auto y = fit_observations(series);

    MifConfig cfg;
    cfg.particles = o.particles;
    cfg.iterations = o.iterations;
    cfg.cooling = o.cooling;
    cfg.seed = *g.seed;
    cfg.threads = g.threads;
    cfg.final_reps = o.final_reps;
    if (o.rw_sd.size() == 1) cfg.rw_sd.assign(BlowflyParams::kEstimated, o.rw_sd[0]);
    else cfg.rw_sd = o.rw_sd;

    run.config()["start"] = to_json(start);
    run.config()["particles"] = o.particles;
    run.config()["iterations"] = o.iterations;
    run.config()["cooling"] = o.cooling;
    run.config()["rw_sd"] = cfg.rw_sd;
    run.config()["restarts"] = o.restarts;
    run.config()["final_reps"] = o.final_reps;
    run.config()["jitter_scale"] = o.jitter;

    const auto theta = start.estimated();
    const auto out = mif_restarts(model, theta, y, cfg, o.restarts, o.jitter);
    const auto& best = out.runs[out.best];
    json runs = json::array();
    for (std::size_t r = 0; r < out.runs.size(); ++r)
        runs.push_back({{"restart", r}, {"start", out.starts[r]}, {"trace", to_json(out.runs[r])}});

    std::ofstream csv(run.path("mif_trace.csv"));
    write_mif_trace_csv(csv, best);
    csv.close();

    const auto final_params = model.params_from(best.final_params);
    json result{{"best_restart", out.best}, {"runs", runs}, {"final_params", to_json(final_params)}};
    result["fit"] = to_json(pomp_fit(o.label, final_params, best.final_loglik, best.final_loglik_se));
    run.finish(result, "mif.json");
}

struct ArmaOpts {
    std::size_t p = 2;
    std::size_t q = 2;
    std::size_t restarts = 20;
    std::string label;
};

void cmd_arma(const Global& g, const ArmaOpts& o) {
    Run run(g, "arma");
    run.config()["p"] = o.p;
    run.config()["q"] = o.q;
    run.config()["restarts"] = o.restarts;
    const auto counts = fit_observations(require_data(g));
    ArmaFitOptions opt;
    opt.restarts = o.restarts;
    opt.seed = *g.seed;
    opt.scale = scale_of(g);
    const auto fit = arma_fit(counts, o.p, o.q, opt);
    FitResult r = fit.result;
    r.model = o.label.empty() ? "log-arma(" + std::to_string(o.p) + "," + std::to_string(o.q) + ")" : o.label;
    json result{{"p", o.p}, {"q", o.q}, {"params", to_json(fit.params)}, {"start_loglik", fit.start_loglik}};
    result["fit"] = to_json(r);
    run.finish(result, "arma.json");
}

struct NlarOpts {
    std::string params_file;
    std::string preset;
    bool fit = false;
    std::size_t horizon = 1;
    std::string label;
};

void cmd_nlar(const Global& g, const NlarOpts& o) {
    Run run(g, "nlar");
    const auto series = require_data(g);
    std::vector<double> counts(series.counts.begin(), series.counts.end());

    XTParams params;
    if (!o.params_file.empty()) params = xt_params_from_json(read_json(o.params_file));
    else if (o.preset == "apeT") params = apeT_published();
    else params = ape1_published();
    params.validate();
    run.config()["params"] = to_json(params);
    run.config()["preset"] = o.params_file.empty() ? json(o.preset) : json(nullptr);
    run.config()["fit"] = o.fit;
    run.config()["horizon"] = o.horizon;

    json result;
    FitResult r;
    if (o.fit) {
        const ApeConfig cfg{o.horizon, {}};
        const std::vector<XTParams> starts{params};
        const auto fit = ape_fit(counts, cfg, starts);
        params = fit.params;
        r = fit.result;
    } else {
        r.model = "xt-gaussian";
        r.params = {{"c", params.c}, {"alpha", params.alpha}, {"N0_xt", params.N0_xt}, {"nu", params.nu}};
        r.loglik = xt_gaussian_loglik(params, counts);
        r.k = 5;
        r.aic = aic(r.loglik, r.k);
    }
    if (!o.label.empty()) r.model = o.label;
    const auto q = derived_quantities(params);
    result["params"] = to_json(params);
    result["derived"] = {{"eggs_rate", q.eggs_rate},
                         {"recruit_maximizer", q.recruit_maximizer},
                         {"life_expectancy_days", q.life_expectancy_days}};
    result["ape"] = ape_objective(params, counts, ApeConfig{o.horizon, {}});
    result["fit"] = to_json(r);
    run.finish(result, "nlar.json");
}

struct CompareOpts {
    std::vector<std::string> inputs;
    std::size_t df = 5;
};

void cmd_compare(const Global& g, const CompareOpts& o) {
    Run run(g, "compare");
    run.config()["inputs"] = o.inputs;
    run.config()["df"] = o.df;
    std::vector<ComparisonRow> rows;
    for (const auto& in : o.inputs) {
        const json j = read_json(in);
        check_schema(j, in);
        if (!j.contains("fit")) throw Error(ErrorCode::SchemaMismatch, in + " has no fit section");
        const auto& f = j.at("fit");
        const std::string scale = f.value("loglik_scale", "count");
        std::string notes = fs::path(in).filename().string();
        if (scale != g.loglik_scale) notes += " (" + scale + " scale)";
        rows.push_back({f.at("model").get<std::string>(), f.at("k").get<std::size_t>(), f.at("loglik").get<double>(),
                        0.0, notes});
    }
    const auto table = aic_table(rows);
    json chisq = json::array();
    for (std::size_t a = 0; a < table.size(); ++a)
        for (std::size_t b = a + 1; b < table.size(); ++b) {
            json c = to_json(chisq_compare(table[a].loglik, table[b].loglik, o.df));
            c["a"] = table[a].model;
            c["b"] = table[b].model;
            chisq.push_back(c);
        }
    std::ofstream md(run.path("comparison.md"));
    md << comparison_markdown(table);
    md.close();
    run.finish({{"table", to_json(table)}, {"chisq", chisq}, {"markdown", "comparison.md"}}, "compare.json");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Blowfly population models: simulation, particle filtering, iterated filtering and benchmarks"};
    app.require_subcommand(1);
    app.fallthrough();

    Global g;
    app.add_option("--data", g.data, "day,count CSV of the observed series");
    app.add_option("--seed", g.seed, "64-bit seed (required)");
    app.add_option("--out", g.out, "output directory")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads, 0 for all cores")->capture_default_str();
    app.add_option("--loglik-scale", g.loglik_scale, "log-likelihood convention for log-ARMA")
        ->check(CLI::IsMember({"count", "log"}))
        ->capture_default_str();

    SimulateOpts sim;
    auto* c_sim = app.add_subcommand("simulate", "simulate a sample path");
    sim.params.attach(c_sim);
    c_sim->add_option("--steps", sim.steps, "Euler steps")->capture_default_str();
    c_sim->add_flag("--no-measurement", sim.no_measurement, "skip the negative binomial measurements");
    c_sim->add_option("--init-level", sim.init_level, "constant initial history instead of the data window");

    SkeletonOpts sk;
    auto* c_sk = app.add_subcommand("skeleton", "iterate the deterministic skeleton");
    sk.params.attach(c_sk);
    c_sk->add_option("--steps", sk.steps, "Euler steps")->capture_default_str();
    c_sk->add_option("--init-level", sk.init_level, "constant initial history instead of the data window");

    PfilterOpts pf;
    auto* c_pf = app.add_subcommand("pfilter", "particle filter log-likelihood");
    pf.params.attach(c_pf);
    c_pf->add_option("-J,--particles", pf.particles, "particle count")->capture_default_str();
    c_pf->add_option("--reps", pf.reps, "replicate filters")->capture_default_str()->check(CLI::PositiveNumber);
    c_pf->add_option("--label", pf.label, "model name in the comparison table");

    MifOpts mo;
    auto* c_mif = app.add_subcommand("mif", "iterated filtering search");
    mo.params.attach(c_mif, "--start");
    c_mif->add_option("-J,--particles", mo.particles, "particle count")->capture_default_str();
    c_mif->add_option("-M,--iterations", mo.iterations, "iterations")->capture_default_str();
    c_mif->add_option("--cooling", mo.cooling, "geometric cooling factor")->capture_default_str();
    c_mif->add_option("--rw-sd", mo.rw_sd, "random-walk sd on the log scale, one value or six")
        ->capture_default_str()
        ->expected(1, 6);
    c_mif->add_option("--restarts", mo.restarts, "search restarts")->capture_default_str();
    c_mif->add_option("--final-reps", mo.final_reps, "replicates for the final likelihood")->capture_default_str();
    c_mif->add_option("--jitter", mo.jitter, "restart jitter in units of rw-sd")->capture_default_str();
    c_mif->add_option("--label", mo.label, "model name in the comparison table");

    ArmaOpts ao;
    auto* c_arma = app.add_subcommand("arma", "log-ARMA benchmark fit");
    c_arma->add_option("--p", ao.p, "AR order")->capture_default_str();
    c_arma->add_option("--q", ao.q, "MA order")->capture_default_str();
    c_arma->add_option("--restarts", ao.restarts, "jittered restarts")->capture_default_str();
    c_arma->add_option("--label", ao.label, "model name in the comparison table");

    NlarOpts no;
    auto* c_nlar = app.add_subcommand("nlar", "nonlinear autoregression likelihood or APE fit");
    c_nlar->add_option("--params", no.params_file, "JSON file with XTParams fields")->check(CLI::ExistingFile);
    c_nlar->add_option("--preset", no.preset, "published estimate: ape1 or apeT")
        ->check(CLI::IsMember({"ape1", "apeT"}))
        ->default_val("ape1");
    c_nlar->add_flag("--fit", no.fit, "minimize APE starting from the given parameters");
    c_nlar->add_option("--horizon", no.horizon, "APE horizon (1 is one-step)")->capture_default_str();
    c_nlar->add_option("--label", no.label, "model name in the comparison table");

    CompareOpts co;
    auto* c_cmp = app.add_subcommand("compare", "AIC table and chi-squared checks from result files");
    c_cmp->add_option("inputs", co.inputs, "result JSON files")->required()->check(CLI::ExistingFile);
    c_cmp->add_option("--df", co.df, "chi-squared degrees of freedom")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    if (!g.seed) {
        std::cerr << "error: --seed is required; runs are never seeded implicitly\n";
        return 2;
    }
    try {
        if (*c_sim) cmd_simulate(g, sim);
        else if (*c_sk) cmd_skeleton(g, sk);
        else if (*c_pf) cmd_pfilter(g, pf);
        else if (*c_mif) cmd_mif(g, mo);
        else if (*c_arma) cmd_arma(g, ao);
        else if (*c_nlar) cmd_nlar(g, no);
        else if (*c_cmp) cmd_compare(g, co);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
