#include "blowfly/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#ifndef BLOWFLY_GIT_DESCRIBE
#define BLOWFLY_GIT_DESCRIBE "unknown"
#endif

namespace blowfly {

using nlohmann::json;

std::string git_describe() { return BLOWFLY_GIT_DESCRIBE; }

json to_json(const BlowflyParams& p) {
    return json{{"P", p.P},         {"N0", p.N0},           {"delta_rate", p.delta_rate}, {"sigma_p", p.sigma_p},
                {"sigma_d", p.sigma_d}, {"sigma_y", p.sigma_y}, {"delta", p.delta},           {"tau", p.tau}};
}

json to_json(const XTParams& p) {
    json j{{"c", p.c}, {"alpha", p.alpha}, {"N0_xt", p.N0_xt}, {"nu", p.nu}, {"tau", p.tau}};
    j["sigma2"] = p.profiled() ? json(nullptr) : json(p.sigma2);
    return j;
}

json to_json(const ArmaParams& p) {
    return json{{"ar", p.ar}, {"ma", p.ma}, {"intercept", p.intercept}, {"var", p.var}};
}

json to_json(const FilterResult& r) {
    json j{{"loglik", r.loglik},
           {"cond_logliks", r.cond_logliks},
           {"ess", r.ess},
           {"filter_means", r.filter_means},
           {"J", r.particles},
           {"seed", r.seed}};
    j["loglik_se"] = r.loglik_se ? json(*r.loglik_se) : json(nullptr);
    return j;
}

json to_json(const MifTrace& t) {
    json iterations = json::array();
    for (const auto& it : t.iterations) {
        json mean;
        for (std::size_t j = 0; j < t.names.size(); ++j) mean[t.names[j]] = it.mean[j];
        iterations.push_back({{"iteration", it.iteration}, {"loglik", it.loglik}, {"mean", mean}});
    }
    json final_params;
    for (std::size_t j = 0; j < t.names.size(); ++j) final_params[t.names[j]] = t.final_params[j];
    return json{{"iterations", iterations},
                {"final_params", final_params},
                {"final_loglik", t.final_loglik},
                {"final_loglik_se", t.final_loglik_se}};
}

json to_json(const FitResult& r) {
    json params = json::object();
    for (const auto& [name, value] : r.params) params[name] = value;
    json diagnostics = json::object();
    for (const auto& [name, value] : r.diagnostics) diagnostics[name] = value;
    json j{{"model", r.model},      {"params", params}, {"loglik", r.loglik},
           {"k", r.k},              {"aic", r.aic},     {"loglik_scale", to_string(r.scale)},
           {"diagnostics", diagnostics}};
    j["loglik_se"] = r.loglik_se ? json(*r.loglik_se) : json(nullptr);
    return j;
}

json to_json(const ChisqReport& r) {
    return json{{"twice_diff", r.twice_diff},
                {"threshold_95", r.threshold_95},
                {"df", r.df},
                {"plausible_both", r.plausible_both}};
}

json to_json(const std::vector<ComparisonRow>& table) {
    json rows = json::array();
    for (const auto& r : table)
        rows.push_back({{"model", r.model}, {"k", r.k}, {"loglik", r.loglik}, {"aic", r.aic}, {"notes", r.notes}});
    return rows;
}

BlowflyParams blowfly_params_from_json(const json& j) {
    BlowflyParams p;
    p.P = j.at("P").get<double>();
    p.N0 = j.at("N0").get<double>();
    p.delta_rate = j.at("delta_rate").get<double>();
    p.sigma_p = j.at("sigma_p").get<double>();
    p.sigma_d = j.at("sigma_d").get<double>();
    p.sigma_y = j.at("sigma_y").get<double>();
    p.delta = j.value("delta", 1);
    p.tau = j.value("tau", 14);
    return p;
}

XTParams xt_params_from_json(const json& j) {
    XTParams p;
    p.c = j.at("c").get<double>();
    p.alpha = j.at("alpha").get<double>();
    p.N0_xt = j.at("N0_xt").get<double>();
    p.nu = j.at("nu").get<double>();
    p.tau = j.value("tau", 14);
    if (j.contains("sigma2") && !j.at("sigma2").is_null()) p.sigma2 = j.at("sigma2").get<double>();
    return p;
}

ArmaParams arma_params_from_json(const json& j) {
    ArmaParams p;
    p.ar = j.value("ar", std::vector<double>{});
    p.ma = j.value("ma", std::vector<double>{});
    p.intercept = j.at("intercept").get<double>();
    p.var = j.at("var").get<double>();
    return p;
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedRow, path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const json& j) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
    out << std::setw(2) << j << '\n';
}

void check_schema(const json& j, const std::string& origin) {
    if (!j.contains("schema_version") || j.at("schema_version") != kSchemaVersion)
        throw Error(ErrorCode::SchemaMismatch, origin + " does not carry schema_version " + std::to_string(kSchemaVersion));
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    out << "day,N,y\n";
    for (std::size_t i = 1; i < traj.times.size(); ++i) {
        out << traj.times[i] << ',' << static_cast<long long>(traj.N[i]) << ',';
        if (traj.observed[i]) out << traj.y[i];
        out << '\n';
    }
}

void write_skeleton_csv(std::ostream& out, std::span<const int> days, std::span<const double> values) {
    out << "day,N_skeleton\n" << std::setprecision(10);
    for (std::size_t i = 0; i < days.size(); ++i) out << days[i] << ',' << values[i] << '\n';
}

void write_mif_trace_csv(std::ostream& out, const MifTrace& trace) {
    out << "iteration,loglik";
    for (const auto& n : trace.names) out << ',' << n;
    out << '\n' << std::setprecision(10);
    for (const auto& it : trace.iterations) {
        out << it.iteration << ',' << it.loglik;
        for (const double v : it.mean) out << ',' << v;
        out << '\n';
    }
}

std::string comparison_markdown(const std::vector<ComparisonRow>& table) {
    std::ostringstream out;
    out << "| model | k | loglik | AIC | notes |\n|---|---:|---:|---:|---|\n" << std::fixed << std::setprecision(1);
    for (const auto& r : table)
        out << "| " << r.model << " | " << r.k << " | " << r.loglik << " | " << r.aic << " | " << r.notes << " |\n";
    return out.str();
}

}  // namespace blowfly
