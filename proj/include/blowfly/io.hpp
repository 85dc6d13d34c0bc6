#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "blowfly/arma.hpp"
#include "blowfly/blowfly.hpp"
#include "blowfly/criteria.hpp"
#include "blowfly/fit_result.hpp"
#include "blowfly/mif.hpp"
#include "blowfly/smc.hpp"

namespace blowfly {

inline constexpr int kSchemaVersion = 1;

/// Build identifier recorded in every result file.
std::string git_describe();

nlohmann::json to_json(const BlowflyParams& p);
nlohmann::json to_json(const XTParams& p);
nlohmann::json to_json(const ArmaParams& p);
nlohmann::json to_json(const FilterResult& r);
nlohmann::json to_json(const MifTrace& t);
nlohmann::json to_json(const FitResult& r);
nlohmann::json to_json(const ChisqReport& r);
nlohmann::json to_json(const std::vector<ComparisonRow>& table);

/// Natural-scale field names exactly as in the parameter structs. Missing
/// BlowflyParams delta/tau fall back to 1 and 14.
BlowflyParams blowfly_params_from_json(const nlohmann::json& j);
XTParams xt_params_from_json(const nlohmann::json& j);
ArmaParams arma_params_from_json(const nlohmann::json& j);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// Result-file envelope check: throws SchemaMismatch unless schema_version matches.
void check_schema(const nlohmann::json& j, const std::string& origin);

/// `day,N,y` with an empty y outside observation times; the initial state row is omitted.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
/// `day,N_skeleton`
void write_skeleton_csv(std::ostream& out, std::span<const int> days, std::span<const double> values);
/// `iteration,loglik,<parameter names...>`
void write_mif_trace_csv(std::ostream& out, const MifTrace& trace);
std::string comparison_markdown(const std::vector<ComparisonRow>& table);

}  // namespace blowfly
