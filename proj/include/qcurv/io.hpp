#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qcurv/diagnostics.hpp"
#include "qcurv/ode_oracle.hpp"
#include "qcurv/solver.hpp"

namespace qcurv {

using json = nlohmann::json;

json to_json(const Tail& t);
Tail tail_from_json(const json& j);

json to_json(const RadialField& u);
RadialField field_from_json(const json& j);

void write_csv(const RadialField& u, const std::string& path);
std::pair<std::vector<double>, std::vector<double>> read_csv(const std::string& path);

json to_json(const CurvatureProfile& K);
CurvatureProfile profile_from_json(const json& j);

json to_json(const GridParams& g);
GridParams grid_params_from_json(const json& j);

json to_json(const SolveSpec& s);
SolveSpec solve_spec_from_json(const json& j);

json to_json(const Thresholds& t);

// with_field: embed the profile values (needed by `verify`)
json to_json(const SolutionRecord& rec, bool with_field = true);
SolutionRecord record_from_json(const json& j);

json to_json(const PohozaevReport& p);
json to_json(const SlopeFit& s);
json to_json(const BlowupReport& b);
json to_json(const LogLogFit& l);
json to_json(const DecayCheck& d);
json to_json(const DiagnosticsReport& d);

json to_json(const ShootState& s, bool with_trajectory = false);
void write_trajectory_csv(const ShootState& s, const std::string& path);

json read_json_file(const std::string& path);
void write_json_file(const json& j, const std::string& path);

}  // namespace qcurv
