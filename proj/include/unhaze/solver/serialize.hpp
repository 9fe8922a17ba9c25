#pragma once

#include <filesystem>

#include <json.hpp>

#include "unhaze/solver/unfolding.hpp"

namespace unhaze {

// Solver checkpoint format:
// {
//   "stages": [{"lambda", "mu", "t_prox": {...}, "s_prox": {...}}, ...],
//   "t_floor": 0.05,
//   "init": {"mode": "dark-channel" | "constant", "constant": 0.5},
//   "raw_t_to_sgdm": false
// }
nlohmann::json to_json(const ProxSpec& spec);
ProxSpec prox_spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SolverParams& params);
SolverParams solver_params_from_json(const nlohmann::json& j);

void save_solver_params(const SolverParams& params, const std::filesystem::path& path);
SolverParams load_solver_params(const std::filesystem::path& path);

// Shared plumbing for all JSON artifacts.
nlohmann::json load_json_file(const std::filesystem::path& path);
void save_json_file(const nlohmann::json& j, const std::filesystem::path& path);

}  // namespace unhaze
