#include "unhaze/solver/serialize.hpp"

#include <fstream>

#include "unhaze/core/error.hpp"

namespace unhaze {

nlohmann::json to_json(const ProxSpec& spec) {
  nlohmann::json j{{"kind", prox_kind_name(spec.kind)}};
  switch (spec.kind) {
    case ProxKind::kIdentity:
      break;
    case ProxKind::kGuided:
      j["strength"] = spec.strength;
      j["radius"] = spec.radius;
      j["eps"] = spec.eps;
      break;
    case ProxKind::kBilateral:
      j["strength"] = spec.strength;
      j["radius"] = spec.radius;
      j["sigma_s"] = spec.sigma_s;
      j["sigma_r"] = spec.sigma_r;
      break;
  }
  return j;
}

ProxSpec prox_spec_from_json(const nlohmann::json& j) {
  ProxSpec spec;
  spec.kind = prox_kind_from_name(j.at("kind").get<std::string>());
  spec.strength = j.value("strength", spec.strength);
  spec.radius = j.value("radius", spec.radius);
  spec.eps = j.value("eps", spec.eps);
  spec.sigma_s = j.value("sigma_s", spec.sigma_s);
  spec.sigma_r = j.value("sigma_r", spec.sigma_r);
  require_valid(spec);
  return spec;
}

nlohmann::json to_json(const SolverParams& params) {
  nlohmann::json stages = nlohmann::json::array();
  for (const StageParams& s : params.stages) {
    stages.push_back({{"lambda", s.lambda},
                      {"mu", s.mu},
                      {"t_prox", to_json(s.t_prox)},
                      {"s_prox", to_json(s.s_prox)}});
  }
  nlohmann::json init{{"mode", params.init.mode == TransmissionInit::kDarkChannel
                                   ? "dark-channel"
                                   : "constant"}};
  if (params.init.mode == TransmissionInit::kConstant) init["constant"] = params.init.constant;
  return nlohmann::json{{"stages", stages},
                        {"t_floor", params.t_floor},
                        {"init", init},
                        {"raw_t_to_sgdm", params.raw_t_to_sgdm}};
}

SolverParams solver_params_from_json(const nlohmann::json& j) {
  SolverParams params;
  params.stages.clear();
  try {
    for (const nlohmann::json& s : j.at("stages")) {
      StageParams stage;
      stage.lambda = s.at("lambda").get<double>();
      stage.mu = s.at("mu").get<double>();
      if (s.contains("t_prox")) stage.t_prox = prox_spec_from_json(s.at("t_prox"));
      if (s.contains("s_prox")) stage.s_prox = prox_spec_from_json(s.at("s_prox"));
      params.stages.push_back(stage);
    }
    params.t_floor = j.value("t_floor", kTransmissionFloor);
    if (j.contains("init")) {
      const std::string mode = j.at("init").value("mode", "dark-channel");
      if (mode == "dark-channel") {
        params.init.mode = TransmissionInit::kDarkChannel;
      } else if (mode == "constant") {
        params.init.mode = TransmissionInit::kConstant;
        params.init.constant = j.at("init").value("constant", 0.5);
      } else {
        throw ConfigError("unknown transmission init mode '" + mode + "'");
      }
    }
    params.raw_t_to_sgdm = j.value("raw_t_to_sgdm", false);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad solver params: ") + e.what());
  }
  require_valid(params);
  return params;
}

nlohmann::json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_json_file(const nlohmann::json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed for " + path.string());
}

void save_solver_params(const SolverParams& params, const std::filesystem::path& path) {
  save_json_file(to_json(params), path);
}

SolverParams load_solver_params(const std::filesystem::path& path) {
  return solver_params_from_json(load_json_file(path));
}

}  // namespace unhaze
