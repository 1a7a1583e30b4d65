#pragma once

#include <string>

#include <json.hpp>

#include "sympde/msfl.hpp"
#include "sympde/pde.hpp"
#include "sympde/train.hpp"

namespace sympde {

using Json = nlohmann::ordered_json;

// {name, variables, residual, domain: {var: [lo, hi]}, constraints: [...],
//  lambda, epsilon, depth?}
Json problem_to_json(const ProblemConfig& config);
// Throws ConfigError on missing or mistyped fields.
ProblemConfig problem_from_json(const Json& j);
ProblemConfig load_problem(const std::string& path);

// {m, d, lib, gate_mode, parameters}
Json model_to_json(const MsflModel& model);
MsflModel model_from_json(const Json& j);

Json train_config_to_json(const TrainConfig& config);
// Full-precision expressions; timing and thread counts are left out so the
// output depends only on problem, config and seed.
Json report_to_json(const SolutionReport& report);

// Serializes with two-space indentation and a trailing newline.
std::string dump(const Json& j);

}  // namespace sympde
