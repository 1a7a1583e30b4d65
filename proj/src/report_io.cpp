#include <cmath>

#include "sympde/io.hpp"

namespace sympde {
namespace {

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

Json train_config_to_json(const TrainConfig& config)
{
    Json j;
    j["restarts"] = config.restarts;
    j["iterations"] = config.iterations;
    j["soft_fraction"] = config.soft_fraction;
    j["gate_flip"] = gate_flip_iteration(config);
    j["sample_size"] = config.sample_size;
    j["validation_size"] = config.validation_size;
    j["validation_epsilon"] = config.validation_epsilon;
    j["learning_rate"] = config.learning_rate;
    j["final_learning_rate"] = config.final_learning_rate;
    j["decay_iteration"] = config.decay_iteration;
    j["seed"] = config.seed;
    j["depth"] = config.depth ? Json(*config.depth) : Json(nullptr);
    j["engine"] = config.engine == Engine::Kernel ? "kernel" : "tape";
    return j;
}

Json report_to_json(const SolutionReport& report)
{
    const auto& vars = report.problem.variables;
    Json j;
    j["problem"] = problem_to_json(report.problem);
    j["config"] = train_config_to_json(report.config);

    const RunRecord& best = report.runs.at(report.winner);
    Json w;
    w["restart"] = best.restart;
    w["seed"] = best.seed;
    w["validation_loss"] = finite_or_null(report.validation_loss);
    w["expression"] = to_string(report.simplified, vars, kFullPrecision);
    w["expression_raw"] = to_string(report.raw, vars, kFullPrecision);
    w["display"] = to_string(report.simplified, vars, 4);
    j["winner"] = w;

    Json runs = Json::array();
    for (const RunRecord& r : report.runs)
    {
        Json rj;
        rj["restart"] = r.restart;
        rj["seed"] = r.seed;
        rj["depth"] = r.depth;
        rj["diverged"] = r.diverged;
        rj["iterations_run"] = r.iterations_run;
        rj["gate_flip"] = r.gate_flip;
        rj["validation_loss"] = finite_or_null(r.validation_loss);
        rj["expression"] = r.diverged ? Json(nullptr)
                                      : Json(to_string(r.expression, vars, kFullPrecision));
        Json params = Json::array();
        for (double p : r.parameters)
            params.push_back(finite_or_null(p));
        rj["parameters"] = params;
        Json curve = Json::array();
        for (auto [it, loss] : r.curve)
            curve.push_back({it, finite_or_null(loss)});
        rj["curve"] = curve;
        runs.push_back(rj);
    }
    j["runs"] = runs;
    return j;
}

}  // namespace sympde
