#include "sympde/train.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <random>

#include "sympde/error.hpp"

namespace sympde {

void TrainConfig::validate() const
{
    if (restarts < 1)
        throw ConfigError("restarts must be >= 1");
    if (iterations < 0)
        throw ConfigError("iterations must be >= 0");
    if (!(soft_fraction >= 0.0 && soft_fraction <= 1.0))
        throw ConfigError("soft_fraction must lie in [0, 1]");
    if (soft_iterations && *soft_iterations < 0)
        throw ConfigError("soft_iterations must be >= 0");
    if (sample_size < 1 || validation_size < 1)
        throw ConfigError("sample sizes must be >= 1");
    if (!(validation_epsilon > 0.0))
        throw ConfigError("validation epsilon must be > 0");
    if (!(learning_rate > 0.0) || !(final_learning_rate > 0.0))
        throw ConfigError("learning rates must be > 0");
    if (depth && (*depth < 1 || *depth > 10))
        throw ConfigError("depth must lie in [1, 10]");
    if (threads < 0)
        throw ConfigError("threads must be >= 0");
    if (curve_every < 1)
        throw ConfigError("curve_every must be >= 1");
}

int gate_flip_iteration(const TrainConfig& config)
{
    if (config.soft_iterations)
        return *config.soft_iterations;
    if (config.iterations == 6000 && config.soft_fraction == 0.25)
        return 1250;
    return static_cast<int>(std::ceil(config.soft_fraction * config.iterations));
}

int resolved_depth(const TrainConfig& config, const PdeProblem& problem)
{
    if (config.depth)
        return *config.depth;
    if (problem.config().depth)
        return *problem.config().depth;
    return 3;
}

std::uint64_t lane_seed(std::uint64_t seed, SeedLane lane)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(lane)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr)
{
    if (grads.size() != params.size())
        throw DimensionMismatch("gradient and parameter sizes differ");
    if (state.m.size() != params.size())
    {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
        state.step = 0;
    }
    ++state.step;
    const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i)
    {
        state.m[i] = kAdamBeta1 * state.m[i] + (1.0 - kAdamBeta1) * grads[i];
        state.v[i] = kAdamBeta2 * state.v[i] + (1.0 - kAdamBeta2) * grads[i] * grads[i];
        const double mhat = state.m[i] / c1;
        const double vhat = state.v[i] / c2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + kAdamEps);
    }
}

namespace {

bool all_finite(std::span<const double> v)
{
    for (double x : v)
    {
        if (!std::isfinite(x))
            return false;
    }
    return true;
}

}  // namespace

RunRecord train_once(const PdeProblem& problem, MsflModel model, const TrainConfig& config,
                     std::uint64_t seed)
{
    if (static_cast<std::size_t>(model.dims()) != problem.dims())
        throw DimensionMismatch("model dimension does not match problem");
    const auto start = std::chrono::steady_clock::now();

    RunRecord rec;
    rec.seed = seed;
    rec.depth = model.depth();
    rec.gate_flip = gate_flip_iteration(config);

    Points train = sample_domain(problem, static_cast<std::size_t>(config.sample_size),
                                 lane_seed(seed, SeedLane::Training));
    std::optional<LossKernel> kernel;
    if (config.engine == Engine::Kernel)
        kernel.emplace(problem, train, problem.epsilon(), config.threads);
    auto objective = [&](const MsflModel& m) {
        if (kernel)
            return kernel->evaluate(m, true);
        return reference_loss(problem, m, train, problem.epsilon(), true);
    };

    model.set_gate_mode(GateMode::Soft);
    AdamState adam;
    for (int it = 0; it < config.iterations; ++it)
    {
        if (it == rec.gate_flip)
            model.set_gate_mode(GateMode::Discrete);
        LossEvaluation ev = objective(model);
        if (!std::isfinite(ev.total) || !all_finite(ev.gradient))
        {
            rec.diverged = true;
            break;
        }
        if (it % config.curve_every == 0)
            rec.curve.emplace_back(it, ev.total);
        const double lr = it < config.decay_iteration ? config.learning_rate
                                                      : config.final_learning_rate;
        adam_step(model.parameters(), ev.gradient, adam, lr);
        rec.iterations_run = it + 1;
    }
    model.set_gate_mode(GateMode::Discrete);
    rec.parameters.assign(model.parameters().begin(), model.parameters().end());

    if (!rec.diverged && all_finite(rec.parameters))
    {
        Points val = sample_domain(problem, static_cast<std::size_t>(config.validation_size),
                                   lane_seed(seed, SeedLane::Validation));
        LossKernel validator(problem, std::move(val), config.validation_epsilon, config.threads);
        rec.validation_loss = validator.evaluate(model, false).total;
        rec.diverged = !std::isfinite(rec.validation_loss);
        rec.expression = extract(model);
    }
    else
    {
        rec.diverged = true;
    }
    if (rec.diverged)
        rec.validation_loss = std::numeric_limits<double>::infinity();

    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

SolutionReport solve(const PdeProblem& problem, const TrainConfig& config)
{
    config.validate();
    const int depth = resolved_depth(config, problem);
    const int dims = static_cast<int>(problem.dims());
    const OperatorLibrary lib = OperatorLibrary::standard();

    std::vector<RunRecord> runs(static_cast<std::size_t>(config.restarts));
    std::vector<std::exception_ptr> errors(runs.size());
    const int nt = config.threads > 0 ? std::min(config.threads, config.restarts)
                                      : std::min(config.restarts, omp_get_num_procs());

#pragma omp parallel for schedule(dynamic, 1) num_threads(nt) if (nt > 1)
    for (int i = 0; i < config.restarts; ++i)
    {
        try
        {
            const std::uint64_t seed = restart_seed(config.seed, i);
            MsflModel model = init_model(depth, dims, lib, lane_seed(seed, SeedLane::Init));
            runs[i] = train_once(problem, std::move(model), config, seed);
            runs[i].restart = i;
        }
        catch (...)
        {
            errors[i] = std::current_exception();
        }
    }
    for (auto& e : errors)
    {
        if (e)
            std::rethrow_exception(e);
    }

    SolutionReport report;
    report.problem = problem.config();
    report.config = config;
    bool found = false;
    for (std::size_t i = 0; i < runs.size(); ++i)
    {
        if (runs[i].diverged)
            continue;
        if (!found || runs[i].validation_loss < runs[report.winner].validation_loss)
        {
            report.winner = i;
            found = true;
        }
    }
    if (!found)
        throw AllDiverged();
    report.runs = std::move(runs);
    const RunRecord& best = report.runs[report.winner];
    report.raw = best.expression;
    report.simplified = simplify(best.expression);
    report.validation_loss = best.validation_loss;
    return report;
}

}  // namespace sympde
