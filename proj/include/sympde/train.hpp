#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "sympde/expr.hpp"
#include "sympde/kernel.hpp"
#include "sympde/msfl.hpp"
#include "sympde/pde.hpp"

namespace sympde {

enum class Engine
{
    Kernel,  // batched OpenMP kernel
    Tape,    // serial tape reference
};

struct TrainConfig
{
    int restarts = 20;
    int iterations = 6000;
    double soft_fraction = 0.25;
    // Explicit soft-phase length; overrides soft_fraction when set.
    std::optional<int> soft_iterations;
    int sample_size = 5000;
    int validation_size = 2000;
    double validation_epsilon = 1e-3;
    double learning_rate = 0.01;
    double final_learning_rate = 0.001;
    int decay_iteration = 2000;
    std::uint64_t seed = 0;
    // Tree depth; falls back to the problem's recommendation, then 3.
    std::optional<int> depth;
    int threads = 0;
    Engine engine = Engine::Kernel;
    int curve_every = 100;

    // Throws ConfigError on out-of-range values.
    void validate() const;
};

// Iteration at which gates switch from softmax to the discrete form. The
// default 6000-iteration budget switches at 1250; other budgets use
// ceil(soft_fraction * iterations).
int gate_flip_iteration(const TrainConfig& config);
int resolved_depth(const TrainConfig& config, const PdeProblem& problem);

// Independent RNG streams derived from one run seed.
enum class SeedLane : std::uint32_t
{
    Init = 1,
    Training = 2,
    Validation = 3,
};
std::uint64_t lane_seed(std::uint64_t seed, SeedLane lane);
// Restart i of a solve uses master + i.
inline std::uint64_t restart_seed(std::uint64_t master, int restart)
{
    return master + static_cast<std::uint64_t>(restart);
}

struct AdamState
{
    std::vector<double> m;
    std::vector<double> v;
    long step = 0;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr);

struct RunRecord
{
    int restart = 0;
    std::uint64_t seed = 0;
    int depth = 0;
    std::vector<double> parameters;
    Expr expression = Expr::constant(0.0);
    // (iteration, training L_total) every curve_every iterations.
    std::vector<std::pair<int, double>> curve;
    double validation_loss = 0.0;
    bool diverged = false;
    int iterations_run = 0;
    int gate_flip = 0;
    // Not serialized: breaks byte-stable reports.
    double wall_seconds = 0.0;
};

struct SolutionReport
{
    ProblemConfig problem;
    TrainConfig config;
    std::vector<RunRecord> runs;
    std::size_t winner = 0;
    Expr raw = Expr::constant(0.0);
    Expr simplified = Expr::constant(0.0);
    double validation_loss = 0.0;
};

// One restart. Throws DimensionMismatch when the model does not fit the problem.
RunRecord train_once(const PdeProblem& problem, MsflModel model, const TrainConfig& config,
                     std::uint64_t seed);

// All restarts (in parallel up to config.threads) and argmin selection on
// validation loss. Throws AllDiverged.
SolutionReport solve(const PdeProblem& problem, const TrainConfig& config);

}  // namespace sympde
