#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sympde/expr.hpp"
#include "sympde/pde.hpp"

namespace sympde {

// d e / d x_var by the usual rules. Handles constants, variables, affine
// maps, +, *, /, sin, exp and id; throws UnsupportedDerivative otherwise.
// The result is simplified.
Expr differentiate(const Expr& e, std::size_t var);

// Drift A(x, t), diffusion B(x, t) and initial condition f(x) of a linear
// Fokker-Planck problem, with x = Var(0) and t = Var(1).
struct FpCoefficients
{
    enum class Direction
    {
        Forward,
        Backward,
    };
    Expr drift;
    Expr diffusion;
    Expr initial;
    Direction direction = Direction::Forward;
};

// Residual over the slots u, u_x, u_xx, u_t:
//   forward:  u_t - ((B_xx - A_x) u + (2 B_x - A) u_x + B u_xx)
//   backward: u_t - (-A u_x + B u_xx)
Expr fp_expand(const FpCoefficients& coeffs);

struct Benchmark
{
    std::string name;
    std::string description;
    PdeProblem problem;
    std::string exact_source;
    Expr exact;
    // Learned solution reported for the original experiments.
    std::string reported_source;
    Expr reported;
    int depth;
    // (reported, exact) coefficient pairs of the shared solution template.
    std::vector<std::pair<double, double>> coefficient_pairs;
};

std::vector<std::string> benchmark_names();
// Throws UnknownBenchmark. The registry is built once; every exact solution
// is checked to score total_loss < 1e-6 at epsilon = 1e-3 on load.
const Benchmark& get_benchmark(const std::string& name);
// Largest |reported - exact| over the benchmark's coefficient pairs.
double reported_accuracy(const std::string& name);

// Pi as written into benchmark configs (15 significant digits).
inline constexpr double kConfigPi = 3.14159265358979;

}  // namespace sympde
