#include "sympde/bench.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "sympde/error.hpp"

namespace sympde {
namespace {

const std::vector<std::string> kXT = {"x", "t"};

ConstraintConfig boundary(const std::string& var, double at, const std::string& kind,
                          const std::string& target, std::vector<std::string> open_lower = {})
{
    ConstraintConfig c;
    c.fix[var] = at;
    c.kind = kind;
    c.target = target;
    c.open_lower = std::move(open_lower);
    return c;
}

Expr parse_xt(const std::string& src) { return parse(src, kXT, {}); }

ProblemConfig fp_config(const std::string& name, const FpCoefficients& coeffs,
                        const std::string& initial, int depth)
{
    ProblemConfig cfg;
    cfg.name = name;
    cfg.variables = kXT;
    cfg.residual = to_string(fp_expand(coeffs), {"x", "t"}, kFullPrecision);
    cfg.domain = {{0.0, 1.0}, {0.0, 1.0}};
    cfg.constraints = {boundary("t", 0.0, "value", initial)};
    cfg.depth = depth;
    return cfg;
}

Benchmark make(const std::string& name, std::string description, ProblemConfig cfg,
               const std::string& exact, const std::string& reported,
               std::vector<std::pair<double, double>> pairs)
{
    const int depth = cfg.depth.value_or(3);
    PdeProblem problem(std::move(cfg));
    return Benchmark{name,          std::move(description), std::move(problem), exact,
                     parse_xt(exact), reported,            parse_xt(reported), depth,
                     std::move(pairs)};
}

std::map<std::string, Benchmark> build()
{
    std::map<std::string, Benchmark> out;

    {
        ProblemConfig cfg;
        cfg.name = "wave";
        cfg.variables = kXT;
        cfg.residual = "u_tt - u_xx";
        cfg.domain = {{0.0, kConfigPi}, {0.0, kConfigPi}};
        cfg.constraints = {boundary("x", 0.0, "value", "0", {"t"}),
                           boundary("x", kConfigPi, "value", "0", {"t"}),
                           boundary("t", 0.0, "value", "0"),
                           boundary("t", 0.0, "slot:u_t", "sin(x)")};
        cfg.depth = 3;
        out.emplace("wave", make("wave", "1-D wave equation u_tt = u_xx on [0, pi]^2",
                                 std::move(cfg), "sin(x)*sin(t)",
                                 "1.0002*sin(1.000*x)*sin(0.9998*t)",
                                 {{1.0002, 1.0}, {1.000, 1.0}, {0.9998, 1.0}}));
    }
    {
        ProblemConfig cfg;
        cfg.name = "heat";
        cfg.variables = kXT;
        cfg.residual = "u_t - u_xx";
        cfg.domain = {{0.0, kConfigPi}, {0.0, kConfigPi}};
        cfg.constraints = {boundary("x", 0.0, "value", "0", {"t"}),
                           boundary("x", kConfigPi, "value", "0", {"t"}),
                           boundary("t", 0.0, "value", "sin(x)")};
        cfg.depth = 3;
        out.emplace("heat",
                    make("heat", "1-D heat equation u_t = u_xx on [0, pi]^2", std::move(cfg),
                         "exp(-t)*sin(x)",
                         "(1.005*exp(-0.994*t) - 0.005)*sin(0.9996*x + 0.001*t)",
                         {{1.005, 1.0}, {-0.994, -1.0}, {-0.005, 0.0}, {0.9996, 1.0},
                          {0.001, 0.0}}));
    }
    {
        FpCoefficients c{parse_xt("-1"), parse_xt("1"), parse_xt("x"),
                         FpCoefficients::Direction::Forward};
        out.emplace("fp1", make("fp1", "Fokker-Planck, constant drift and diffusion",
                                fp_config("fp1", c, "x", 2), "x + t", "1.0001*x + 1.0001*t",
                                {{1.0001, 1.0}, {1.0001, 1.0}}));
    }
    {
        FpCoefficients c{parse_xt("x"), parse_xt("x^2/2"), parse_xt("x"),
                         FpCoefficients::Direction::Forward};
        out.emplace("fp2",
                    make("fp2", "Fokker-Planck, linear drift and quadratic diffusion",
                         fp_config("fp2", c, "x", 3), "x*exp(t)",
                         "(0.972*x - 0.001*t + 0.002)*exp(1.024*t) + 0.029*x - 0.002",
                         {{0.972, 1.0}, {-0.001, 0.0}, {0.002, 0.0}, {1.024, 1.0}}));
    }
    {
        FpCoefficients c{parse_xt("-(x + 1)"), parse_xt("x^2*exp(t)"), parse_xt("x + 1"),
                         FpCoefficients::Direction::Backward};
        out.emplace("fp3",
                    make("fp3", "backward Kolmogorov, time-dependent diffusion",
                         fp_config("fp3", c, "x + 1", 3), "(x + 1)*exp(t)",
                         "(0.923*x - 0.006*t + 0.866)*exp(0.011*x + 1.121*t) + 0.057*x + 0.136",
                         {{0.923, 1.0}, {-0.006, 0.0}, {0.866, 1.0}, {0.011, 0.0},
                          {1.121, 1.0}}));
    }

    for (const auto& [name, b] : out)
    {
        PdeProblem p = b.problem.with(1.0, 1e-3);
        Points batch = sample_domain(p, 1000, 0);
        double loss = evaluate_losses(b.exact, p, batch, 1e-3).total;
        if (!(loss < 1e-6))
            throw ConfigError("benchmark '" + name + "' exact solution scores "
                              + std::to_string(loss));
    }
    return out;
}

const std::map<std::string, Benchmark>& registry()
{
    static const std::map<std::string, Benchmark> reg = build();
    return reg;
}

}  // namespace

std::vector<std::string> benchmark_names() { return {"wave", "heat", "fp1", "fp2", "fp3"}; }

const Benchmark& get_benchmark(const std::string& name)
{
    const auto& reg = registry();
    auto it = reg.find(name);
    if (it == reg.end())
        throw UnknownBenchmark(name);
    return it->second;
}

double reported_accuracy(const std::string& name)
{
    double worst = 0.0;
    for (auto [reported, exact] : get_benchmark(name).coefficient_pairs)
        worst = std::max(worst, std::abs(reported - exact));
    return worst;
}

}  // namespace sympde
