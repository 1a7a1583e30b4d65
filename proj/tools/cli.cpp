#include "cli.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>

#include <CLI11.hpp>

#include "sympde/bench.hpp"
#include "sympde/check.hpp"
#include "sympde/error.hpp"
#include "sympde/grid.hpp"
#include "sympde/io.hpp"
#include "sympde/train.hpp"

namespace sympde::cli {
namespace {

namespace fs = std::filesystem;

constexpr double kReportEpsilon = 1e-3;

struct ProblemOptions
{
    std::string bench;
    std::string config;
    std::optional<double> lambda;
    std::optional<double> epsilon;
};

void add_problem_options(CLI::App* cmd, ProblemOptions& o)
{
    auto* b = cmd->add_option("--bench", o.bench, "Built-in benchmark name");
    auto* c = cmd->add_option("--config", o.config, "Problem config JSON path");
    b->excludes(c);
}

PdeProblem load(const ProblemOptions& o)
{
    if (o.bench.empty() == o.config.empty())
        throw ConfigError("exactly one of --bench or --config is required");
    PdeProblem p = o.bench.empty() ? PdeProblem(load_problem(o.config))
                                   : get_benchmark(o.bench).problem;
    if (o.lambda && !(*o.lambda >= 0.0))
        throw ConfigError("--lambda must be >= 0");
    if (o.epsilon && !(*o.epsilon > 0.0))
        throw ConfigError("--epsilon must be > 0");
    return p.with(o.lambda, o.epsilon);
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag)
{
    if (flag)
        return *flag;
    const char* env = std::getenv("SYMPDE_SEED");
    if (!env || !*env)
        return 0;
    std::uint64_t v = 0;
    const char* end = env + std::char_traits<char>::length(env);
    auto [ptr, ec] = std::from_chars(env, end, v);
    if (ec != std::errc() || ptr != end)
        throw ConfigError(std::string("SYMPDE_SEED is not an unsigned integer: ") + env);
    return v;
}

std::ofstream open_out(const fs::path& path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw ConfigError("cannot write '" + path.string() + "'");
    return f;
}

PlainFunction as_function(const Expr& e, const std::vector<std::string>& vars)
{
    if (e.has_slots())
        throw ConfigError("expression may not reference derivative slots");
    if (e.var_extent() > vars.size())
        throw VarIndexOutOfRange(e.var_extent() - 1, vars.size());
    auto program = std::make_shared<CompiledExpr>(e, std::vector<std::string>{});
    return [program](std::span<const double> x) {
        thread_local std::vector<double> scratch;
        return program->evaluate<double>(x, {}, scratch);
    };
}

void write_grids(const fs::path& dir, const PlainFunction& f, const PdeProblem& p,
                 Resolution res, bool all)
{
    fs::create_directories(dir);
    if (all)
    {
        auto s = open_out(dir / "solution_grid.csv");
        write_solution_grid(s, f, p, res);
    }
    auto r = open_out(dir / "residual_grid.csv");
    write_residual_grid(r, f, p, res, kReportEpsilon);
    if (all)
    {
        auto b = open_out(dir / "boundary_fit.csv");
        write_boundary_fit(b, f, p, kReportEpsilon);
    }
}

std::string sci(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
}

struct SolveOptions
{
    ProblemOptions problem;
    std::optional<std::uint64_t> seed;
    std::optional<int> restarts;
    std::optional<int> iterations;
    std::optional<int> depth;
    std::optional<int> threads;
    std::optional<int> points;
    std::string engine = "kernel";
    std::string out = "sympde_out";
    std::string resolution = "101x101";
};

int cmd_solve(const SolveOptions& o, std::ostream& out)
{
    PdeProblem problem = load(o.problem);
    Resolution res = parse_resolution(o.resolution);
    TrainConfig cfg;
    cfg.seed = resolve_seed(o.seed);
    if (o.restarts)
        cfg.restarts = *o.restarts;
    if (o.iterations)
        cfg.iterations = *o.iterations;
    if (o.threads)
        cfg.threads = *o.threads;
    if (o.points)
        cfg.sample_size = *o.points;
    cfg.depth = o.depth;
    if (o.engine != "kernel" && o.engine != "tape")
        throw ConfigError("--engine must be 'kernel' or 'tape'");
    cfg.engine = o.engine == "kernel" ? Engine::Kernel : Engine::Tape;
    cfg.validate();

    SolutionReport report = solve(problem, cfg);
    const auto& vars = problem.variables();
    const RunRecord& best = report.runs[report.winner];

    // Score the stored expression and its rounded display form on the same
    // fresh sample.
    const std::string display = to_string(report.simplified, vars, 4);
    Points val = sample_domain(problem, static_cast<std::size_t>(cfg.validation_size),
                               lane_seed(best.seed, SeedLane::Validation));
    const double json_loss =
        evaluate_losses(report.simplified, problem, val, kReportEpsilon).total;
    const double txt_loss =
        evaluate_losses(parse(display, vars, {}), problem, val, kReportEpsilon).total;

    Json j = report_to_json(report);
    j["winner"]["expression_loss"] = std::isfinite(json_loss) ? Json(json_loss) : Json();
    j["winner"]["display_loss"] = std::isfinite(txt_loss) ? Json(txt_loss) : Json();

    const fs::path dir(o.out);
    fs::create_directories(dir);
    open_out(dir / "solution.json") << dump(j);
    open_out(dir / "expression.txt") << display << '\n';
    if (problem.dims() == 2)
        write_grids(dir, as_function(report.simplified, vars), problem, res, true);

    out << "expression: " << display << '\n';
    out << "validation_loss: " << sci(report.validation_loss) << '\n';
    out << "expression_loss: " << sci(json_loss) << '\n';
    out << "display_loss: " << sci(txt_loss) << '\n';
    return kOk;
}

struct EvalOptions
{
    ProblemOptions problem;
    std::string expression;
    double epsilon = kReportEpsilon;
    int points = 2000;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string resolution = "101x101";
};

int cmd_eval(const EvalOptions& o, std::ostream& out)
{
    PdeProblem problem = load(o.problem);
    Resolution res = parse_resolution(o.resolution);
    if (!(o.epsilon > 0.0))
        throw ConfigError("--epsilon must be > 0");
    if (o.points < 1)
        throw ConfigError("--points must be >= 1");
    Expr e = parse(o.expression, problem.variables(), {});
    PlainFunction f = as_function(e, problem.variables());
    Points batch = sample_domain(problem, static_cast<std::size_t>(o.points),
                                 lane_seed(resolve_seed(o.seed), SeedLane::Validation));
    LossBreakdown l = evaluate_losses(f, problem, batch, o.epsilon);
    out << "L1: " << sci(l.l1) << '\n';
    out << "L2: " << sci(l.l2) << '\n';
    out << "L_total: " << sci(l.total) << '\n';
    if (!o.out.empty() && problem.dims() == 2)
        write_grids(o.out, f, problem, res, false);
    return kOk;
}

struct GridOptions
{
    ProblemOptions problem;
    std::string expression;
    std::string out = "sympde_out";
    std::string resolution = "101x101";
};

int cmd_grid(const GridOptions& o, std::ostream& out)
{
    PdeProblem problem = load(o.problem);
    Resolution res = parse_resolution(o.resolution);
    Expr e = parse(o.expression, problem.variables(), {});
    write_grids(o.out, as_function(e, problem.variables()), problem, res, true);
    out << "wrote grids to " << o.out << '\n';
    return kOk;
}

int cmd_check(const std::vector<std::string>& only, double min_eps, std::ostream& out)
{
    if (!(min_eps > 0.0))
        throw ConfigError("--epsilon must be > 0");
    std::vector<std::string> names = only.empty() ? suite_names() : only;
    for (const auto& n : names)
    {
        const auto all = suite_names();
        if (std::find(all.begin(), all.end(), n) == all.end())
            throw ConfigError("unknown check suite '" + n + "'");
    }
    bool ok = true;
    Json failed = Json::array();
    for (const auto& n : names)
    {
        SuiteResult r = run_suite(n, CheckOptions{min_eps});
        Json line;
        line["suite"] = r.name;
        line["passed"] = r.passed;
        line["detail"] = r.detail;
        out << line.dump() << '\n';
        if (!r.passed)
        {
            ok = false;
            failed.push_back(r.name);
        }
    }
    Json summary;
    summary["passed"] = ok;
    summary["failed"] = failed;
    out << summary.dump() << '\n';
    return ok ? kOk : kCheckFailed;
}

int cmd_bench_export(const std::string& name, const std::string& path, std::ostream& out)
{
    const std::string text = dump(problem_to_json(get_benchmark(name).problem.config()));
    if (path.empty())
        out << text;
    else
        open_out(path) << text;
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Symbolic PDE solutions from a differentiable parse tree", "sympde"};
    app.require_subcommand(1);

    SolveOptions so;
    auto* solve_cmd = app.add_subcommand("solve", "Train and extract a symbolic solution");
    add_problem_options(solve_cmd, so.problem);
    solve_cmd->add_option("--seed", so.seed, "Master seed (falls back to SYMPDE_SEED)");
    solve_cmd->add_option("--restarts", so.restarts, "Independent restarts");
    solve_cmd->add_option("--iterations", so.iterations, "Optimizer steps per restart");
    solve_cmd->add_option("--depth", so.depth, "Tree depth");
    solve_cmd->add_option("--lambda", so.problem.lambda, "Constraint weight");
    solve_cmd->add_option("--epsilon", so.problem.epsilon, "Training stencil step");
    solve_cmd->add_option("--threads", so.threads, "Parallel restarts (0 = all cores)");
    solve_cmd->add_option("--points", so.points, "Training sample size");
    solve_cmd->add_option("--engine", so.engine, "kernel or tape");
    solve_cmd->add_option("--out", so.out, "Output directory");
    solve_cmd->add_option("--resolution", so.resolution, "Grid resolution RxC");

    EvalOptions eo;
    auto* eval_cmd = app.add_subcommand("eval", "Score a closed-form candidate");
    add_problem_options(eval_cmd, eo.problem);
    eval_cmd->add_option("expression", eo.expression, "Candidate u(x, t)")->required();
    eval_cmd->add_option("--lambda", eo.problem.lambda, "Constraint weight");
    eval_cmd->add_option("--epsilon", eo.epsilon, "Stencil step");
    eval_cmd->add_option("--points", eo.points, "Interior sample size");
    eval_cmd->add_option("--seed", eo.seed, "Sample seed (falls back to SYMPDE_SEED)");
    eval_cmd->add_option("--out", eo.out, "Directory for residual_grid.csv");
    eval_cmd->add_option("--resolution", eo.resolution, "Grid resolution RxC");

    GridOptions go;
    auto* grid_cmd = app.add_subcommand("grid", "Export plot grids for a candidate");
    add_problem_options(grid_cmd, go.problem);
    grid_cmd->add_option("expression", go.expression, "Candidate u(x, t)")->required();
    grid_cmd->add_option("--out", go.out, "Output directory");
    grid_cmd->add_option("--resolution", go.resolution, "Grid resolution RxC");

    std::vector<std::string> only;
    double check_eps = 1e-3;
    auto* check_cmd = app.add_subcommand("check", "Run the built-in property suites");
    check_cmd->add_option("--only", only, "Suite to run (repeatable)");
    check_cmd->add_option("--epsilon", check_eps, "Smallest step of the stencil sweep");

    auto* list_cmd = app.add_subcommand("bench-list", "List built-in benchmarks");

    std::string export_name;
    std::string export_out;
    auto* export_cmd = app.add_subcommand("bench-export", "Print a benchmark's problem config");
    export_cmd->add_option("name", export_name, "Benchmark name")->required();
    export_cmd->add_option("--out", export_out, "Write to this file instead of stdout");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try
    {
        app.parse(reversed);
    }
    catch (const CLI::CallForHelp&)
    {
        out << app.help();
        return kOk;
    }
    catch (const CLI::CallForAllHelp&)
    {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    }
    catch (const CLI::ParseError& e)
    {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    try
    {
        if (*solve_cmd)
            return cmd_solve(so, out);
        if (*eval_cmd)
            return cmd_eval(eo, out);
        if (*grid_cmd)
            return cmd_grid(go, out);
        if (*check_cmd)
            return cmd_check(only, check_eps, out);
        if (*list_cmd)
        {
            for (const auto& name : benchmark_names())
                out << name << '\t' << get_benchmark(name).description << '\n';
            return kOk;
        }
        if (*export_cmd)
            return cmd_bench_export(export_name, export_out, out);
    }
    catch (const AllDiverged& e)
    {
        err << "error: " << e.what() << '\n';
        return kDiverged;
    }
    catch (const Error& e)
    {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    catch (const fs::filesystem_error& e)
    {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}

}  // namespace sympde::cli
