#include "sympde/pde.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sympde/error.hpp"

namespace sympde {
namespace {

std::vector<std::string> slot_names(const std::vector<DerivativeSlot>& slots)
{
    std::vector<std::string> out;
    out.reserve(slots.size());
    for (const auto& s : slots)
        out.push_back(s.name);
    return out;
}

void collect_slots(const Expr& e, std::vector<std::string>& names)
{
    if (e.kind() == Expr::Kind::Slot)
    {
        if (std::find(names.begin(), names.end(), e.slot_name()) == names.end())
            names.push_back(e.slot_name());
        return;
    }
    for (std::size_t i = 0; i < e.arity(); ++i)
        collect_slots(e.child(i), names);
}

std::size_t var_index(const std::vector<std::string>& vars, const std::string& name)
{
    auto it = std::find(vars.begin(), vars.end(), name);
    if (it == vars.end())
        throw ConfigError("unknown variable '" + name + "'");
    return static_cast<std::size_t>(it - vars.begin());
}

std::vector<double> linspace(double lo, double hi, std::size_t n, bool open_lower)
{
    if (open_lower)
        lo = lo + (hi - lo) / static_cast<double>(n);
    std::vector<double> out(n);
    if (n == 1)
    {
        out[0] = lo;
        return out;
    }
    for (std::size_t j = 0; j < n; ++j)
        out[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(n - 1);
    return out;
}

Constraint resolve(const ConstraintConfig& cc, const ProblemConfig& pc,
                   const std::vector<DerivativeSlot>& all_slots)
{
    const auto& vars = pc.variables;
    const std::size_t d = vars.size();
    Constraint c;
    if (cc.kind == "value")
    {
        c.kind = Constraint::Kind::Value;
    }
    else if (cc.kind.rfind("slot:", 0) == 0)
    {
        c.kind = Constraint::Kind::Derivative;
        c.slot = find_slot(all_slots, cc.kind.substr(5));
        if (!c.slot)
            throw ConfigError("unknown constraint slot '" + cc.kind.substr(5) + "'");
    }
    else
    {
        throw ConfigError("constraint kind must be 'value' or 'slot:<name>', got '"
                          + cc.kind + "'");
    }

    std::vector<std::optional<double>> fixed(d);
    for (const auto& [name, v] : cc.fix)
    {
        if (!std::isfinite(v))
            throw ConfigError("constraint pins '" + name + "' to a non-finite value");
        fixed[var_index(vars, name)] = v;
    }
    for (const auto& [name, r] : cc.range)
    {
        if (fixed[var_index(vars, name)])
            throw ConfigError("range given for fixed variable '" + name + "'");
        if (!(r.first < r.second))
            throw ConfigError("empty range for '" + name + "'");
    }
    for (const auto& name : cc.open_lower)
    {
        if (fixed[var_index(vars, name)])
            throw ConfigError("open_lower given for fixed variable '" + name + "'");
    }

    std::vector<std::size_t> free_axes;
    for (std::size_t i = 0; i < d; ++i)
    {
        if (!fixed[i])
            free_axes.push_back(i);
    }
    if (!free_axes.empty() && cc.n < 2)
        throw ConfigError("constraints need n >= 2 points");
    if (!free_axes.empty())
        c.free_axis = free_axes.front();

    std::vector<std::vector<double>> axis_values(d);
    for (std::size_t i = 0; i < d; ++i)
    {
        if (fixed[i])
        {
            axis_values[i] = {*fixed[i]};
            continue;
        }
        auto r = pc.domain[i];
        if (auto it = cc.range.find(vars[i]); it != cc.range.end())
            r = it->second;
        bool open = std::find(cc.open_lower.begin(), cc.open_lower.end(), vars[i])
                    != cc.open_lower.end();
        axis_values[i] = linspace(r.first, r.second, cc.n, open);
    }

    c.target = parse(cc.target, vars);
    c.points = Points(d);
    // Tensor grid over the free axes, first axis slowest.
    std::vector<std::size_t> counter(d, 0);
    std::vector<double> pt(d);
    for (;;)
    {
        for (std::size_t i = 0; i < d; ++i)
            pt[i] = axis_values[i][counter[i]];
        c.points.push_back(pt);
        c.targets.push_back(eval(c.target, pt));
        std::size_t i = d;
        while (i-- > 0)
        {
            if (++counter[i] < axis_values[i].size())
                break;
            counter[i] = 0;
        }
        if (i == static_cast<std::size_t>(-1))
            break;
    }
    return c;
}

}  // namespace

PdeProblem::PdeProblem(ProblemConfig config) : config_(std::move(config))
{
    const auto& vars = config_.variables;
    if (vars.empty())
        throw ConfigError("problem needs at least one variable");
    for (std::size_t i = 0; i < vars.size(); ++i)
    {
        if (std::count(vars.begin(), vars.end(), vars[i]) != 1)
            throw ConfigError("duplicate variable '" + vars[i] + "'");
    }
    if (config_.domain.size() != vars.size())
        throw ConfigError("domain must give one interval per variable");
    for (const auto& [lo, hi] : config_.domain)
    {
        if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
            throw ConfigError("domain intervals must be finite and nonempty");
    }
    if (!std::isfinite(config_.lambda) || config_.lambda < 0.0)
        throw ConfigError("lambda must be finite and >= 0");
    if (!std::isfinite(config_.epsilon) || !(config_.epsilon > 0.0))
        throw ConfigError("epsilon must be > 0");

    std::vector<DerivativeSlot> all = derivative_slots(vars);
    residual_ = parse(config_.residual, vars, slot_names(all));

    std::vector<std::string> used;
    collect_slots(residual_, used);
    for (const auto& name : used)
        residual_slots_.push_back(*find_slot(all, name));
    compiled_ = CompiledExpr(residual_, used);

    for (const auto& cc : config_.constraints)
        constraints_.push_back(resolve(cc, config_, all));
}

PdeProblem PdeProblem::with(std::optional<double> lambda, std::optional<double> epsilon) const
{
    ProblemConfig c = config_;
    if (lambda)
        c.lambda = *lambda;
    if (epsilon)
        c.epsilon = *epsilon;
    return PdeProblem(std::move(c));
}

Points sample_domain(const PdeProblem& problem, std::size_t count, std::uint64_t seed)
{
    if (count == 0)
        throw std::invalid_argument("sample count must be >= 1");
    std::mt19937_64 rng(seed);
    const std::size_t d = problem.dims();
    std::vector<std::uniform_real_distribution<double>> axes;
    for (std::size_t i = 0; i < d; ++i)
        axes.emplace_back(problem.lower(i), problem.upper(i));
    Points out(d);
    std::vector<double> pt(d);
    for (std::size_t n = 0; n < count; ++n)
    {
        for (std::size_t i = 0; i < d; ++i)
            pt[i] = axes[i](rng);
        out.push_back(pt);
    }
    return out;
}

LossBreakdown evaluate_losses(const PlainFunction& f, const PdeProblem& problem,
                              const Points& batch, double epsilon)
{
    LossBreakdown out;
    out.l1 = l1_loss<double>(f, problem, batch, epsilon);
    out.l2 = l2_loss<double>(f, problem, epsilon);
    out.total = out.l1 + problem.lambda() * out.l2;
    return out;
}

LossBreakdown evaluate_losses(const Expr& candidate, const PdeProblem& problem,
                              const Points& batch, double epsilon)
{
    if (candidate.has_slots())
        throw ConfigError("candidate solution may not reference derivative slots");
    if (candidate.var_extent() > problem.dims())
        throw VarIndexOutOfRange(candidate.var_extent() - 1, problem.dims());
    CompiledExpr program(candidate, {});
    std::vector<double> scratch;
    PlainFunction f = [&](std::span<const double> x) {
        return program.evaluate<double>(x, {}, scratch);
    };
    return evaluate_losses(f, problem, batch, epsilon);
}

}  // namespace sympde
