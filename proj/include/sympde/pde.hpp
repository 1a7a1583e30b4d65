#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sympde/compiled_expr.hpp"
#include "sympde/expr.hpp"
#include "sympde/stencil.hpp"
#include "sympde/tape.hpp"

namespace sympde {

// Row-major set of points in R^dims.
class Points
{
  public:
    Points() = default;
    explicit Points(std::size_t dims) : dims_(dims) {}

    std::size_t dims() const { return dims_; }
    std::size_t size() const { return dims_ == 0 ? 0 : data_.size() / dims_; }
    std::span<const double> operator[](std::size_t i) const
    {
        return std::span<const double>(data_).subspan(i * dims_, dims_);
    }
    void push_back(std::span<const double> p) { data_.insert(data_.end(), p.begin(), p.end()); }
    std::span<const double> data() const { return data_; }

  private:
    std::size_t dims_ = 0;
    std::vector<double> data_;
};

// Textual description of a constraint, as stored in problem configs.
struct ConstraintConfig
{
    std::map<std::string, double> fix;
    std::string kind = "value";  // "value" or "slot:<name>"
    std::string target;
    std::size_t n = 100;
    // Optional per-variable ranges for free variables; default is the domain.
    std::map<std::string, std::pair<double, double>> range;
    // Free variables whose lower endpoint is excluded (t > 0).
    std::vector<std::string> open_lower;
};

struct ProblemConfig
{
    std::string name;
    std::vector<std::string> variables;
    std::string residual;
    std::vector<std::pair<double, double>> domain;  // one interval per variable
    std::vector<ConstraintConfig> constraints;
    double lambda = 1.0;
    double epsilon = 1e-2;
    std::optional<int> depth;
};

// A constraint resolved into sample points and target values.
struct Constraint
{
    enum class Kind
    {
        Value,
        Derivative,
    };
    Kind kind = Kind::Value;
    std::optional<DerivativeSlot> slot;
    Expr target = Expr::constant(0.0);
    Points points;
    std::vector<double> targets;
    // First free variable, used as the coordinate in boundary-fit exports.
    std::optional<std::size_t> free_axis;
};

// Residual g over Vars and slots, a box domain and constraint set.
class PdeProblem
{
  public:
    // Parses and validates; throws ConfigError, SyntaxError or UnknownIdentifier.
    explicit PdeProblem(ProblemConfig config);

    const ProblemConfig& config() const { return config_; }
    const std::string& name() const { return config_.name; }
    const std::vector<std::string>& variables() const { return config_.variables; }
    std::size_t dims() const { return config_.variables.size(); }
    double lambda() const { return config_.lambda; }
    double epsilon() const { return config_.epsilon; }
    double lower(std::size_t axis) const { return config_.domain[axis].first; }
    double upper(std::size_t axis) const { return config_.domain[axis].second; }

    const Expr& residual() const { return residual_; }
    // Slots the residual references, in the order the compiled residual expects.
    const std::vector<DerivativeSlot>& residual_slots() const { return residual_slots_; }
    const CompiledExpr& compiled_residual() const { return compiled_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }

    // Same problem with lambda / epsilon replaced.
    PdeProblem with(std::optional<double> lambda, std::optional<double> epsilon) const;

  private:
    ProblemConfig config_;
    Expr residual_ = Expr::constant(0.0);
    std::vector<DerivativeSlot> residual_slots_;
    CompiledExpr compiled_;
    std::vector<Constraint> constraints_;
};

// i.i.d. uniform points in the domain box.
Points sample_domain(const PdeProblem& problem, std::size_t count, std::uint64_t seed);

// Mean of g^2 over the batch. F maps a point to T.
template <class T, class F>
T l1_loss(F&& f, const PdeProblem& problem, const Points& batch, double epsilon)
{
    StencilPlan plan(problem.residual_slots(), problem.dims(), epsilon);
    std::vector<T> fv(plan.offset_count());
    std::vector<T> slots(plan.slot_count());
    std::vector<T> scratch;
    std::vector<double> pt(problem.dims());
    T acc = T(0.0);
    for (std::size_t n = 0; n < batch.size(); ++n)
    {
        auto x = batch[n];
        for (std::size_t i = 0; i < plan.offset_count(); ++i)
        {
            plan.shifted(x, i, pt);
            fv[i] = f(std::span<const double>(pt));
        }
        plan.combine<T>(fv, slots);
        T g = problem.compiled_residual().evaluate<T>(x, slots, scratch);
        acc = n == 0 ? op_square(g) : acc + op_square(g);
    }
    return acc / T(static_cast<double>(batch.size()));
}

// Sum over constraints of squared deviations at their uniform points.
template <class T, class F>
T l2_loss(F&& f, const PdeProblem& problem, double epsilon)
{
    T acc = T(0.0);
    std::vector<double> pt(problem.dims());
    for (const Constraint& c : problem.constraints())
    {
        std::optional<StencilPlan> plan;
        if (c.kind == Constraint::Kind::Derivative)
            plan.emplace(std::vector<DerivativeSlot>{*c.slot}, problem.dims(), epsilon);
        std::vector<T> fv(plan ? plan->offset_count() : 0);
        std::vector<T> sv(1);
        for (std::size_t n = 0; n < c.points.size(); ++n)
        {
            auto x = c.points[n];
            T value;
            if (plan)
            {
                for (std::size_t i = 0; i < plan->offset_count(); ++i)
                {
                    plan->shifted(x, i, pt);
                    fv[i] = f(std::span<const double>(pt));
                }
                plan->combine<T>(fv, sv);
                value = sv[0];
            }
            else
            {
                value = f(x);
            }
            acc = acc + op_square(value - T(c.targets[n]));
        }
    }
    return acc;
}

template <class T, class F>
T total_loss(F&& f, const PdeProblem& problem, const Points& batch, double epsilon)
{
    T l1 = l1_loss<T>(f, problem, batch, epsilon);
    T l2 = l2_loss<T>(f, problem, epsilon);
    return l1 + T(problem.lambda()) * l2;
}

struct LossBreakdown
{
    double l1 = 0.0;
    double l2 = 0.0;
    double total = 0.0;
};

using PlainFunction = std::function<double(std::span<const double>)>;

LossBreakdown evaluate_losses(const PlainFunction& f, const PdeProblem& problem,
                              const Points& batch, double epsilon);
// Loss of a closed-form candidate (Slot-free Expr over the problem variables).
LossBreakdown evaluate_losses(const Expr& candidate, const PdeProblem& problem,
                              const Points& batch, double epsilon);

}  // namespace sympde
