#include "sympde/tape.hpp"

#include <algorithm>
#include <array>

#include "sympde/error.hpp"

namespace sympde {
namespace {

Tape* common_tape(std::span<const Value> inputs)
{
    Tape* tape = nullptr;
    for (const Value& v : inputs)
    {
        if (v.is_constant())
            continue;
        if (tape != nullptr && tape != v.tape())
            throw TapeMismatch();
        tape = v.tape();
    }
    return tape;
}

// Smallest magnitude fed to the sqrt derivative, keeps partials finite.
constexpr double kSqrtFloor = 1e-300;

}  // namespace

Value Tape::variable(double primal)
{
    return push(Op::Leaf, primal, {}, {});
}

Value Tape::push(Op op, double primal, std::span<const Value> inputs,
                 std::span<const double> partials)
{
    Value v;
    v.tape_ = this;
    v.index_ = static_cast<std::uint32_t>(ops_.size());
    v.primal_ = primal;
    ops_.push_back(op);
    primals_.push_back(primal);
    begin_.push_back(static_cast<std::uint32_t>(parents_.size()));
    for (std::size_t i = 0; i < inputs.size(); ++i)
    {
        if (inputs[i].is_constant())
            continue;
        parents_.push_back(inputs[i].index());
        partials_.push_back(partials[i]);
    }
    return v;
}

Value Tape::record(Op op, std::span<const Value> inputs, double lo, double hi)
{
    Tape* owner = common_tape(inputs);
    if (owner != nullptr && owner != this)
        throw TapeMismatch();

    double primal = 0.0;
    std::vector<double> local(inputs.size(), 0.0);
    auto x = [&](std::size_t i) { return inputs[i].primal(); };

    switch (op)
    {
        case Op::Leaf:
            return variable(inputs.empty() ? 0.0 : x(0));
        case Op::Add:
            for (std::size_t i = 0; i < inputs.size(); ++i)
            {
                primal = i == 0 ? x(0) : primal + x(i);
                local[i] = 1.0;
            }
            break;
        case Op::Mul:
            primal = x(0) * x(1);
            local = {x(1), x(0)};
            break;
        case Op::Sin:
            primal = op_sin(x(0));
            local[0] = std::cos(x(0));
            break;
        case Op::Exp:
            primal = op_exp(x(0));
            local[0] = primal;
            break;
        case Op::AbsGuard:
            primal = op_abs_guard(x(0));
            local[0] = x(0) < 0.0 ? -1.0 : 1.0;
            break;
        case Op::Clamp:
            primal = op_clamp(x(0), lo, hi);
            local[0] = (x(0) >= lo && x(0) <= hi) ? 1.0 : 0.0;
            break;
        case Op::Div:
            primal = x(0) / x(1);
            local = {1.0 / x(1), -x(0) / (x(1) * x(1))};
            break;
        case Op::Square:
            primal = op_square(x(0));
            local[0] = 2.0 * x(0);
            break;
        case Op::Max: {
            std::size_t best = 0;
            for (std::size_t i = 1; i < inputs.size(); ++i)
            {
                if (x(i) > x(best))
                    best = i;
            }
            primal = x(best);
            local[best] = 1.0;
            break;
        }
        case Op::Hump:
            primal = op_hump(x(0));
            local[0] = -2.0 * kHumpSharpness * (x(0) - 1.0) * primal;
            break;
        case Op::Sqrt:
            primal = op_sqrt(x(0));
            local[0] = 0.5 / std::sqrt(std::max(x(0), kSqrtFloor));
            break;
    }

    if (owner == nullptr)
        return Value(primal);
    return push(op, primal, inputs, local);
}

Value Tape::linear(std::span<const Value> inputs, std::span<const double> weights,
                   double bias)
{
    Tape* owner = common_tape(inputs);
    if (owner != nullptr && owner != this)
        throw TapeMismatch();
    double primal = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i)
    {
        double term = weights[i] * inputs[i].primal();
        primal = i == 0 ? term : primal + term;
    }
    primal = primal + bias;
    if (owner == nullptr)
        return Value(primal);
    return push(Op::Add, primal, inputs, weights);
}

Gradient Tape::backward(const Value& loss) const
{
    std::vector<double> adjoint(ops_.size(), 0.0);
    if (loss.is_constant())
        return Gradient(std::move(adjoint));
    if (loss.tape() != this)
        throw TapeMismatch();
    adjoint[loss.index()] = 1.0;
    for (std::size_t i = loss.index() + 1; i-- > 0;)
    {
        double a = adjoint[i];
        if (a == 0.0)
            continue;
        std::uint32_t end = i + 1 < begin_.size() ? begin_[i + 1]
                                                  : static_cast<std::uint32_t>(parents_.size());
        for (std::uint32_t e = begin_[i]; e < end; ++e)
            adjoint[parents_[e]] += a * partials_[e];
    }
    return Gradient(std::move(adjoint));
}

std::span<const std::uint32_t> Tape::parents(std::size_t node) const
{
    std::size_t end = node + 1 < begin_.size() ? begin_[node + 1] : parents_.size();
    return std::span<const std::uint32_t>(parents_).subspan(begin_[node], end - begin_[node]);
}

std::span<const double> Tape::partials(std::size_t node) const
{
    std::size_t end = node + 1 < begin_.size() ? begin_[node + 1] : partials_.size();
    return std::span<const double>(partials_).subspan(begin_[node], end - begin_[node]);
}

void Tape::clear()
{
    ops_.clear();
    primals_.clear();
    begin_.clear();
    parents_.clear();
    partials_.clear();
}

namespace {

Tape* tape_of(const Value& a, const Value& b)
{
    if (!a.is_constant() && !b.is_constant() && a.tape() != b.tape())
        throw TapeMismatch();
    return a.is_constant() ? b.tape() : a.tape();
}

}  // namespace

Value operator+(const Value& a, const Value& b)
{
    Tape* t = tape_of(a, b);
    if (t == nullptr)
        return Value(a.primal() + b.primal());
    return t->record(Tape::Op::Add, {a, b});
}

Value operator-(const Value& a, const Value& b)
{
    Tape* t = tape_of(a, b);
    if (t == nullptr)
        return Value(a.primal() - b.primal());
    std::array<Value, 2> in{a, b};
    std::array<double, 2> w{1.0, -1.0};
    // a - b: the linear node computes 1*a + (-1)*b, which rounds identically.
    return t->linear(in, w);
}

Value operator-(const Value& a)
{
    if (a.is_constant())
        return Value(-a.primal());
    std::array<Value, 1> in{a};
    std::array<double, 1> w{-1.0};
    return a.tape()->linear(in, w);
}

Value operator*(const Value& a, const Value& b)
{
    Tape* t = tape_of(a, b);
    if (t == nullptr)
        return Value(a.primal() * b.primal());
    return t->record(Tape::Op::Mul, {a, b});
}

Value operator/(const Value& a, const Value& b)
{
    Tape* t = tape_of(a, b);
    if (t == nullptr)
        return Value(a.primal() / b.primal());
    return t->record(Tape::Op::Div, {a, b});
}

namespace {

Value unary(Tape::Op op, const Value& x, double lo = 0.0, double hi = 0.0)
{
    return x.tape()->record(op, {x}, lo, hi);
}

}  // namespace

Value op_sin(const Value& x)
{
    return x.is_constant() ? Value(op_sin(x.primal())) : unary(Tape::Op::Sin, x);
}

Value op_clamp(const Value& x, double lo, double hi)
{
    return x.is_constant() ? Value(op_clamp(x.primal(), lo, hi))
                           : unary(Tape::Op::Clamp, x, lo, hi);
}

Value op_exp(const Value& x)
{
    return x.is_constant() ? Value(op_exp(x.primal())) : unary(Tape::Op::Exp, x);
}

Value op_abs_guard(const Value& x)
{
    return x.is_constant() ? Value(op_abs_guard(x.primal())) : unary(Tape::Op::AbsGuard, x);
}

Value op_sqrt(const Value& x)
{
    return x.is_constant() ? Value(op_sqrt(x.primal())) : unary(Tape::Op::Sqrt, x);
}

Value op_square(const Value& x)
{
    return x.is_constant() ? Value(op_square(x.primal())) : unary(Tape::Op::Square, x);
}

Value op_hump(const Value& x)
{
    return x.is_constant() ? Value(op_hump(x.primal())) : unary(Tape::Op::Hump, x);
}

Value op_max(std::span<const Value> xs)
{
    Tape* t = common_tape(xs);
    if (t == nullptr)
    {
        double m = xs[0].primal();
        for (const Value& v : xs.subspan(1))
            m = v.primal() > m ? v.primal() : m;
        return Value(m);
    }
    return t->record(Tape::Op::Max, xs);
}

double grad_check(const ScalarFunction& f, std::span<const double> theta, double h)
{
    Tape tape;
    std::vector<Value> params;
    params.reserve(theta.size());
    for (double t : theta)
        params.push_back(tape.variable(t));
    Value loss = f(params);
    Gradient grad = tape.backward(loss);

    std::vector<Value> probe(theta.begin(), theta.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i)
    {
        probe[i] = Value(theta[i] + h);
        double up = f(probe).primal();
        probe[i] = Value(theta[i] - h);
        double down = f(probe).primal();
        probe[i] = Value(theta[i]);
        double central = (up - down) / (2.0 * h);
        double analytic = grad[params[i]];
        double err = std::fabs(analytic - central)
                     / (std::fabs(analytic) + std::fabs(central) + 1e-12);
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace sympde
