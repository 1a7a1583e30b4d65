#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace sympde {

class Tape;

// A scalar that is either a constant (no tape) or a node on a Tape.
// Operations on constants are evaluated directly and never recorded.
class Value
{
  public:
    Value() = default;
    Value(double v) : primal_(v) {}  // NOLINT: implicit constant

    double primal() const { return primal_; }
    bool is_constant() const { return tape_ == nullptr; }
    Tape* tape() const { return tape_; }
    std::uint32_t index() const { return index_; }

  private:
    friend class Tape;
    Tape* tape_ = nullptr;
    std::uint32_t index_ = 0;
    double primal_ = 0.0;
};

// Adjoints from one backward sweep, indexed by tape node.
class Gradient
{
  public:
    Gradient() = default;
    explicit Gradient(std::vector<double> adjoint) : adjoint_(std::move(adjoint)) {}

    double operator[](const Value& v) const
    {
        if (v.is_constant() || v.index() >= adjoint_.size())
            return 0.0;
        return adjoint_[v.index()];
    }
    std::span<const double> all() const { return adjoint_; }

  private:
    std::vector<double> adjoint_;
};

inline constexpr double kHumpSharpness = 1000.0;

class Tape
{
  public:
    enum class Op : std::uint8_t
    {
        Leaf,
        Add,
        Mul,
        Sin,
        Exp,
        AbsGuard,
        Clamp,
        Div,
        Square,
        Max,
        Hump,
        Sqrt,
    };

    Value variable(double primal);

    // Computes the primal of `op` and stores its local partials. Clamp
    // reads [lo, hi]; other ops ignore them. Inputs that are constants
    // contribute no edge. Throws TapeMismatch for inputs on another tape.
    Value record(Op op, std::span<const Value> inputs, double lo = 0.0, double hi = 0.0);
    Value record(Op op, std::initializer_list<Value> inputs, double lo = 0.0,
                 double hi = 0.0)
    {
        return record(op, std::span<const Value>(inputs.begin(), inputs.size()), lo, hi);
    }

    // Add node with arbitrary constant partials: sum_i weights[i]*inputs[i] + bias.
    Value linear(std::span<const Value> inputs, std::span<const double> weights,
                 double bias = 0.0);

    Gradient backward(const Value& loss) const;

    std::size_t size() const { return ops_.size(); }
    Op op(std::size_t node) const { return ops_[node]; }
    double primal(std::size_t node) const { return primals_[node]; }
    std::span<const std::uint32_t> parents(std::size_t node) const;
    std::span<const double> partials(std::size_t node) const;
    void clear();

  private:
    Value push(Op op, double primal, std::span<const Value> inputs,
               std::span<const double> partials);

    std::vector<Op> ops_;
    std::vector<double> primals_;
    std::vector<std::uint32_t> begin_;
    std::vector<std::uint32_t> parents_;
    std::vector<double> partials_;
};

// Recording helpers. Each also works for constants.
Value operator+(const Value& a, const Value& b);
Value operator-(const Value& a, const Value& b);
Value operator-(const Value& a);
Value operator*(const Value& a, const Value& b);
Value operator/(const Value& a, const Value& b);
inline Value& operator+=(Value& a, const Value& b) { return a = a + b; }

// Scalar primitives shared by the double and Value code paths. The double
// overloads compute exactly the primal the Value overloads record.
inline double op_sin(double x) { return std::sin(x); }
inline double op_clamp(double x, double lo, double hi) { return x < lo ? lo : (x > hi ? hi : x); }
inline double op_exp(double x) { return std::exp(x); }
inline double op_abs_guard(double x) { return std::fabs(x); }
inline double op_sqrt(double x) { return std::sqrt(x); }
inline double op_square(double x) { return x * x; }
inline double op_hump(double x)
{
    double d = x - 1.0;
    return std::exp(-kHumpSharpness * d * d);
}
inline double op_max(std::span<const double> xs)
{
    double m = xs[0];
    for (double v : xs.subspan(1))
        m = v > m ? v : m;
    return m;
}

Value op_sin(const Value& x);
Value op_clamp(const Value& x, double lo, double hi);
Value op_exp(const Value& x);
Value op_abs_guard(const Value& x);
Value op_sqrt(const Value& x);
Value op_square(const Value& x);
Value op_hump(const Value& x);
Value op_max(std::span<const Value> xs);

inline double primal_of(double x) { return x; }
inline double primal_of(const Value& x) { return x.primal(); }

// Scalar function of a parameter vector. Called with constants it is a plain
// evaluation; called with tape variables it records itself.
using ScalarFunction = std::function<Value(std::span<const Value>)>;

// Max over parameters of |analytic - central| / (|analytic| + |central| + 1e-12).
double grad_check(const ScalarFunction& f, std::span<const double> theta, double h);

}  // namespace sympde
