#pragma once

#include "sympde/expr.hpp"
#include "sympde/tape.hpp"

namespace sympde {

// Operator application for any scalar type with the op_* primitives
// (double or Value). Matches apply_unary/apply_binary on doubles bit for bit.
template <class T>
T apply_op(OpId op, const T& v)
{
    switch (op)
    {
        case OpId::Sin: return op_sin(v);
        case OpId::Exp: return op_exp(op_clamp(v, -kExpClamp, kExpClamp));
        case OpId::Sqrt: return op_sqrt(op_abs_guard(v));
        case OpId::Abs: return op_abs_guard(v);
        default: return v;
    }
}

template <class T>
T apply_op(OpId op, const T& l, const T& r)
{
    switch (op)
    {
        case OpId::Mul: return l * r;
        case OpId::Div: return l / r;
        default: return l + r;
    }
}

// d apply_op(op, v) / dv for plain reals. Clamped-out exp and |v| at 0
// follow the tape's conventions (0 and +1).
double op_derivative(OpId op, double v);

}  // namespace sympde
