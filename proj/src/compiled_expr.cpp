#include "sympde/compiled_expr.hpp"

#include <algorithm>
#include <cmath>

namespace sympde {

double op_derivative(OpId op, double v)
{
    switch (op)
    {
        case OpId::Sin: return std::cos(v);
        case OpId::Exp:
            return (v >= -kExpClamp && v <= kExpClamp) ? std::exp(v) : 0.0;
        case OpId::Sqrt: {
            double a = std::fabs(v);
            double sign = v < 0.0 ? -1.0 : 1.0;
            return sign * 0.5 / std::sqrt(std::max(a, 1e-300));
        }
        case OpId::Abs: return v < 0.0 ? -1.0 : 1.0;
        default: return 1.0;
    }
}

CompiledExpr::CompiledExpr(const Expr& e, const std::vector<std::string>& slot_names)
{
    code_.reserve(e.node_count());
    emit(e, slot_names);
    var_extent_ = e.var_extent();
}

std::uint32_t CompiledExpr::emit(const Expr& e, const std::vector<std::string>& slot_names)
{
    Instr in{e.kind(), OpId::Id, 0.0, 0.0, 0, 0, 0};
    switch (e.kind())
    {
        case Expr::Kind::Const: in.a = e.value(); break;
        case Expr::Kind::Var: in.index = static_cast<std::uint32_t>(e.var_index()); break;
        case Expr::Kind::Slot: {
            auto it = std::find(slot_names.begin(), slot_names.end(), e.slot_name());
            if (it == slot_names.end())
                throw MissingSlot(e.slot_name());
            in.index = static_cast<std::uint32_t>(it - slot_names.begin());
            slot_extent_ = std::max<std::size_t>(slot_extent_, in.index + 1);
            break;
        }
        case Expr::Kind::Unary:
            in.op = e.op();
            in.lhs = emit(e.child(0), slot_names);
            break;
        case Expr::Kind::Binary:
            in.op = e.op();
            in.lhs = emit(e.child(0), slot_names);
            in.rhs = emit(e.child(1), slot_names);
            break;
        case Expr::Kind::Affine:
            in.a = e.weight();
            in.b = e.bias();
            in.lhs = emit(e.child(0), slot_names);
            break;
    }
    code_.push_back(in);
    return static_cast<std::uint32_t>(code_.size() - 1);
}

double CompiledExpr::evaluate_adjoint(std::span<const double> x,
                                      std::span<const double> slots, double seed,
                                      std::span<double> d_slots,
                                      std::vector<double>& values,
                                      std::vector<double>& adjoints) const
{
    double result = evaluate<double>(x, slots, values);
    adjoints.assign(code_.size(), 0.0);
    adjoints.back() = seed;
    for (std::size_t i = code_.size(); i-- > 0;)
    {
        double a = adjoints[i];
        if (a == 0.0)
            continue;
        const Instr& in = code_[i];
        switch (in.kind)
        {
            case Expr::Kind::Slot: d_slots[in.index] += a; break;
            case Expr::Kind::Unary:
                adjoints[in.lhs] += a * op_derivative(in.op, values[in.lhs]);
                break;
            case Expr::Kind::Binary: {
                double l = values[in.lhs];
                double r = values[in.rhs];
                switch (in.op)
                {
                    case OpId::Mul:
                        adjoints[in.lhs] += a * r;
                        adjoints[in.rhs] += a * l;
                        break;
                    case OpId::Div:
                        adjoints[in.lhs] += a / r;
                        adjoints[in.rhs] -= a * l / (r * r);
                        break;
                    default:
                        adjoints[in.lhs] += a;
                        adjoints[in.rhs] += a;
                        break;
                }
                break;
            }
            case Expr::Kind::Affine: adjoints[in.lhs] += a * in.a; break;
            default: break;
        }
    }
    return result;
}

}  // namespace sympde
