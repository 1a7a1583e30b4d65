#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sympde/error.hpp"
#include "sympde/expr.hpp"
#include "sympde/scalar_ops.hpp"

namespace sympde {

// An Expr flattened to postfix instructions with slots resolved to indices.
// Used on the hot paths where tree walking and slot-name lookups would
// dominate.
class CompiledExpr
{
  public:
    CompiledExpr() = default;
    // Throws MissingSlot when the expression names a slot not in slot_names.
    CompiledExpr(const Expr& e, const std::vector<std::string>& slot_names);

    template <class T>
    T evaluate(std::span<const double> x, std::span<const T> slots,
               std::vector<T>& scratch) const;

    double evaluate(std::span<const double> x, std::span<const double> slots = {}) const
    {
        std::vector<double> scratch;
        return evaluate<double>(x, slots, scratch);
    }

    // Forward then reverse sweep. Adds seed * d(value)/d(slot_i) into
    // d_slots[i] and returns the value.
    double evaluate_adjoint(std::span<const double> x, std::span<const double> slots,
                            double seed, std::span<double> d_slots,
                            std::vector<double>& values,
                            std::vector<double>& adjoints) const;

    std::size_t size() const { return code_.size(); }
    std::size_t var_extent() const { return var_extent_; }

  private:
    struct Instr
    {
        Expr::Kind kind;
        OpId op;
        double a;
        double b;
        std::uint32_t index;
        std::uint32_t lhs;
        std::uint32_t rhs;
    };

    std::uint32_t emit(const Expr& e, const std::vector<std::string>& slot_names);
    void check_inputs(std::size_t n_vars, std::size_t n_slots) const
    {
        if (n_vars < var_extent_)
            throw VarIndexOutOfRange(var_extent_ - 1, n_vars);
        if (n_slots < slot_extent_)
            throw DimensionMismatch("too few slot values for compiled expression");
    }

    std::vector<Instr> code_;
    std::size_t var_extent_ = 0;
    std::size_t slot_extent_ = 0;
};

template <class T>
T CompiledExpr::evaluate(std::span<const double> x, std::span<const T> slots,
                         std::vector<T>& scratch) const
{
    check_inputs(x.size(), slots.size());
    scratch.resize(code_.size());
    for (std::size_t i = 0; i < code_.size(); ++i)
    {
        const Instr& in = code_[i];
        switch (in.kind)
        {
            case Expr::Kind::Const: scratch[i] = T(in.a); break;
            case Expr::Kind::Var: scratch[i] = T(x[in.index]); break;
            case Expr::Kind::Slot: scratch[i] = slots[in.index]; break;
            case Expr::Kind::Unary: scratch[i] = apply_op(in.op, scratch[in.lhs]); break;
            case Expr::Kind::Binary:
                scratch[i] = apply_op(in.op, scratch[in.lhs], scratch[in.rhs]);
                break;
            case Expr::Kind::Affine:
                scratch[i] = T(in.a) * scratch[in.lhs] + T(in.b);
                break;
        }
    }
    return scratch.back();
}

}  // namespace sympde
