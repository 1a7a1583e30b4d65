#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sympde/expr.hpp"

namespace sympde {

// A named derivative of the unknown: order 0 is u itself, order 1 is
// du/dx_first, order 2 is d2u/dx_first dx_second (pure when equal).
struct DerivativeSlot
{
    std::string name;
    int order = 0;
    std::size_t first = 0;
    std::size_t second = 0;

    bool mixed() const { return order == 2 && first != second; }
};

// Every slot of order <= 2 over the variables, named u, u_x, u_xx, u_xt ...
// Mixed slots appear under both variable orders.
std::vector<DerivativeSlot> derivative_slots(const std::vector<std::string>& vars);
std::optional<DerivativeSlot> find_slot(const std::vector<DerivativeSlot>& slots,
                                        const std::string& name);

// Central difference stencils for a set of slots. Evaluation points are
// deduplicated so u and u_xx share f(x).
//   first:  [f(x + e h/2) - f(x - e h/2)] / h
//   pure:   [f(x + e h) - 2 f(x) + f(x - e h)] / h^2
//   mixed:  [f(x + ei h/2 + ej h/2) - f(x + ei h/2 - ej h/2)
//            - f(x - ei h/2 + ej h/2) + f(x - ei h/2 - ej h/2)] / h^2
class StencilPlan
{
  public:
    StencilPlan(std::vector<DerivativeSlot> slots, std::size_t dims, double epsilon);

    std::size_t dims() const { return dims_; }
    double epsilon() const { return eps_; }
    std::size_t slot_count() const { return formulas_.size(); }
    std::size_t offset_count() const { return offsets_.size(); }
    std::span<const double> offset(std::size_t i) const
    {
        return std::span<const double>(offsets_[i]);
    }
    const std::vector<DerivativeSlot>& slots() const { return slots_; }

    // Writes x + offset(i) into out.
    void shifted(std::span<const double> x, std::size_t i, std::span<double> out) const
    {
        for (std::size_t j = 0; j < dims_; ++j)
            out[j] = x[j] + offsets_[i][j];
    }

    // Slot values from f evaluated at every offset.
    template <class T>
    void combine(std::span<const T> f, std::span<T> out) const;

    // Accumulates d(slots)/d(f) transposed: d_f[i] += sum_s d_slots[s] * c[s][i].
    void combine_adjoint(std::span<const double> d_slots, std::span<double> d_f) const;

  private:
    struct Formula
    {
        int order;
        bool mixed;
        std::array<std::uint32_t, 4> idx;
    };
    std::uint32_t offset_index(std::vector<double> off);

    std::vector<DerivativeSlot> slots_;
    std::size_t dims_;
    double eps_;
    std::vector<std::vector<double>> offsets_;
    std::vector<Formula> formulas_;
};

template <class T>
void StencilPlan::combine(std::span<const T> f, std::span<T> out) const
{
    const T h(eps_);
    const T h2(eps_ * eps_);
    for (std::size_t s = 0; s < formulas_.size(); ++s)
    {
        const Formula& fm = formulas_[s];
        const auto& i = fm.idx;
        switch (fm.order)
        {
            case 0: out[s] = f[i[0]]; break;
            case 1: out[s] = (f[i[0]] - f[i[1]]) / h; break;
            default:
                if (fm.mixed)
                    out[s] = (((f[i[0]] - f[i[1]]) - f[i[2]]) + f[i[3]]) / h2;
                else
                    out[s] = ((f[i[0]] - T(2.0) * f[i[1]]) + f[i[2]]) / h2;
                break;
        }
    }
}

// Slot values of a plain function at x.
SlotValues fd_slots(const std::function<double(std::span<const double>)>& f,
                    std::span<const double> x, const std::vector<DerivativeSlot>& slots,
                    double epsilon);

}  // namespace sympde
