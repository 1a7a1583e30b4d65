#include "sympde/stencil.hpp"

#include <stdexcept>

namespace sympde {

std::vector<DerivativeSlot> derivative_slots(const std::vector<std::string>& vars)
{
    std::vector<DerivativeSlot> out;
    out.push_back({"u", 0, 0, 0});
    for (std::size_t i = 0; i < vars.size(); ++i)
        out.push_back({"u_" + vars[i], 1, i, i});
    for (std::size_t i = 0; i < vars.size(); ++i)
    {
        for (std::size_t j = 0; j < vars.size(); ++j)
            out.push_back({"u_" + vars[i] + vars[j], 2, i, j});
    }
    return out;
}

std::optional<DerivativeSlot> find_slot(const std::vector<DerivativeSlot>& slots,
                                        const std::string& name)
{
    for (const auto& s : slots)
    {
        if (s.name == name)
            return s;
    }
    return std::nullopt;
}

StencilPlan::StencilPlan(std::vector<DerivativeSlot> slots, std::size_t dims,
                         double epsilon)
    : slots_(std::move(slots)), dims_(dims), eps_(epsilon)
{
    if (!(epsilon > 0.0))
        throw std::invalid_argument("stencil step must be positive");
    auto axis = [&](std::size_t a, double step) {
        std::vector<double> v(dims_, 0.0);
        v[a] = step;
        return v;
    };
    for (const auto& s : slots_)
    {
        if (s.first >= dims_ || s.second >= dims_)
            throw std::invalid_argument("slot variable out of range");
        Formula fm{s.order, s.mixed(), {0, 0, 0, 0}};
        switch (s.order)
        {
            case 0: fm.idx[0] = offset_index(std::vector<double>(dims_, 0.0)); break;
            case 1:
                fm.idx[0] = offset_index(axis(s.first, eps_ / 2));
                fm.idx[1] = offset_index(axis(s.first, -eps_ / 2));
                break;
            case 2:
                if (s.mixed())
                {
                    const double q = eps_ / 2;
                    int n = 0;
                    for (double a : {q, -q})
                    {
                        for (double b : {q, -q})
                        {
                            std::vector<double> v(dims_, 0.0);
                            v[s.first] = a;
                            v[s.second] = b;
                            fm.idx[n++] = offset_index(std::move(v));
                        }
                    }
                }
                else
                {
                    fm.idx[0] = offset_index(axis(s.first, eps_));
                    fm.idx[1] = offset_index(std::vector<double>(dims_, 0.0));
                    fm.idx[2] = offset_index(axis(s.first, -eps_));
                }
                break;
            default: throw std::invalid_argument("slot order must be 0, 1 or 2");
        }
        formulas_.push_back(fm);
    }
}

std::uint32_t StencilPlan::offset_index(std::vector<double> off)
{
    for (std::size_t i = 0; i < offsets_.size(); ++i)
    {
        if (offsets_[i] == off)
            return static_cast<std::uint32_t>(i);
    }
    offsets_.push_back(std::move(off));
    return static_cast<std::uint32_t>(offsets_.size() - 1);
}

void StencilPlan::combine_adjoint(std::span<const double> d_slots,
                                  std::span<double> d_f) const
{
    const double h = eps_;
    const double h2 = eps_ * eps_;
    for (std::size_t s = 0; s < formulas_.size(); ++s)
    {
        const double ds = d_slots[s];
        if (ds == 0.0)
            continue;
        const Formula& fm = formulas_[s];
        const auto& i = fm.idx;
        switch (fm.order)
        {
            case 0: d_f[i[0]] += ds; break;
            case 1:
                d_f[i[0]] += ds / h;
                d_f[i[1]] -= ds / h;
                break;
            default:
                if (fm.mixed)
                {
                    d_f[i[0]] += ds / h2;
                    d_f[i[1]] -= ds / h2;
                    d_f[i[2]] -= ds / h2;
                    d_f[i[3]] += ds / h2;
                }
                else
                {
                    d_f[i[0]] += ds / h2;
                    d_f[i[1]] -= 2.0 * ds / h2;
                    d_f[i[2]] += ds / h2;
                }
                break;
        }
    }
}

SlotValues fd_slots(const std::function<double(std::span<const double>)>& f,
                    std::span<const double> x, const std::vector<DerivativeSlot>& slots,
                    double epsilon)
{
    StencilPlan plan(slots, x.size(), epsilon);
    std::vector<double> fv(plan.offset_count());
    std::vector<double> pt(x.size());
    for (std::size_t i = 0; i < plan.offset_count(); ++i)
    {
        plan.shifted(x, i, pt);
        fv[i] = f(pt);
    }
    std::vector<double> values(plan.slot_count());
    plan.combine<double>(fv, values);
    SlotValues out;
    for (std::size_t s = 0; s < slots.size(); ++s)
        out[slots[s].name] = values[s];
    return out;
}

}  // namespace sympde
