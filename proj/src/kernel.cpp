#include "sympde/kernel.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

namespace sympde {
namespace {

// Gate vectors for every node plus what the reverse sweep needs.
struct GateState
{
    GateMode mode;
    std::size_t k;
    std::vector<double> soft;    // s(omega)
    std::vector<double> gate;    // s or s'
    std::vector<double> ratio;   // s_i / max s (discrete only)
    std::vector<std::size_t> best;
    std::vector<char> masked;    // tie-masked entries, constant 0
    std::vector<char> active;    // entries that can affect value or gradient

    explicit GateState(const MsflModel& model)
        : mode(model.gate_mode()), k(model.library().size())
    {
        const std::size_t nodes = model.node_count();
        auto params = model.parameters();
        soft.resize(nodes * k);
        gate.resize(nodes * k);
        ratio.assign(nodes * k, 1.0);
        best.resize(nodes);
        masked.assign(nodes * k, 0);
        active.assign(nodes * k, 1);
        for (std::size_t o = 0; o < nodes; ++o)
        {
            std::vector<double> s = softmax(params.subspan(model.node_offset(o), k));
            std::copy(s.begin(), s.end(), soft.begin() + o * k);
            best[o] = argmax(std::span<const double>(s));
            if (mode == GateMode::Soft)
            {
                std::copy(s.begin(), s.end(), gate.begin() + o * k);
                continue;
            }
            double peak = s[best[o]];
            for (std::size_t j = 0; j < k; ++j)
            {
                std::size_t e = o * k + j;
                double r = s[j] / peak;
                ratio[e] = r;
                if (j != best[o] && r == 1.0)
                {
                    masked[e] = 1;
                    gate[e] = 0.0;
                }
                else
                {
                    gate[e] = op_hump(r);
                }
                // H(r) == 0 implies H'(r) == 0: the entry is inert.
                active[e] = gate[e] != 0.0;
            }
        }
    }

    // Chains d loss / d gate into d loss / d logits.
    void backward(const MsflModel& model, std::span<const double> dgate,
                  std::span<double> dparams) const
    {
        std::vector<double> ds(k);
        for (std::size_t o = 0; o < model.node_count(); ++o)
        {
            const std::size_t base = o * k;
            if (mode == GateMode::Soft)
            {
                for (std::size_t j = 0; j < k; ++j)
                    ds[j] = dgate[base + j];
            }
            else
            {
                std::fill(ds.begin(), ds.end(), 0.0);
                const double peak = soft[base + best[o]];
                double dpeak = 0.0;
                for (std::size_t j = 0; j < k; ++j)
                {
                    std::size_t e = base + j;
                    if (masked[e])
                        continue;
                    double r = ratio[e];
                    double dr = dgate[e] * (-2.0 * kHumpSharpness * (r - 1.0) * gate[e]);
                    ds[j] += dr / peak;
                    dpeak -= dr * soft[e] / (peak * peak);
                }
                ds[best[o]] += dpeak;
            }
            double dot = 0.0;
            for (std::size_t j = 0; j < k; ++j)
                dot += ds[j] * soft[base + j];
            const std::size_t off = model.node_offset(o);
            for (std::size_t j = 0; j < k; ++j)
                dparams[off + j] += soft[base + j] * (ds[j] - dot);
        }
    }
};

// Intermediates of one tree evaluation.
struct Trace
{
    std::vector<double> h;    // leaves then interior nodes, layer by layer
    std::vector<double> sum;  // c0 + c1 per node
    std::vector<double> p;    // operator outputs, node x k
    std::vector<double> z;    // gated mixture per node
};

struct Layer
{
    std::size_t in_base;
    std::size_t out_base;
    std::size_t width;
    std::size_t first_ordinal;
};

class TreeEvaluator
{
  public:
    TreeEvaluator(const MsflModel& model, const GateState& gates)
        : model_(model), gates_(gates), params_(model.parameters()),
          d_(static_cast<std::size_t>(model.dims())), k_(model.library().size()),
          r_(model.library().unary.size())
    {
        std::size_t in_base = 0;
        std::size_t width = model.leaf_count();
        std::size_t ordinal = 0;
        for (int n = 1; n <= model.depth(); ++n)
        {
            std::size_t out_base = in_base + width;
            width /= 2;
            layers_.push_back({in_base, out_base, width, ordinal});
            ordinal += width;
            in_base = out_base;
        }
    }

    void reserve(Trace& t) const
    {
        t.h.resize(model_.leaf_count() + model_.node_count());
        t.sum.resize(model_.node_count());
        t.p.resize(model_.node_count() * k_);
        t.z.resize(model_.node_count());
    }

    double forward(std::span<const double> x, Trace& t) const
    {
        for (std::size_t i = 0; i < model_.leaf_count(); ++i)
        {
            const double* w = params_.data() + model_.leaf_offset(i);
            double acc = w[0] * x[0];
            for (std::size_t j = 1; j < d_; ++j)
                acc = acc + w[j] * x[j];
            t.h[i] = acc + w[d_];
        }
        const auto& lib = model_.library();
        for (const Layer& L : layers_)
        {
            for (std::size_t i = 0; i < L.width; ++i)
            {
                const std::size_t o = L.first_ordinal + i;
                const double c0 = t.h[L.in_base + 2 * i];
                const double c1 = t.h[L.in_base + 2 * i + 1];
                const double s = c0 + c1;
                t.sum[o] = s;
                double z = 0.0;
                bool first = true;
                for (std::size_t j = 0; j < k_; ++j)
                {
                    const std::size_t e = o * k_ + j;
                    if (!gates_.active[e])
                    {
                        t.p[e] = 0.0;
                        continue;
                    }
                    double v = j < r_ ? apply_op(lib.unary[j], s)
                                      : apply_op(lib.binary[j - r_], c0, c1);
                    t.p[e] = v;
                    double term = gates_.gate[e] * v;
                    z = first ? term : z + term;
                    first = false;
                }
                t.z[o] = z;
                const double* nw = params_.data() + model_.node_offset(o) + k_;
                t.h[L.out_base + i] = nw[0] * z + nw[1];
            }
        }
        return t.h.back();
    }

    void backward(std::span<const double> x, const Trace& t, double seed,
                  std::span<double> dparams, std::span<double> dgate,
                  std::vector<double>& dh) const
    {
        dh.assign(t.h.size(), 0.0);
        dh.back() = seed;
        const auto& lib = model_.library();
        for (auto L = layers_.rbegin(); L != layers_.rend(); ++L)
        {
            for (std::size_t i = 0; i < L->width; ++i)
            {
                const double d = dh[L->out_base + i];
                if (d == 0.0)
                    continue;
                const std::size_t o = L->first_ordinal + i;
                const std::size_t off = model_.node_offset(o);
                dparams[off + k_] += d * t.z[o];
                dparams[off + k_ + 1] += d;
                const double dz = d * params_[off + k_];
                const double c0 = t.h[L->in_base + 2 * i];
                const double c1 = t.h[L->in_base + 2 * i + 1];
                const double s = t.sum[o];
                double dsum = 0.0;
                double dc0 = 0.0;
                double dc1 = 0.0;
                for (std::size_t j = 0; j < k_; ++j)
                {
                    const std::size_t e = o * k_ + j;
                    if (!gates_.active[e])
                        continue;
                    const double pj = t.p[e];
                    dgate[e] += dz * pj;
                    const double dp = dz * gates_.gate[e];
                    if (dp == 0.0)
                        continue;
                    if (j < r_)
                    {
                        OpId op = lib.unary[j];
                        double deriv;
                        if (op == OpId::Id)
                            deriv = 1.0;
                        else if (op == OpId::Exp)
                            deriv = (s >= -kExpClamp && s <= kExpClamp) ? pj : 0.0;
                        else
                            deriv = op_derivative(op, s);
                        dsum += dp * deriv;
                        continue;
                    }
                    switch (lib.binary[j - r_])
                    {
                        case OpId::Mul:
                            dc0 += dp * c1;
                            dc1 += dp * c0;
                            break;
                        case OpId::Div:
                            dc0 += dp / c1;
                            dc1 -= dp * c0 / (c1 * c1);
                            break;
                        default:
                            dc0 += dp;
                            dc1 += dp;
                            break;
                    }
                }
                dh[L->in_base + 2 * i] += dc0 + dsum;
                dh[L->in_base + 2 * i + 1] += dc1 + dsum;
            }
        }
        for (std::size_t i = 0; i < model_.leaf_count(); ++i)
        {
            const double d = dh[i];
            if (d == 0.0)
                continue;
            const std::size_t off = model_.leaf_offset(i);
            for (std::size_t j = 0; j < d_; ++j)
                dparams[off + j] += d * x[j];
            dparams[off + d_] += d;
        }
    }

  private:
    const MsflModel& model_;
    const GateState& gates_;
    std::span<const double> params_;
    std::size_t d_;
    std::size_t k_;
    std::size_t r_;
    std::vector<Layer> layers_;
};

struct Partial
{
    double l1 = 0.0;
    double l2 = 0.0;
    std::vector<double> dparams;
    std::vector<double> dgate;
};

}  // namespace

LossKernel::LossKernel(PdeProblem problem, Points batch, double epsilon, int threads)
    : problem_(std::move(problem)), batch_(std::move(batch)), eps_(epsilon),
      threads_(threads),
      residual_plan_(problem_.residual_slots(), problem_.dims(), epsilon)
{
    if (batch_.size() == 0)
        throw std::invalid_argument("loss kernel needs a nonempty batch");
    if (batch_.dims() != problem_.dims())
        throw DimensionMismatch("batch dimension does not match problem");
    for (std::size_t b = 0; b < batch_.size(); b += kBlockSize)
        blocks_.push_back({npos, b, std::min(b + kBlockSize, batch_.size())});
    const auto& cons = problem_.constraints();
    for (std::size_t c = 0; c < cons.size(); ++c)
    {
        if (cons[c].kind == Constraint::Kind::Derivative)
            constraint_plans_.emplace_back(
                StencilPlan({*cons[c].slot}, problem_.dims(), epsilon));
        else
            constraint_plans_.emplace_back(std::nullopt);
        for (std::size_t b = 0; b < cons[c].points.size(); b += kBlockSize)
            blocks_.push_back({c, b, std::min(b + kBlockSize, cons[c].points.size())});
    }
}

LossEvaluation LossKernel::evaluate(const MsflModel& model, bool with_gradient) const
{
    if (static_cast<std::size_t>(model.dims()) != problem_.dims())
        throw DimensionMismatch("model dimension does not match problem");

    const GateState gates(model);
    const TreeEvaluator tree(model, gates);
    const std::size_t n_params = model.parameter_count();
    const std::size_t n_gates = model.node_count() * model.library().size();
    const double n_batch = static_cast<double>(batch_.size());
    const double lambda = problem_.lambda();
    const std::size_t d = problem_.dims();

    std::vector<Partial> partials(blocks_.size());
    const int nt = threads_ > 0 ? threads_ : omp_get_max_threads();
    const long n_blocks = static_cast<long>(blocks_.size());

#pragma omp parallel for schedule(dynamic) num_threads(nt) if (nt > 1 && !omp_in_parallel())
    for (long bi = 0; bi < n_blocks; ++bi)
    {
        const Block& blk = blocks_[static_cast<std::size_t>(bi)];
        Partial& out = partials[static_cast<std::size_t>(bi)];
        if (with_gradient)
        {
            out.dparams.assign(n_params, 0.0);
            out.dgate.assign(n_gates, 0.0);
        }

        const bool interior = blk.constraint == npos;
        const StencilPlan* plan =
            interior ? &residual_plan_
                     : (constraint_plans_[blk.constraint] ? &*constraint_plans_[blk.constraint]
                                                          : nullptr);
        const std::size_t n_off = plan ? plan->offset_count() : 1;
        std::vector<Trace> traces(n_off);
        for (Trace& t : traces)
            tree.reserve(t);
        std::vector<std::vector<double>> pts(n_off, std::vector<double>(d));
        std::vector<double> fv(n_off);
        std::vector<double> df(n_off);
        std::vector<double> slots(plan ? plan->slot_count() : 0);
        std::vector<double> dslots(slots.size());
        std::vector<double> vals;
        std::vector<double> adjs;
        std::vector<double> dh;

        auto evaluate_offsets = [&](std::span<const double> x) {
            for (std::size_t i = 0; i < n_off; ++i)
            {
                plan->shifted(x, i, pts[i]);
                fv[i] = tree.forward(pts[i], traces[i]);
            }
            plan->combine<double>(fv, slots);
        };
        auto propagate = [&](std::span<const double> d_slots) {
            std::fill(df.begin(), df.end(), 0.0);
            plan->combine_adjoint(d_slots, df);
            for (std::size_t i = 0; i < n_off; ++i)
            {
                if (df[i] != 0.0)
                    tree.backward(pts[i], traces[i], df[i], out.dparams, out.dgate, dh);
            }
        };

        if (interior)
        {
            const CompiledExpr& g_expr = problem_.compiled_residual();
            for (std::size_t n = blk.begin; n < blk.end; ++n)
            {
                auto x = batch_[n];
                evaluate_offsets(x);
                double g;
                if (with_gradient)
                {
                    std::fill(dslots.begin(), dslots.end(), 0.0);
                    g = g_expr.evaluate_adjoint(x, slots, 1.0, dslots, vals, adjs);
                    const double seed = 2.0 * g / n_batch;
                    for (double& v : dslots)
                        v *= seed;
                    propagate(dslots);
                }
                else
                {
                    g = g_expr.evaluate<double>(x, slots, vals);
                }
                out.l1 += g * g;
            }
            continue;
        }

        const Constraint& c = problem_.constraints()[blk.constraint];
        for (std::size_t n = blk.begin; n < blk.end; ++n)
        {
            auto x = c.points[n];
            double value;
            if (plan)
            {
                evaluate_offsets(x);
                value = slots[0];
            }
            else
            {
                std::copy(x.begin(), x.end(), pts[0].begin());
                value = tree.forward(pts[0], traces[0]);
            }
            const double diff = value - c.targets[n];
            out.l2 += diff * diff;
            if (!with_gradient)
                continue;
            const double seed = 2.0 * lambda * diff;
            if (plan)
            {
                dslots[0] = seed;
                propagate(dslots);
            }
            else if (seed != 0.0)
            {
                tree.backward(pts[0], traces[0], seed, out.dparams, out.dgate, dh);
            }
        }
    }

    LossEvaluation result;
    double l1_sum = 0.0;
    for (const Partial& p : partials)
    {
        l1_sum += p.l1;
        result.l2 += p.l2;
    }
    result.l1 = l1_sum / n_batch;
    result.total = result.l1 + lambda * result.l2;
    if (!with_gradient)
        return result;

    result.gradient.assign(n_params, 0.0);
    std::vector<double> dgate(n_gates, 0.0);
    for (const Partial& p : partials)
    {
        for (std::size_t i = 0; i < n_params; ++i)
            result.gradient[i] += p.dparams[i];
        for (std::size_t i = 0; i < n_gates; ++i)
            dgate[i] += p.dgate[i];
    }
    gates.backward(model, dgate, result.gradient);
    return result;
}

}  // namespace sympde
