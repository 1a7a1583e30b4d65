#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sympde/error.hpp"
#include "sympde/expr.hpp"
#include "sympde/scalar_ops.hpp"
#include "sympde/tape.hpp"

namespace sympde {

// Operators available at every interior node: unary ops act on the sum of
// the two children, binary ops on the pair. Index order is unary then binary.
struct OperatorLibrary
{
    std::vector<OpId> unary;
    std::vector<OpId> binary;

    std::size_t size() const { return unary.size() + binary.size(); }
    OpId at(std::size_t j) const
    {
        return j < unary.size() ? unary[j] : binary[j - unary.size()];
    }
    // Throws std::invalid_argument unless id is present and arities match.
    void validate() const;

    // U = [id, sin, exp], V = [mul]
    static OperatorLibrary standard();
};

enum class GateMode
{
    Soft,
    Discrete,
};

// Balanced binary parse tree of the given depth over `dims` inputs.
//
// Parameters live in one flat vector, layer-major:
//   leaves i = 0 .. 2^m-1:            w_i (dims values), b_i
//   layer n = 1 .. m, i = 0 .. 2^(m-n)-1:  logits (k values), scale w, bias b
// Node (n, i) reads children 2i and 2i+1 of layer n-1; layer 0 is the leaves.
class MsflModel
{
  public:
    MsflModel(int depth, int dims, OperatorLibrary lib);

    int depth() const { return depth_; }
    int dims() const { return dims_; }
    const OperatorLibrary& library() const { return lib_; }
    GateMode gate_mode() const { return mode_; }
    void set_gate_mode(GateMode mode) { mode_ = mode; }

    std::span<double> parameters() { return params_; }
    std::span<const double> parameters() const { return params_; }
    void set_parameters(std::span<const double> values);
    std::size_t parameter_count() const { return params_.size(); }
    static std::size_t parameter_count(int depth, int dims, std::size_t ops);

    std::size_t leaf_count() const { return std::size_t{1} << depth_; }
    std::size_t node_count() const { return leaf_count() - 1; }
    std::size_t leaf_offset(std::size_t leaf) const { return leaf * (dims_ + 1); }
    // Interior nodes are numbered layer by layer, root last.
    std::size_t node_ordinal(int layer, std::size_t i) const;
    std::size_t node_offset(std::size_t ordinal) const
    {
        return leaf_count() * (dims_ + 1) + ordinal * (lib_.size() + 2);
    }

  private:
    int depth_;
    int dims_;
    OperatorLibrary lib_;
    GateMode mode_ = GateMode::Soft;
    std::vector<double> params_;
};

// Leaf weights ~ U(-1, 1), biases 0, logits ~ U(-0.1, 0.1), scales 1.
MsflModel init_model(int depth, int dims, const OperatorLibrary& lib, std::uint64_t seed);

template <class T>
std::vector<T> operate(const OperatorLibrary& lib, const T& x1, const T& x2)
{
    std::vector<T> out;
    out.reserve(lib.size());
    T sum = x1 + x2;
    for (OpId op : lib.unary)
        out.push_back(apply_op(op, sum));
    for (OpId op : lib.binary)
        out.push_back(apply_op(op, x1, x2));
    return out;
}

template <class T>
std::vector<T> softmax(std::span<const T> logits)
{
    double shift = primal_of(logits[0]);
    for (const T& w : logits)
        shift = primal_of(w) > shift ? primal_of(w) : shift;
    std::vector<T> out;
    out.reserve(logits.size());
    T total = T(0.0);
    for (std::size_t i = 0; i < logits.size(); ++i)
    {
        out.push_back(op_exp(logits[i] - T(shift)));
        total = i == 0 ? out[0] : total + out[i];
    }
    for (T& v : out)
        v = v / total;
    return out;
}

// Index of the first maximal entry.
template <class T>
std::size_t argmax(std::span<const T> v)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
    {
        if (primal_of(v[i]) > primal_of(v[best]))
            best = i;
    }
    return best;
}

// Hump-sharpened gate: H(s_i / max s). Entries tied with the maximum (other
// than the first) are forced to zero so exactly one entry is 1.
template <class T>
std::vector<T> discrete_softmax(std::span<const T> logits)
{
    std::vector<T> s = softmax(logits);
    std::size_t best = argmax(std::span<const T>(s));
    T peak = op_max(std::span<const T>(s));
    std::vector<T> out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
    {
        T ratio = s[i] / peak;
        if (i != best && primal_of(ratio) == 1.0)
            out.push_back(T(0.0));
        else
            out.push_back(op_hump(ratio));
    }
    return out;
}

// Gate vectors for every interior node, node_count x k in ordinal order.
template <class T>
std::vector<T> compute_gates(const MsflModel& model, std::span<const T> params,
                             GateMode mode)
{
    std::size_t k = model.library().size();
    std::vector<T> gates;
    gates.reserve(model.node_count() * k);
    for (std::size_t n = 0; n < model.node_count(); ++n)
    {
        auto logits = params.subspan(model.node_offset(n), k);
        std::vector<T> g = mode == GateMode::Soft ? softmax(logits) : discrete_softmax(logits);
        gates.insert(gates.end(), g.begin(), g.end());
    }
    return gates;
}

// Root value h_0^(m) for one input point. `scratch` is resized as needed.
template <class T>
T forward(const MsflModel& model, std::span<const T> params, std::span<const T> gates,
          std::span<const double> x, std::vector<T>& scratch)
{
    const std::size_t d = static_cast<std::size_t>(model.dims());
    if (x.size() != d)
        throw DimensionMismatch("input has " + std::to_string(x.size())
                                + " coordinates, model expects " + std::to_string(d));
    const std::size_t k = model.library().size();
    const std::size_t leaves = model.leaf_count();
    scratch.resize(leaves + model.node_count());

    for (std::size_t i = 0; i < leaves; ++i)
    {
        auto p = params.subspan(model.leaf_offset(i), d + 1);
        T acc = p[0] * T(x[0]);
        for (std::size_t j = 1; j < d; ++j)
            acc = acc + p[j] * T(x[j]);
        scratch[i] = acc + p[d];
    }

    // Layer n occupies scratch[base_in .. base_in + width_in) as inputs.
    std::size_t base_in = 0;
    std::size_t width = leaves;
    std::size_t ordinal = 0;
    for (int layer = 1; layer <= model.depth(); ++layer)
    {
        std::size_t base_out = base_in + width;
        width /= 2;
        for (std::size_t i = 0; i < width; ++i, ++ordinal)
        {
            std::vector<T> p = operate(model.library(), scratch[base_in + 2 * i],
                                       scratch[base_in + 2 * i + 1]);
            auto g = gates.subspan(ordinal * k, k);
            T z = g[0] * p[0];
            for (std::size_t j = 1; j < k; ++j)
                z = z + g[j] * p[j];
            auto node = params.subspan(model.node_offset(ordinal) + k, 2);
            scratch[base_out + i] = node[0] * z + node[1];
        }
        base_in = base_out;
    }
    return scratch[base_in];
}

// Plain evaluation using the model's own parameters and gate mode.
double forward(const MsflModel& model, std::span<const double> x);

// Records the evaluation on `tape`. When `params_out` is given it receives
// the parameter leaves, in layout order.
Value forward(const MsflModel& model, std::span<const double> x, Tape& tape,
              std::vector<Value>* params_out = nullptr);

// Each node becomes its argmax operator under the affine map (w, b).
Expr extract(const MsflModel& model);

}  // namespace sympde
