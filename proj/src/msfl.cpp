#include "sympde/msfl.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace sympde {

void OperatorLibrary::validate() const
{
    if (std::find(unary.begin(), unary.end(), OpId::Id) == unary.end())
        throw std::invalid_argument("operator library must contain id");
    for (OpId op : unary)
    {
        if (!is_unary(op))
            throw std::invalid_argument("binary operator listed as unary");
    }
    for (OpId op : binary)
    {
        if (is_unary(op))
            throw std::invalid_argument("unary operator listed as binary");
    }
}

OperatorLibrary OperatorLibrary::standard()
{
    return {{OpId::Id, OpId::Sin, OpId::Exp}, {OpId::Mul}};
}

MsflModel::MsflModel(int depth, int dims, OperatorLibrary lib)
    : depth_(depth), dims_(dims), lib_(std::move(lib))
{
    if (depth < 1 || dims < 1)
        throw std::invalid_argument("model depth and dims must be >= 1");
    if (depth > 16)
        throw std::invalid_argument("model depth too large");
    lib_.validate();
    params_.assign(parameter_count(depth, dims, lib_.size()), 0.0);
}

std::size_t MsflModel::parameter_count(int depth, int dims, std::size_t ops)
{
    std::size_t leaves = std::size_t{1} << depth;
    return leaves * (dims + 1) + (leaves - 1) * (ops + 2);
}

void MsflModel::set_parameters(std::span<const double> values)
{
    if (values.size() != params_.size())
        throw DimensionMismatch("parameter vector has wrong length");
    std::copy(values.begin(), values.end(), params_.begin());
}

std::size_t MsflModel::node_ordinal(int layer, std::size_t i) const
{
    // Layers 1..layer-1 hold 2^(m-1) + ... + 2^(m-layer+1) nodes.
    std::size_t before = 0;
    for (int n = 1; n < layer; ++n)
        before += std::size_t{1} << (depth_ - n);
    return before + i;
}

MsflModel init_model(int depth, int dims, const OperatorLibrary& lib, std::uint64_t seed)
{
    MsflModel model(depth, dims, lib);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> weight(-1.0, 1.0);
    std::uniform_real_distribution<double> logit(-0.1, 0.1);
    auto p = model.parameters();
    const std::size_t d = static_cast<std::size_t>(dims);
    for (std::size_t i = 0; i < model.leaf_count(); ++i)
    {
        std::size_t off = model.leaf_offset(i);
        for (std::size_t j = 0; j < d; ++j)
            p[off + j] = weight(rng);
        p[off + d] = 0.0;
    }
    const std::size_t k = lib.size();
    for (std::size_t n = 0; n < model.node_count(); ++n)
    {
        std::size_t off = model.node_offset(n);
        for (std::size_t j = 0; j < k; ++j)
            p[off + j] = logit(rng);
        p[off + k] = 1.0;
        p[off + k + 1] = 0.0;
    }
    return model;
}

double forward(const MsflModel& model, std::span<const double> x)
{
    auto params = model.parameters();
    std::vector<double> gates = compute_gates(model, params, model.gate_mode());
    std::vector<double> scratch;
    return forward<double>(model, params, gates, x, scratch);
}

Value forward(const MsflModel& model, std::span<const double> x, Tape& tape,
              std::vector<Value>* params_out)
{
    std::vector<Value> params;
    params.reserve(model.parameter_count());
    for (double p : model.parameters())
        params.push_back(tape.variable(p));
    std::vector<Value> gates =
        compute_gates(model, std::span<const Value>(params), model.gate_mode());
    std::vector<Value> scratch;
    Value out = forward<Value>(model, params, gates, x, scratch);
    if (params_out != nullptr)
        *params_out = std::move(params);
    return out;
}

Expr extract(const MsflModel& model)
{
    const std::size_t d = static_cast<std::size_t>(model.dims());
    const std::size_t k = model.library().size();
    auto params = model.parameters();

    std::vector<Expr> level;
    level.reserve(model.leaf_count());
    for (std::size_t i = 0; i < model.leaf_count(); ++i)
    {
        auto p = params.subspan(model.leaf_offset(i), d + 1);
        Expr acc = Expr::affine(p[0], 0.0, Expr::var(0));
        for (std::size_t j = 1; j < d; ++j)
            acc = acc + Expr::affine(p[j], 0.0, Expr::var(j));
        level.push_back(acc + Expr::constant(p[d]));
    }

    std::size_t ordinal = 0;
    while (level.size() > 1)
    {
        std::vector<Expr> next;
        next.reserve(level.size() / 2);
        for (std::size_t i = 0; i < level.size() / 2; ++i, ++ordinal)
        {
            std::size_t off = model.node_offset(ordinal);
            std::vector<double> s = softmax(params.subspan(off, k));
            OpId op = model.library().at(argmax(std::span<const double>(s)));
            const Expr& a = level[2 * i];
            const Expr& b = level[2 * i + 1];
            Expr body = is_unary(op) ? Expr::unary(op, a + b) : Expr::binary(op, a, b);
            next.push_back(Expr::affine(params[off + k], params[off + k + 1], body));
        }
        level = std::move(next);
    }
    return level.front();
}

}  // namespace sympde
