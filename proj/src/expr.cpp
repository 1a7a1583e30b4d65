#include "sympde/expr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sympde/error.hpp"

namespace sympde {

bool is_unary(OpId op)
{
    switch (op)
    {
        case OpId::Id:
        case OpId::Sin:
        case OpId::Exp:
        case OpId::Sqrt:
        case OpId::Abs:
            return true;
        default:
            return false;
    }
}

bool is_abs_guarded(OpId op)
{
    return op == OpId::Sqrt;
}

std::string_view op_name(OpId op)
{
    switch (op)
    {
        case OpId::Id: return "id";
        case OpId::Sin: return "sin";
        case OpId::Exp: return "exp";
        case OpId::Sqrt: return "sqrt";
        case OpId::Abs: return "abs";
        case OpId::Add: return "add";
        case OpId::Mul: return "mul";
        case OpId::Div: return "div";
    }
    return "?";
}

Expr Expr::constant(double value)
{
    if (!std::isfinite(value))
        throw std::invalid_argument("Expr constants must be finite");
    Node n;
    n.a = value;
    return Expr(std::make_shared<const Node>(std::move(n)));
}

Expr Expr::var(std::size_t index)
{
    Node n;
    n.kind = Kind::Var;
    n.index = index;
    return Expr(std::make_shared<const Node>(std::move(n)));
}

Expr Expr::slot(std::string name)
{
    Node n;
    n.kind = Kind::Slot;
    n.name = std::move(name);
    return Expr(std::make_shared<const Node>(std::move(n)));
}

Expr Expr::unary(OpId op, Expr child)
{
    if (!is_unary(op))
        throw std::invalid_argument("binary operator used as unary");
    Node n;
    n.kind = Kind::Unary;
    n.op = op;
    n.children.push_back(std::move(child));
    return Expr(std::make_shared<const Node>(std::move(n)));
}

Expr Expr::binary(OpId op, Expr left, Expr right)
{
    if (is_unary(op))
        throw std::invalid_argument("unary operator used as binary");
    Node n;
    n.kind = Kind::Binary;
    n.op = op;
    n.children.push_back(std::move(left));
    n.children.push_back(std::move(right));
    return Expr(std::make_shared<const Node>(std::move(n)));
}

Expr Expr::affine(double w, double b, Expr child)
{
    if (!std::isfinite(w) || !std::isfinite(b))
        throw std::invalid_argument("affine coefficients must be finite");
    Node n;
    n.kind = Kind::Affine;
    n.a = w;
    n.b = b;
    n.children.push_back(std::move(child));
    return Expr(std::make_shared<const Node>(std::move(n)));
}

bool Expr::operator==(const Expr& other) const
{
    if (node_ == other.node_)
        return true;
    const Node& l = *node_;
    const Node& r = *other.node_;
    if (l.kind != r.kind)
        return false;
    switch (l.kind)
    {
        case Kind::Const: return l.a == r.a;
        case Kind::Var: return l.index == r.index;
        case Kind::Slot: return l.name == r.name;
        case Kind::Affine:
            if (l.a != r.a || l.b != r.b)
                return false;
            break;
        case Kind::Unary:
        case Kind::Binary:
            if (l.op != r.op)
                return false;
            break;
    }
    for (std::size_t i = 0; i < l.children.size(); ++i)
    {
        if (!(l.children[i] == r.children[i]))
            return false;
    }
    return true;
}

std::size_t Expr::node_count() const
{
    std::size_t n = 1;
    for (const auto& c : node_->children)
        n += c.node_count();
    return n;
}

bool Expr::has_slots() const
{
    if (kind() == Kind::Slot)
        return true;
    return std::any_of(node_->children.begin(), node_->children.end(),
                       [](const Expr& c) { return c.has_slots(); });
}

std::size_t Expr::var_extent() const
{
    std::size_t n = kind() == Kind::Var ? var_index() + 1 : 0;
    for (const auto& c : node_->children)
        n = std::max(n, c.var_extent());
    return n;
}

Expr operator+(const Expr& a, const Expr& b)
{
    return Expr::binary(OpId::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b)
{
    return Expr::binary(OpId::Add, a, Expr::affine(-1.0, 0.0, b));
}

Expr operator*(const Expr& a, const Expr& b)
{
    return Expr::binary(OpId::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b)
{
    return Expr::binary(OpId::Div, a, b);
}

Expr operator-(const Expr& a)
{
    return Expr::affine(-1.0, 0.0, a);
}

Expr sin(const Expr& a)
{
    return Expr::unary(OpId::Sin, a);
}

Expr exp(const Expr& a)
{
    return Expr::unary(OpId::Exp, a);
}

double apply_unary(OpId op, double v)
{
    switch (op)
    {
        case OpId::Id: return v;
        case OpId::Sin: return std::sin(v);
        case OpId::Exp: return std::exp(std::clamp(v, -kExpClamp, kExpClamp));
        case OpId::Sqrt: return std::sqrt(std::fabs(v));
        case OpId::Abs: return std::fabs(v);
        default: break;
    }
    throw std::invalid_argument("not a unary operator");
}

double apply_binary(OpId op, double l, double r)
{
    switch (op)
    {
        case OpId::Add: return l + r;
        case OpId::Mul: return l * r;
        case OpId::Div: return l / r;
        default: break;
    }
    throw std::invalid_argument("not a binary operator");
}

double eval(const Expr& e, std::span<const double> x, const SlotValues* slots)
{
    switch (e.kind())
    {
        case Expr::Kind::Const: return e.value();
        case Expr::Kind::Var:
            if (e.var_index() >= x.size())
                throw VarIndexOutOfRange(e.var_index(), x.size());
            return x[e.var_index()];
        case Expr::Kind::Slot: {
            if (slots == nullptr)
                throw MissingSlot(e.slot_name());
            auto it = slots->find(e.slot_name());
            if (it == slots->end())
                throw MissingSlot(e.slot_name());
            return it->second;
        }
        case Expr::Kind::Unary:
            return apply_unary(e.op(), eval(e.child(0), x, slots));
        case Expr::Kind::Binary:
            return apply_binary(e.op(), eval(e.child(0), x, slots),
                                eval(e.child(1), x, slots));
        case Expr::Kind::Affine:
            return e.weight() * eval(e.child(0), x, slots) + e.bias();
    }
    return 0.0;
}

}  // namespace sympde
