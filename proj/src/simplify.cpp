#include <algorithm>
#include <cmath>

#include "sympde/expr.hpp"

namespace sympde {
namespace {

struct Term
{
    double coef;
    Expr expr;
};

class Simplifier
{
  public:
    explicit Simplifier(double eps) : eps_(eps) {}

    Expr run(const Expr& e)
    {
        switch (e.kind())
        {
            case Expr::Kind::Const:
            case Expr::Kind::Var:
            case Expr::Kind::Slot:
                return e;
            case Expr::Kind::Unary: {
                Expr c = run(e.child(0));
                if (e.op() == OpId::Id)
                    return c;
                if (c.is_const())
                    return folded(apply_unary(e.op(), c.value()), e);
                return Expr::unary(e.op(), c);
            }
            case Expr::Kind::Affine:
                return canonical(Expr::affine(e.weight(), e.bias(), run(e.child(0))));
            case Expr::Kind::Binary:
                break;
        }

        Expr l = run(e.child(0));
        Expr r = run(e.child(1));
        switch (e.op())
        {
            case OpId::Add:
                return canonical(l + r);
            case OpId::Mul:
                return product(l, r);
            case OpId::Div:
                if (l.is_const() && r.is_const())
                    return folded(l.value() / r.value(), l / r);
                if (r.is_const() && r.value() != 0.0)
                    return canonical(Expr::affine(1.0 / r.value(), 0.0, l));
                return l / r;
            default:
                return Expr::binary(e.op(), l, r);
        }
    }

  private:
    // Falls back to the unfolded form when folding would leave the reals.
    static Expr folded(double v, const Expr& fallback)
    {
        return std::isfinite(v) ? Expr::constant(v) : fallback;
    }

    Expr product(const Expr& l, const Expr& r)
    {
        if (l.is_const() && r.is_const())
            return folded(l.value() * r.value(), l * r);
        if (l.is_const())
            return canonical(Expr::affine(l.value(), 0.0, r));
        if (r.is_const())
            return canonical(Expr::affine(r.value(), 0.0, l));

        // Pull pure scale factors out of the product.
        double scale = 1.0;
        Expr a = l;
        Expr b = r;
        if (a.kind() == Expr::Kind::Affine && a.bias() == 0.0)
        {
            scale *= a.weight();
            a = a.child(0);
        }
        if (b.kind() == Expr::Kind::Affine && b.bias() == 0.0)
        {
            scale *= b.weight();
            b = b.child(0);
        }
        if (scale == 1.0)
            return a * b;
        return canonical(Expr::affine(scale, 0.0, a * b));
    }

    static void collect(const Expr& e, double scale, std::vector<Term>& terms,
                        double& constant)
    {
        switch (e.kind())
        {
            case Expr::Kind::Const:
                constant += scale * e.value();
                return;
            case Expr::Kind::Affine:
                collect(e.child(0), scale * e.weight(), terms, constant);
                constant += scale * e.bias();
                return;
            case Expr::Kind::Binary:
                if (e.op() == OpId::Add)
                {
                    collect(e.child(0), scale, terms, constant);
                    collect(e.child(1), scale, terms, constant);
                    return;
                }
                break;
            default:
                break;
        }
        for (auto& t : terms)
        {
            if (t.expr == e)
            {
                t.coef += scale;
                return;
            }
        }
        terms.push_back({scale, e});
    }

    // Rebuilds a sum as  c1*t1 + c2*t2 + ... + constant  with like terms
    // merged, variables first in index order.
    Expr canonical(const Expr& e)
    {
        std::vector<Term> terms;
        double constant = 0.0;
        collect(e, 1.0, terms, constant);

        std::erase_if(terms, [&](const Term& t) {
            return t.coef == 0.0 || (eps_ > 0.0 && std::fabs(t.coef) < eps_);
        });
        if (eps_ > 0.0 && std::fabs(constant) < eps_)
            constant = 0.0;
        std::stable_sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) {
            bool av = a.expr.kind() == Expr::Kind::Var;
            bool bv = b.expr.kind() == Expr::Kind::Var;
            if (av && bv)
                return a.expr.var_index() < b.expr.var_index();
            return av && !bv;
        });

        if (terms.empty())
            return Expr::constant(constant);
        if (terms.size() == 1)
        {
            const Term& t = terms[0];
            if (t.coef == 1.0 && constant == 0.0)
                return t.expr;
            return Expr::affine(t.coef, constant, t.expr);
        }
        auto scaled = [](const Term& t) {
            return t.coef == 1.0 ? t.expr : Expr::affine(t.coef, 0.0, t.expr);
        };
        Expr sum = scaled(terms[0]);
        for (std::size_t i = 1; i < terms.size(); ++i)
            sum = sum + scaled(terms[i]);
        if (constant != 0.0)
            sum = sum + Expr::constant(constant);
        return sum;
    }

    double eps_;
};

}  // namespace

Expr simplify(const Expr& e, double coeff_epsilon)
{
    return Simplifier(std::max(coeff_epsilon, 0.0)).run(e);
}

}  // namespace sympde
