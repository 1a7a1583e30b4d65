#include <cmath>
#include <cstdio>
#include <string>

#include "sympde/expr.hpp"

namespace sympde {
namespace {

struct Term
{
    double coef;
    Expr expr;
};

struct LinearForm
{
    std::vector<Term> terms;
    double constant = 0.0;
};

// Distributes scale through sums, id nodes and affine maps.
void flatten(const Expr& e, double scale, LinearForm& out)
{
    switch (e.kind())
    {
        case Expr::Kind::Const:
            out.constant += scale * e.value();
            return;
        case Expr::Kind::Affine:
            flatten(e.child(0), scale * e.weight(), out);
            out.constant += scale * e.bias();
            return;
        case Expr::Kind::Unary:
            if (e.op() == OpId::Id)
            {
                flatten(e.child(0), scale, out);
                return;
            }
            break;
        case Expr::Kind::Binary:
            if (e.op() == OpId::Add)
            {
                flatten(e.child(0), scale, out);
                flatten(e.child(1), scale, out);
                return;
            }
            break;
        default:
            break;
    }
    out.terms.push_back({scale, e});
}

class Printer
{
  public:
    Printer(const std::vector<std::string>* names, int decimals)
        : names_(names), decimals_(decimals)
    {
    }

    std::string render(const Expr& e) const
    {
        LinearForm lf;
        flatten(e, 1.0, lf);
        return render_linear(lf);
    }

  private:
    std::string number(double v) const
    {
        char buf[64];
        if (decimals_ < 0)
            std::snprintf(buf, sizeof buf, "%.17g", v);
        else
            std::snprintf(buf, sizeof buf, "%.*f", decimals_, v);
        return buf;
    }

    bool rounds_to_zero(double v) const
    {
        return std::strtod(number(std::fabs(v)).c_str(), nullptr) == 0.0;
    }

    // Signed constant, with "-0.0000" normalised to "0.0000".
    std::string signed_number(double v) const
    {
        if (v < 0 && !rounds_to_zero(v))
            return "-" + number(-v);
        return number(std::fabs(v));
    }

    std::string render_linear(const LinearForm& lf) const
    {
        std::string out;
        for (std::size_t i = 0; i < lf.terms.size(); ++i)
        {
            const Term& t = lf.terms[i];
            bool negative = t.coef < 0 && !rounds_to_zero(t.coef);
            double mag = std::fabs(t.coef);
            std::string body = mag == 1.0 ? render_term(t.expr)
                                          : number(mag) + "*" + render_term(t.expr);
            if (i == 0)
                out += negative ? "-" + body : body;
            else
                out += (negative ? " - " : " + ") + body;
        }
        if (lf.terms.empty())
            return signed_number(lf.constant);
        if (lf.constant != 0.0 && !rounds_to_zero(lf.constant))
            out += (lf.constant < 0 ? " - " : " + ") + number(std::fabs(lf.constant));
        return out;
    }

    std::string name_of(std::size_t index) const
    {
        if (names_ != nullptr && index < names_->size())
            return (*names_)[index];
        return "x" + std::to_string(index);
    }

    std::string render_term(const Expr& e) const
    {
        switch (e.kind())
        {
            case Expr::Kind::Var: return name_of(e.var_index());
            case Expr::Kind::Slot: return e.slot_name();
            case Expr::Kind::Unary:
                return std::string(op_name(e.op())) + "(" + render(e.child(0)) + ")";
            case Expr::Kind::Binary:
                if (e.op() == OpId::Mul)
                    return factor(e.child(0), false) + "*" + factor(e.child(1), false);
                return factor(e.child(0), false) + "/" + factor(e.child(1), true);
            default:
                return render(e);
        }
    }

    // Operand of * or /. Sums and negative constants are parenthesised; the
    // right operand of a division also wraps products.
    std::string factor(const Expr& e, bool divisor) const
    {
        LinearForm lf;
        flatten(e, 1.0, lf);
        if (lf.terms.empty())
        {
            std::string s = signed_number(lf.constant);
            return s[0] == '-' ? "(" + s + ")" : s;
        }
        if (lf.terms.size() == 1 && lf.terms[0].coef == 1.0 && lf.constant == 0.0)
        {
            const Expr& t = lf.terms[0].expr;
            bool product = t.kind() == Expr::Kind::Binary;
            if (!(divisor && product))
                return render_term(t);
        }
        return "(" + render_linear(lf) + ")";
    }

    const std::vector<std::string>* names_;
    int decimals_;
};

}  // namespace

std::string to_string(const Expr& e, const std::vector<std::string>& var_names,
                      int decimals)
{
    return Printer(&var_names, decimals).render(e);
}

std::string to_string(const Expr& e, int decimals)
{
    return Printer(nullptr, decimals).render(e);
}

}  // namespace sympde
