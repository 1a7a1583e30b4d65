#include <numbers>

#include "sympde/bench.hpp"
#include "sympde/error.hpp"

namespace sympde {
namespace {

Expr derive(const Expr& e, std::size_t var)
{
    switch (e.kind())
    {
        case Expr::Kind::Const: return Expr::constant(0.0);
        case Expr::Kind::Var: return Expr::constant(e.var_index() == var ? 1.0 : 0.0);
        case Expr::Kind::Slot:
            throw UnsupportedDerivative("cannot differentiate slot '" + e.slot_name() + "'");
        case Expr::Kind::Affine:
            return Expr::affine(e.weight(), 0.0, derive(e.child(0), var));
        case Expr::Kind::Unary: {
            const Expr& c = e.child(0);
            switch (e.op())
            {
                case OpId::Id: return derive(c, var);
                // cos(c) = sin(c + pi/2)
                case OpId::Sin:
                    return sin(Expr::affine(1.0, std::numbers::pi / 2, c)) * derive(c, var);
                case OpId::Exp: return e * derive(c, var);
                default:
                    throw UnsupportedDerivative("no derivative rule for "
                                                + std::string(op_name(e.op())));
            }
        }
        case Expr::Kind::Binary: {
            const Expr& l = e.child(0);
            const Expr& r = e.child(1);
            switch (e.op())
            {
                case OpId::Add: return derive(l, var) + derive(r, var);
                case OpId::Mul: return derive(l, var) * r + l * derive(r, var);
                case OpId::Div:
                    return (derive(l, var) * r - l * derive(r, var)) / (r * r);
                default: break;
            }
            break;
        }
    }
    throw UnsupportedDerivative("no derivative rule for expression");
}

}  // namespace

Expr differentiate(const Expr& e, std::size_t var)
{
    return simplify(derive(simplify(e), var));
}

Expr fp_expand(const FpCoefficients& coeffs)
{
    const Expr u = Expr::slot("u");
    const Expr u_x = Expr::slot("u_x");
    const Expr u_xx = Expr::slot("u_xx");
    const Expr u_t = Expr::slot("u_t");
    const Expr A = simplify(coeffs.drift);
    const Expr B = simplify(coeffs.diffusion);

    Expr rhs = Expr::constant(0.0);
    if (coeffs.direction == FpCoefficients::Direction::Forward)
    {
        Expr B_x = differentiate(B, 0);
        Expr B_xx = differentiate(B_x, 0);
        Expr A_x = differentiate(A, 0);
        Expr c_u = simplify(B_xx - A_x);
        Expr c_ux = simplify(Expr::affine(2.0, 0.0, B_x) - A);
        rhs = c_u * u + c_ux * u_x + B * u_xx;
    }
    else
    {
        rhs = simplify(-A) * u_x + B * u_xx;
    }
    return simplify(u_t - rhs);
}

}  // namespace sympde
