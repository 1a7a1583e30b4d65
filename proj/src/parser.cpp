#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <string>

#include "sympde/error.hpp"
#include "sympde/expr.hpp"

namespace sympde {
namespace {

class Parser
{
  public:
    Parser(std::string_view src, const std::vector<std::string>& vars,
           const std::vector<std::string>& slots)
        : src_(src), vars_(vars), slots_(slots)
    {
    }

    Expr run()
    {
        skip_space();
        if (at_end())
            throw SyntaxError(0, "empty expression");
        Expr e = parse_sum();
        skip_space();
        if (!at_end())
            throw SyntaxError(pos_, std::string("unexpected '") + src_[pos_] + "'");
        return e;
    }

  private:
    bool at_end() const { return pos_ >= src_.size(); }

    void skip_space()
    {
        while (!at_end() && std::isspace(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
    }

    bool accept(char c)
    {
        skip_space();
        if (!at_end() && src_[pos_] == c)
        {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c)
    {
        if (!accept(c))
        {
            throw SyntaxError(pos_, std::string("expected '") + c + "'");
        }
    }

    Expr parse_sum()
    {
        Expr lhs = parse_product();
        for (;;)
        {
            if (accept('+'))
                lhs = lhs + parse_product();
            else if (accept('-'))
                lhs = lhs - parse_product();
            else
                return lhs;
        }
    }

    Expr parse_product()
    {
        Expr lhs = parse_unary();
        for (;;)
        {
            if (accept('*'))
                lhs = lhs * parse_unary();
            else if (accept('/'))
                lhs = lhs / parse_unary();
            else
                return lhs;
        }
    }

    Expr parse_unary()
    {
        if (accept('-'))
        {
            Expr operand = parse_unary();
            if (operand.is_const())
                return Expr::constant(-operand.value());
            return -operand;
        }
        if (accept('+'))
            return parse_unary();
        return parse_power();
    }

    Expr parse_power()
    {
        Expr base = parse_atom();
        if (!accept('^'))
            return base;
        skip_space();
        bool negative = accept('-');
        skip_space();
        std::size_t start = pos_;
        while (!at_end() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
        if (start == pos_)
            throw SyntaxError(pos_, "exponent must be an integer literal");
        if (!at_end() && (src_[pos_] == '.' || src_[pos_] == 'e' || src_[pos_] == 'E'))
            throw SyntaxError(pos_, "exponent must be an integer literal");
        long n = std::stol(std::string(src_.substr(start, pos_ - start)));
        if (n > 64)
            throw SyntaxError(start, "exponent too large");
        if (n == 0)
            return Expr::constant(1.0);
        Expr result = base;
        for (long i = 1; i < n; ++i)
            result = result * base;
        if (negative)
            return Expr::constant(1.0) / result;
        return result;
    }

    Expr parse_atom()
    {
        skip_space();
        if (at_end())
            throw SyntaxError(pos_, "unexpected end of input");
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)))
            return parse_name();
        if (accept('('))
        {
            Expr inner = parse_sum();
            expect(')');
            return inner;
        }
        throw SyntaxError(pos_, std::string("unexpected '") + c + "'");
    }

    Expr parse_number()
    {
        std::size_t start = pos_;
        auto digits = [&] {
            while (!at_end() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                ++pos_;
        };
        digits();
        if (!at_end() && src_[pos_] == '.')
        {
            ++pos_;
            digits();
        }
        if (!at_end() && (src_[pos_] == 'e' || src_[pos_] == 'E'))
        {
            std::size_t save = pos_;
            ++pos_;
            if (!at_end() && (src_[pos_] == '+' || src_[pos_] == '-'))
                ++pos_;
            if (!at_end() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                digits();
            else
                pos_ = save;
        }
        std::string text(src_.substr(start, pos_ - start));
        if (text == ".")
            throw SyntaxError(start, "malformed number");
        errno = 0;
        double v = std::strtod(text.c_str(), nullptr);
        if (errno == ERANGE || !std::isfinite(v))
            throw SyntaxError(start, "number out of range");
        return Expr::constant(v);
    }

    Expr parse_name()
    {
        std::size_t start = pos_;
        while (!at_end()
               && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        std::string name(src_.substr(start, pos_ - start));

        std::size_t after = pos_;
        skip_space();
        bool call = !at_end() && src_[pos_] == '(';
        pos_ = after;
        if (call)
        {
            OpId op;
            if (name == "sin")
                op = OpId::Sin;
            else if (name == "exp")
                op = OpId::Exp;
            else if (name == "sqrt")
                op = OpId::Sqrt;
            else if (name == "abs")
                op = OpId::Abs;
            else
                throw UnknownIdentifier(name);
            expect('(');
            Expr arg = parse_sum();
            expect(')');
            return Expr::unary(op, std::move(arg));
        }

        auto v = std::find(vars_.begin(), vars_.end(), name);
        if (v != vars_.end())
            return Expr::var(static_cast<std::size_t>(v - vars_.begin()));
        if (std::find(slots_.begin(), slots_.end(), name) != slots_.end())
            return Expr::slot(name);
        throw UnknownIdentifier(name);
    }

    std::string_view src_;
    const std::vector<std::string>& vars_;
    const std::vector<std::string>& slots_;
    std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view src, const std::vector<std::string>& var_names,
           const std::vector<std::string>& slot_names)
{
    return Parser(src, var_names, slot_names).run();
}

}  // namespace sympde
