#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sympde {

// Operators shared by the expression AST and the function learner.
// Unary operators take one argument, binary operators two. Subtraction is
// written as Affine(-1, 0) on the right operand; there is no Sub.
enum class OpId
{
    Id,
    Sin,
    Exp,
    Sqrt,
    Abs,
    Add,
    Mul,
    Div,
};

bool is_unary(OpId op);
// True for operators undefined on negative inputs; they see |x|.
bool is_abs_guarded(OpId op);
std::string_view op_name(OpId op);

// exp arguments are clamped to [-kExpClamp, kExpClamp].
inline constexpr double kExpClamp = 40.0;

class Expr
{
  public:
    enum class Kind
    {
        Const,
        Var,
        Slot,
        Unary,
        Binary,
        Affine,
    };

    static Expr constant(double value);
    static Expr var(std::size_t index);
    static Expr slot(std::string name);
    static Expr unary(OpId op, Expr child);
    static Expr binary(OpId op, Expr left, Expr right);
    // w * child + b
    static Expr affine(double w, double b, Expr child);

    Kind kind() const { return node_->kind; }
    double value() const { return node_->a; }
    double weight() const { return node_->a; }
    double bias() const { return node_->b; }
    std::size_t var_index() const { return node_->index; }
    const std::string& slot_name() const { return node_->name; }
    OpId op() const { return node_->op; }
    std::size_t arity() const { return node_->children.size(); }
    const Expr& child(std::size_t i) const { return node_->children[i]; }

    bool is_const() const { return kind() == Kind::Const; }
    // Structural equality (exact on constants).
    bool operator==(const Expr& other) const;

    std::size_t node_count() const;
    bool has_slots() const;
    // Largest variable index + 1, 0 when no Var appears.
    std::size_t var_extent() const;

  private:
    struct Node
    {
        Kind kind = Kind::Const;
        double a = 0.0;
        double b = 0.0;
        std::size_t index = 0;
        std::string name;
        OpId op = OpId::Id;
        std::vector<Expr> children;
    };
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr sin(const Expr& a);
Expr exp(const Expr& a);

using SlotValues = std::map<std::string, double, std::less<>>;

// Plain recursive evaluation. Throws MissingSlot / VarIndexOutOfRange.
double eval(const Expr& e, std::span<const double> x,
            const SlotValues* slots = nullptr);

// Applies a single operator to plain reals (exp clamp and abs-guards).
double apply_unary(OpId op, double v);
double apply_binary(OpId op, double l, double r);

// Parser for the residual DSL and reference solutions.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := atom ('^' ['-'] integer)?
//   atom    := number | name | func '(' expr ')' | '(' expr ')'
//   func    := sin | exp | sqrt | abs
//
// A name resolves to Var(i) when it equals var_names[i], else to a Slot when
// it is listed in slot_names.
Expr parse(std::string_view src, const std::vector<std::string>& var_names,
           const std::vector<std::string>& slot_names = {});

// Renders with `decimals` fixed digits; kFullPrecision prints every constant
// with enough digits to round-trip. Sums under an Affine are distributed.
inline constexpr int kFullPrecision = -1;
std::string to_string(const Expr& e, const std::vector<std::string>& var_names,
                      int decimals = 4);
// Variables rendered as x0, x1, ...
std::string to_string(const Expr& e, int decimals = 4);

// Constant folding, id collapse, affine composition and linear-term
// merging. With coeff_epsilon > 0 terms whose |coefficient| falls below it
// are dropped.
Expr simplify(const Expr& e, double coeff_epsilon = 0.0);

}  // namespace sympde
