#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "sympde/error.hpp"
#include "sympde/tape.hpp"

using namespace sympde;

TEST(Record, MulStoresBothPartials)
{
    Tape tape;
    Value a = tape.variable(3.0);
    Value b = tape.variable(4.0);
    Value c = tape.record(Tape::Op::Mul, {a, b});
    EXPECT_EQ(c.primal(), 12.0);
    auto p = tape.partials(c.index());
    ASSERT_EQ(p.size(), 2u);
    EXPECT_EQ(p[0], 4.0);
    EXPECT_EQ(p[1], 3.0);
}

TEST(Record, HumpPeak)
{
    Tape tape;
    Value h = tape.record(Tape::Op::Hump, {tape.variable(1.0)});
    EXPECT_EQ(h.primal(), 1.0);
    EXPECT_EQ(tape.partials(h.index())[0], 0.0);
}

TEST(Record, HumpAtSoftmaxRatioOfOneOverE)
{
    Tape tape;
    const double x = 0.3679;
    Value h = tape.record(Tape::Op::Hump, {tape.variable(x)});
    const double expect = std::exp(-1000.0 * (x - 1.0) * (x - 1.0));
    EXPECT_DOUBLE_EQ(h.primal(), expect);
    EXPECT_LT(h.primal(), 1e-170);
    EXPECT_DOUBLE_EQ(tape.partials(h.index())[0], -2000.0 * (x - 1.0) * expect);
}

TEST(Record, AbsGuardAndClampPartials)
{
    Tape tape;
    Value neg = tape.record(Tape::Op::AbsGuard, {tape.variable(-2.0)});
    Value zero = tape.record(Tape::Op::AbsGuard, {tape.variable(0.0)});
    EXPECT_EQ(neg.primal(), 2.0);
    EXPECT_EQ(tape.partials(neg.index())[0], -1.0);
    EXPECT_EQ(tape.partials(zero.index())[0], 1.0);

    Value inside = tape.record(Tape::Op::Clamp, {tape.variable(0.5)}, -1.0, 1.0);
    Value above = tape.record(Tape::Op::Clamp, {tape.variable(3.0)}, -1.0, 1.0);
    EXPECT_EQ(tape.partials(inside.index())[0], 1.0);
    EXPECT_EQ(above.primal(), 1.0);
    EXPECT_EQ(tape.partials(above.index())[0], 0.0);
}

TEST(Record, MixedTapesThrow)
{
    Tape t1, t2;
    Value a = t1.variable(1.0);
    Value b = t2.variable(2.0);
    EXPECT_THROW(a + b, TapeMismatch);
    EXPECT_THROW(t1.record(Tape::Op::Mul, {a, b}), TapeMismatch);
}

TEST(Record, ParentsPrecedeChildren)
{
    Tape tape;
    Value x = tape.variable(0.7);
    Value y = op_sin(x) * op_exp(x) + x / (x + Value(1.0));
    (void)y;
    for (std::size_t i = 0; i < tape.size(); ++i)
    {
        for (auto p : tape.parents(i))
            EXPECT_LT(p, i);
    }
}

TEST(Backward, Square)
{
    Tape tape;
    Value x = tape.variable(3.0);
    Gradient g = tape.backward(x * x);
    EXPECT_EQ(g[x], 6.0);
}

TEST(Backward, SinTimesExpAtZero)
{
    Tape tape;
    Value x = tape.variable(0.0);
    Gradient g = tape.backward(op_sin(x) * op_exp(x));
    EXPECT_DOUBLE_EQ(g[x], 1.0);
}

TEST(Backward, HumpAtPeak)
{
    Tape tape;
    Value x = tape.variable(1.0);
    EXPECT_EQ(tape.backward(op_hump(x))[x], 0.0);
}

TEST(Backward, SelfGradientIsOneAndUnusedLeavesAreZero)
{
    Tape tape;
    Value x = tape.variable(2.0);
    Value unused = tape.variable(5.0);
    Value loss = op_square(x);
    Gradient g = tape.backward(loss);
    EXPECT_EQ(g[loss], 1.0);
    EXPECT_EQ(g[unused], 0.0);
    EXPECT_EQ(g[Value(3.0)], 0.0);
}

TEST(Backward, MaxRoutesToFirstArgmax)
{
    Tape tape;
    Value a = tape.variable(2.0);
    Value b = tape.variable(5.0);
    Value c = tape.variable(5.0);
    std::vector<Value> xs{a, b, c};
    Gradient g = tape.backward(op_max(xs));
    EXPECT_EQ(g[a], 0.0);
    EXPECT_EQ(g[b], 1.0);
    EXPECT_EQ(g[c], 0.0);
}

TEST(GradCheck, BilinearIsExact)
{
    auto f = [](std::span<const Value> th) { return th[0] * th[1]; };
    std::vector<double> theta{2.0, 3.0};
    EXPECT_LT(grad_check(f, theta, 1e-5), 1e-8);
}

TEST(GradCheck, AbsGuardAwayFromZero)
{
    auto f = [](std::span<const Value> th) { return op_abs_guard(th[0]); };
    std::vector<double> theta{0.5};
    EXPECT_LT(grad_check(f, theta, 1e-5), 1e-10);
}

TEST(GradCheck, CompositeOfEveryOp)
{
    auto f = [](std::span<const Value> th) {
        Value a = op_sin(th[0]) * op_exp(op_clamp(th[1], -40.0, 40.0));
        Value b = op_sqrt(op_abs_guard(th[2])) / (op_square(th[0]) + Value(1.0));
        std::vector<Value> xs{a, b, th[3]};
        return op_max(xs) + op_hump(th[3] / Value(2.0)) - a * b;
    };
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    for (int i = 0; i < 10; ++i)
    {
        std::vector<double> theta{d(rng), d(rng), d(rng) + 3.0, d(rng)};
        EXPECT_LT(grad_check(f, theta, 1e-5), 1e-4);
    }
}

TEST(Clamp, PerturbingClampedInputLeavesLossUnchanged)
{
    auto loss = [](double v) {
        return op_square(op_exp(op_clamp(Value(v), -40.0, 40.0))).primal();
    };
    EXPECT_EQ(loss(50.0), loss(50.0 + 1e-3));
    Tape tape;
    Value x = tape.variable(50.0);
    EXPECT_EQ(tape.backward(op_exp(op_clamp(x, -40.0, 40.0)))[x], 0.0);
}

TEST(Replay, IdenticalRecordingsAreBitIdentical)
{
    auto run = [] {
        Tape tape;
        std::vector<Value> p;
        for (double v : {0.3, -1.2, 2.5})
            p.push_back(tape.variable(v));
        Value y = op_sin(p[0] * p[1]) + op_exp(p[2]) / (op_square(p[0]) + Value(1.0));
        Gradient g = tape.backward(y);
        std::vector<double> out{y.primal()};
        for (const Value& v : p)
            out.push_back(g[v]);
        return out;
    };
    auto a = run();
    auto b = run();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        EXPECT_EQ(std::memcmp(&a[i], &b[i], sizeof(double)), 0);
}

TEST(Value, ConstantsNeverTouchATape)
{
    Value c = Value(2.0) * Value(3.0) + op_sin(Value(0.0));
    EXPECT_TRUE(c.is_constant());
    EXPECT_EQ(c.primal(), 6.0);
}
