#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sympde/error.hpp"
#include "sympde/msfl.hpp"

using namespace sympde;

namespace {

const OperatorLibrary kLib = OperatorLibrary::standard();
constexpr std::size_t kId = 0, kSin = 1, kMul = 3;

// Sets node `ordinal` to a sharp gate on `op` with scale 1 and bias 0.
void wire_node(MsflModel& m, std::size_t ordinal, std::size_t op)
{
    auto p = m.parameters();
    const std::size_t k = m.library().size();
    for (std::size_t j = 0; j < k; ++j)
        p[m.node_offset(ordinal) + j] = j == op ? 5.0 : 0.0;
    p[m.node_offset(ordinal) + k] = 1.0;
    p[m.node_offset(ordinal) + k + 1] = 0.0;
}

void wire_leaf(MsflModel& m, std::size_t leaf, std::vector<double> w, double b)
{
    auto p = m.parameters();
    for (std::size_t j = 0; j < w.size(); ++j)
        p[m.leaf_offset(leaf) + j] = w[j];
    p[m.leaf_offset(leaf) + w.size()] = b;
}

MsflModel product_model(std::size_t root_op)
{
    MsflModel m(1, 2, kLib);
    wire_leaf(m, 0, {1.0, 0.0}, 0.0);
    wire_leaf(m, 1, {0.0, 1.0}, 0.0);
    wire_node(m, 0, root_op);
    m.set_gate_mode(GateMode::Discrete);
    return m;
}

}  // namespace

TEST(Operate, StandardLibraryAtOneTwo)
{
    auto p = operate(kLib, 1.0, 2.0);
    ASSERT_EQ(p.size(), 4u);
    EXPECT_EQ(p[0], 3.0);
    EXPECT_EQ(p[1], std::sin(3.0));
    EXPECT_EQ(p[2], std::exp(3.0));
    EXPECT_EQ(p[3], 2.0);
}

TEST(Operate, ZeroAndCancellingInputs)
{
    EXPECT_EQ(operate(kLib, 0.0, 0.0), (std::vector<double>{0.0, 0.0, 1.0, 0.0}));
    EXPECT_EQ(operate(kLib, -1.0, 1.0), (std::vector<double>{0.0, 0.0, 1.0, -1.0}));
}

TEST(Operate, ExpIsClampedAndSqrtIsGuarded)
{
    OperatorLibrary lib{{OpId::Id, OpId::Exp, OpId::Sqrt}, {}};
    auto p = operate(lib, 500.0, 0.0);
    EXPECT_EQ(p[1], std::exp(40.0));
    auto q = operate(lib, -3.0, -1.0);
    EXPECT_EQ(q[2], 2.0);
}

TEST(Softmax, Uniform)
{
    std::vector<double> w(4, 0.0);
    for (double v : softmax<double>(w))
        EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(Softmax, OneHotLogit)
{
    std::vector<double> w{1.0, 0.0, 0.0, 0.0};
    auto s = softmax<double>(w);
    const double e = std::numbers::e;
    EXPECT_NEAR(s[0], e / (e + 3.0), 1e-15);
    for (int i = 1; i < 4; ++i)
        EXPECT_NEAR(s[i], 1.0 / (e + 3.0), 1e-15);
    EXPECT_NEAR(s[0], 0.4754, 5e-5);
    EXPECT_NEAR(s[1], 0.1749, 5e-5);
}

TEST(Softmax, LargeLogitsStayFinite)
{
    std::vector<double> w{1000.0, 999.0, -1000.0, 0.0};
    auto s = softmax<double>(w);
    EXPECT_NEAR(s[0] + s[1] + s[2] + s[3], 1.0, 1e-12);
    EXPECT_NEAR(s[1] / s[0], std::exp(-1.0), 1e-12);
}

TEST(Softmax, SumsToOneAndPreservesArgmax)
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> d(-5.0, 5.0);
    for (int trial = 0; trial < 1000; ++trial)
    {
        std::vector<double> w{d(rng), d(rng), d(rng), d(rng)};
        auto s = softmax<double>(w);
        double sum = 0.0;
        for (double v : s)
        {
            EXPECT_GT(v, 0.0);
            sum += v;
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
        EXPECT_EQ(argmax<double>(s), argmax<double>(w));
        EXPECT_EQ(argmax<double>(discrete_softmax<double>(w)), argmax<double>(w));
    }
}

TEST(DiscreteSoftmax, SharpWinner)
{
    std::vector<double> w{5.0, 0.0, 0.0, 0.0};
    auto s = discrete_softmax<double>(w);
    EXPECT_EQ(s[0], 1.0);
    for (int i = 1; i < 4; ++i)
        EXPECT_LT(s[i], 1e-300);
}

TEST(DiscreteSoftmax, TiesKeepLowestIndex)
{
    std::vector<double> w(4, 0.0);
    EXPECT_EQ(discrete_softmax<double>(w), (std::vector<double>{1.0, 0.0, 0.0, 0.0}));
    std::vector<double> w2{0.0, 2.0, 2.0, 1.0};
    auto s = discrete_softmax<double>(w2);
    EXPECT_EQ(s[1], 1.0);
    EXPECT_EQ(s[2], 0.0);
}

TEST(DiscreteSoftmax, OffEntriesAreHumpOfRatio)
{
    std::vector<double> w{0.1, 0.05, -0.02, 0.0};
    auto s = softmax<double>(w);
    auto d = discrete_softmax<double>(w);
    for (int i = 1; i < 4; ++i)
    {
        const double r = s[i] / s[0];
        EXPECT_DOUBLE_EQ(d[i], std::exp(-1000.0 * (r - 1.0) * (r - 1.0)));
    }
}

TEST(Forward, HandWiredProduct)
{
    MsflModel m = product_model(kMul);
    EXPECT_DOUBLE_EQ(forward(m, std::vector<double>{3.0, 4.0}), 12.0);
}

TEST(Forward, HandWiredSum)
{
    MsflModel m = product_model(kId);
    EXPECT_DOUBLE_EQ(forward(m, std::vector<double>{3.0, 4.0}), 7.0);
}

TEST(Forward, HandWiredSinProduct)
{
    MsflModel m(2, 2, kLib);
    wire_leaf(m, 0, {1.0, 0.0}, 0.0);
    wire_leaf(m, 1, {0.0, 0.0}, 0.0);
    wire_leaf(m, 2, {0.0, 1.0}, 0.0);
    wire_leaf(m, 3, {0.0, 0.0}, 0.0);
    wire_node(m, 0, kSin);
    wire_node(m, 1, kSin);
    wire_node(m, 2, kMul);
    m.set_gate_mode(GateMode::Discrete);
    const double h = std::numbers::pi / 2;
    EXPECT_NEAR(forward(m, std::vector<double>{h, h}), 1.0, 1e-15);
}

TEST(Forward, WrongDimensionThrows)
{
    MsflModel m = product_model(kMul);
    EXPECT_THROW(forward(m, std::vector<double>{1.0}), DimensionMismatch);
}

TEST(Forward, TapeMatchesPlainAndRecordsEveryParameter)
{
    MsflModel m = init_model(3, 2, kLib, 4);
    std::vector<double> x{0.4, -0.3};
    for (GateMode mode : {GateMode::Soft, GateMode::Discrete})
    {
        m.set_gate_mode(mode);
        Tape tape;
        std::vector<Value> params;
        Value y = forward(m, x, tape, &params);
        EXPECT_EQ(y.primal(), forward(m, x));
        EXPECT_EQ(params.size(), m.parameter_count());
    }
}

TEST(Forward, SoftModeGradientMatchesCentralDifferences)
{
    std::vector<double> x{0.7, 0.2};
    for (std::uint64_t seed = 0; seed < 10; ++seed)
    {
        MsflModel m = init_model(2, 2, kLib, seed);
        auto f = [&](std::span<const Value> theta) {
            std::vector<Value> gates = compute_gates(m, theta, GateMode::Soft);
            std::vector<Value> scratch;
            return forward<Value>(m, theta, gates, x, scratch);
        };
        EXPECT_LT(grad_check(f, m.parameters(), 1e-5), 1e-4);
    }
}

TEST(Extract, ProductModelIsMonomial)
{
    MsflModel m = product_model(kMul);
    EXPECT_EQ(to_string(simplify(extract(m))), "x0*x1");
}

TEST(Extract, ZeroLeafWeightsGiveConstant)
{
    MsflModel m = init_model(2, 2, kLib, 3);
    for (std::size_t i = 0; i < m.leaf_count(); ++i)
        wire_leaf(m, i, {0.0, 0.0}, 0.1 * static_cast<double>(i));
    for (std::size_t n = 0; n < m.node_count(); ++n)
        wire_node(m, n, n);
    Expr e = simplify(extract(m));
    ASSERT_TRUE(e.is_const());
    m.set_gate_mode(GateMode::Discrete);
    EXPECT_NEAR(e.value(), forward(m, std::vector<double>{0.5, 0.5}), 1e-9);
}

TEST(Extract, AgreesWithDiscreteForwardUnderMargin)
{
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial)
    {
        MsflModel m = init_model(1 + trial % 3, 2, kLib, 1000 + trial);
        for (std::size_t n = 0; n < m.node_count(); ++n)
            wire_node(m, n, rng() % kLib.size());
        m.set_gate_mode(GateMode::Discrete);
        Expr e = extract(m);
        for (int i = 0; i < 100; ++i)
        {
            std::vector<double> x{u(rng), u(rng)};
            const double a = forward(m, x);
            EXPECT_LE(std::abs(a - eval(e, x)), 1e-9 * std::max(1.0, std::abs(a)));
        }
    }
}

TEST(Init, DeterministicPerSeed)
{
    MsflModel a = init_model(2, 2, kLib, 7);
    MsflModel b = init_model(2, 2, kLib, 7);
    MsflModel c = init_model(2, 2, kLib, 8);
    EXPECT_TRUE(std::ranges::equal(a.parameters(), b.parameters()));
    EXPECT_FALSE(std::ranges::equal(a.parameters(), c.parameters()));
}

TEST(Init, Shapes)
{
    MsflModel small = init_model(1, 1, kLib, 0);
    EXPECT_EQ(small.leaf_count(), 2u);
    EXPECT_EQ(small.node_count(), 1u);
    EXPECT_EQ(small.parameter_count(), 10u);

    MsflModel big = init_model(3, 2, kLib, 0);
    EXPECT_EQ(big.leaf_count(), 8u);
    EXPECT_EQ(big.node_count(), 7u);
}

TEST(Init, ParameterCountFormula)
{
    for (int m = 1; m <= 5; ++m)
    {
        for (int d = 1; d <= 3; ++d)
        {
            const std::size_t leaves = std::size_t{1} << m;
            const std::size_t expect = leaves * (d + 1) + (leaves - 1) * (kLib.size() + 2);
            EXPECT_EQ(init_model(m, d, kLib, 0).parameter_count(), expect);
            EXPECT_EQ(MsflModel::parameter_count(m, d, kLib.size()), expect);
        }
    }
}

TEST(Init, Distributions)
{
    MsflModel m = init_model(4, 2, kLib, 12);
    auto p = m.parameters();
    const std::size_t k = kLib.size();
    for (std::size_t i = 0; i < m.leaf_count(); ++i)
    {
        EXPECT_GE(p[m.leaf_offset(i)], -1.0);
        EXPECT_LT(p[m.leaf_offset(i)], 1.0);
        EXPECT_EQ(p[m.leaf_offset(i) + 2], 0.0);
    }
    for (std::size_t n = 0; n < m.node_count(); ++n)
    {
        for (std::size_t j = 0; j < k; ++j)
            EXPECT_LE(std::abs(p[m.node_offset(n) + j]), 0.1);
        EXPECT_EQ(p[m.node_offset(n) + k], 1.0);
        EXPECT_EQ(p[m.node_offset(n) + k + 1], 0.0);
    }
}

TEST(Library, ValidateRejectsMisplacedOperators)
{
    EXPECT_NO_THROW(kLib.validate());
    OperatorLibrary no_id{{OpId::Sin}, {OpId::Mul}};
    EXPECT_THROW(no_id.validate(), std::invalid_argument);
    OperatorLibrary wrong_arity{{OpId::Id, OpId::Mul}, {}};
    EXPECT_THROW(wrong_arity.validate(), std::invalid_argument);
}
