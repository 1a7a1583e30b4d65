#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sympde/bench.hpp"
#include "sympde/error.hpp"

using namespace sympde;

namespace {

const std::vector<std::string> kXT{"x", "t"};
const std::vector<std::string> kFpSlots{"u", "u_x", "u_xx", "u_t"};

Expr xt(const std::string& src) { return parse(src, kXT, {}); }

// Compares two residuals at random points and random slot values.
void expect_same_residual(const Expr& got, const Expr& want)
{
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    for (int i = 0; i < 50; ++i)
    {
        std::vector<double> x{d(rng), d(rng)};
        SlotValues s;
        for (const auto& name : kFpSlots)
            s[name] = d(rng);
        const double w = eval(want, x, &s);
        EXPECT_NEAR(eval(got, x, &s), w, 1e-12 * std::max(1.0, std::abs(w)))
            << to_string(got, kXT);
    }
}

double loss_at_report_settings(const Benchmark& b, const Expr& e)
{
    PdeProblem p = b.problem.with(1.0, 1e-3);
    Points batch = sample_domain(p, 1000, 0);
    return evaluate_losses(e, p, batch, 1e-3).total;
}

}  // namespace

TEST(Registry, NamesAndLookup)
{
    EXPECT_EQ(benchmark_names(), (std::vector<std::string>{"wave", "heat", "fp1", "fp2", "fp3"}));
    EXPECT_THROW(get_benchmark("burgers"), UnknownBenchmark);
    for (const auto& n : benchmark_names())
        EXPECT_EQ(get_benchmark(n).name, n);
}

TEST(Registry, ExactSolutions)
{
    EXPECT_EQ(get_benchmark("wave").exact, xt("sin(x)*sin(t)"));
    EXPECT_EQ(get_benchmark("heat").exact, xt("exp(-t)*sin(x)"));
    EXPECT_EQ(get_benchmark("fp1").exact, xt("x + t"));
    EXPECT_EQ(get_benchmark("fp2").exact, xt("x*exp(t)"));
    EXPECT_EQ(get_benchmark("fp3").exact, xt("(x + 1)*exp(t)"));
}

TEST(Registry, ExactSolutionsScoreBelowOneInAMillion)
{
    for (const auto& n : benchmark_names())
    {
        const Benchmark& b = get_benchmark(n);
        EXPECT_LT(loss_at_report_settings(b, b.exact), 1e-6) << n;
    }
}

TEST(Registry, ReportedSolutionsScoreBelowOneInAHundred)
{
    for (const auto& n : benchmark_names())
    {
        const Benchmark& b = get_benchmark(n);
        EXPECT_LT(loss_at_report_settings(b, b.reported), 1e-2) << n;
    }
}

TEST(Registry, ReportedSolutionsAreVerbatim)
{
    EXPECT_EQ(get_benchmark("wave").reported_source, "1.0002*sin(1.000*x)*sin(0.9998*t)");
    EXPECT_EQ(get_benchmark("fp1").reported_source, "1.0001*x + 1.0001*t");
    EXPECT_EQ(get_benchmark("fp2").reported_source,
              "(0.972*x - 0.001*t + 0.002)*exp(1.024*t) + 0.029*x - 0.002");
}

TEST(Registry, WaveHasDerivativeInitialCondition)
{
    const PdeProblem& p = get_benchmark("wave").problem;
    ASSERT_EQ(p.constraints().size(), 4u);
    int derivative = 0;
    for (const auto& c : p.constraints())
    {
        EXPECT_EQ(c.points.size(), 100u);
        if (c.kind == Constraint::Kind::Derivative)
        {
            ++derivative;
            EXPECT_EQ(c.slot->name, "u_t");
        }
    }
    EXPECT_EQ(derivative, 1);
}

TEST(Registry, FokkerPlanckDomainsAndDepths)
{
    for (const char* n : {"fp1", "fp2", "fp3"})
    {
        const Benchmark& b = get_benchmark(n);
        EXPECT_EQ(b.problem.lower(0), 0.0);
        EXPECT_EQ(b.problem.upper(1), 1.0);
        EXPECT_EQ(b.problem.constraints().size(), 1u);
    }
    EXPECT_EQ(get_benchmark("fp1").depth, 2);
    EXPECT_EQ(get_benchmark("wave").depth, 3);
}

TEST(ReportedAccuracy, CoefficientDeviation)
{
    EXPECT_NEAR(reported_accuracy("fp1"), 0.0001, 1e-12);
    EXPECT_NEAR(reported_accuracy("wave"), 0.0002, 1e-12);
    EXPECT_NEAR(reported_accuracy("fp3"), 0.134, 1e-12);
    EXPECT_THROW(reported_accuracy("nope"), UnknownBenchmark);
}

TEST(FpExpand, ConstantDriftAndDiffusion)
{
    FpCoefficients c{xt("-1"), xt("1"), xt("x"), FpCoefficients::Direction::Forward};
    expect_same_residual(fp_expand(c), parse("u_t - (u_x + u_xx)", kXT, kFpSlots));
}

TEST(FpExpand, LinearDriftQuadraticDiffusion)
{
    FpCoefficients c{xt("x"), xt("x^2/2"), xt("x"), FpCoefficients::Direction::Forward};
    expect_same_residual(fp_expand(c),
                         parse("u_t - (0*u + x*u_x + (x^2/2)*u_xx)", kXT, kFpSlots));
}

TEST(FpExpand, BackwardNeedsNoDerivatives)
{
    FpCoefficients c{xt("-(x + 1)"), xt("x^2*exp(t)"), xt("x + 1"),
                     FpCoefficients::Direction::Backward};
    expect_same_residual(fp_expand(c),
                         parse("u_t - ((x + 1)*u_x + x^2*exp(t)*u_xx)", kXT, kFpSlots));
}

TEST(FpExpand, GeneralForwardFormAgainstHandDerivatives)
{
    // A = sin(x t), B = exp(x) x: A_x = t cos(x t), B_x = (1 + x) e^x, B_xx = (2 + x) e^x.
    FpCoefficients c{xt("sin(x*t)"), xt("exp(x)*x"), xt("x"),
                     FpCoefficients::Direction::Forward};
    Expr want = parse(
        "u_t - (((2 + x)*exp(x) - t*sin(x*t + 1.5707963267948966))*u"
        " + (2*(1 + x)*exp(x) - sin(x*t))*u_x + exp(x)*x*u_xx)",
        kXT, kFpSlots);
    expect_same_residual(fp_expand(c), want);
}

TEST(FpExpand, UnsupportedNodeThrows)
{
    FpCoefficients c{xt("abs(x)"), xt("1"), xt("x"), FpCoefficients::Direction::Forward};
    EXPECT_THROW(fp_expand(c), UnsupportedDerivative);
}

TEST(Differentiate, AgreesWithCentralDifferences)
{
    const std::vector<std::string> funcs{"x^3*t - 2*x", "sin(2*x + t)*exp(-t)",
                                         "x/(1 + t^2)", "exp(sin(x*t))", "(x + 1)*exp(t)"};
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (const auto& src : funcs)
    {
        Expr f = xt(src);
        for (std::size_t var : {0u, 1u})
        {
            Expr df = differentiate(f, var);
            for (int i = 0; i < 20; ++i)
            {
                std::vector<double> x{d(rng), d(rng)};
                std::vector<double> lo = x, hi = x;
                const double h = 1e-6;
                lo[var] -= h;
                hi[var] += h;
                const double fd = (eval(f, hi) - eval(f, lo)) / (2 * h);
                EXPECT_NEAR(eval(df, x), fd, 1e-6 * std::max(1.0, std::abs(fd))) << src;
            }
        }
    }
}

TEST(Differentiate, SlotsAreUnsupported)
{
    EXPECT_THROW(differentiate(Expr::slot("u"), 0), UnsupportedDerivative);
    EXPECT_THROW(differentiate(Expr::unary(OpId::Sqrt, Expr::var(0)), 0), UnsupportedDerivative);
}
