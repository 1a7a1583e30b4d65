#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "sympde/bench.hpp"
#include "sympde/error.hpp"
#include "sympde/train.hpp"

using namespace sympde;

namespace {

TrainConfig small_config()
{
    TrainConfig c;
    c.restarts = 3;
    c.iterations = 60;
    c.sample_size = 100;
    c.validation_size = 100;
    c.seed = 5;
    c.threads = 1;
    c.curve_every = 10;
    return c;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b)
{
    return a.size() == b.size()
           && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

bool same_record(const RunRecord& a, const RunRecord& b)
{
    return a.seed == b.seed && bit_equal(a.parameters, b.parameters)
           && a.expression == b.expression && a.curve == b.curve
           && std::memcmp(&a.validation_loss, &b.validation_loss, sizeof(double)) == 0
           && a.diverged == b.diverged && a.iterations_run == b.iterations_run;
}

}  // namespace

TEST(Adam, ZeroGradientLeavesParametersAndDecaysMoments)
{
    std::vector<double> p{1.0, -2.0};
    AdamState s;
    s.m = {0.5, -0.5};
    s.v = {0.25, 0.25};
    s.step = 3;
    std::vector<double> zero(2, 0.0);
    std::vector<double> before = p;
    adam_step(p, zero, s, 0.01);
    EXPECT_NEAR(s.m[0], 0.45, 1e-15);
    EXPECT_NEAR(s.v[0], 0.25 * 0.999, 1e-15);
    // The bias-corrected momentum still moves parameters; with fresh state it does not.
    AdamState fresh;
    std::vector<double> q = before;
    adam_step(q, zero, fresh, 0.01);
    EXPECT_EQ(q, before);
    EXPECT_EQ(fresh.m, zero);
    EXPECT_EQ(fresh.v, zero);
}

TEST(Adam, StepBoundedByLearningRateUnderConstantGradient)
{
    std::vector<double> p{0.0};
    std::vector<double> g{3.7};
    AdamState s;
    const double lr = 0.01;
    for (int i = 0; i < 500; ++i)
    {
        const double before = p[0];
        adam_step(p, g, s, lr);
        const double step = before - p[0];
        EXPECT_GT(step, 0.0);
        EXPECT_LE(step, lr * (1.0 + 1e-6));
    }
    EXPECT_NEAR(p[0], -5.0, 1e-6);
}

TEST(Adam, FirstStepIsLearningRateTimesSign)
{
    std::vector<double> p{1.0, 1.0};
    std::vector<double> g{1e-3, -50.0};
    AdamState s;
    adam_step(p, g, s, 0.1);
    EXPECT_NEAR(p[0], 0.9, 1e-5);
    EXPECT_NEAR(p[1], 1.1, 1e-9);
}

TEST(Adam, Deterministic)
{
    std::vector<double> p1{0.3, -0.2}, p2 = p1;
    std::vector<double> g{0.7, 0.1};
    AdamState s1, s2;
    for (int i = 0; i < 10; ++i)
    {
        adam_step(p1, g, s1, 0.01);
        adam_step(p2, g, s2, 0.01);
    }
    EXPECT_TRUE(bit_equal(p1, p2));
}

TEST(Adam, SizeMismatchThrows)
{
    std::vector<double> p{1.0};
    std::vector<double> g{1.0, 2.0};
    AdamState s;
    EXPECT_THROW(adam_step(p, g, s, 0.1), DimensionMismatch);
}

TEST(GateFlip, DefaultBudgetFlipsAt1250)
{
    TrainConfig c;
    EXPECT_EQ(gate_flip_iteration(c), 1250);
    c.iterations = 3000;
    EXPECT_EQ(gate_flip_iteration(c), 750);
    c.iterations = 7;
    EXPECT_EQ(gate_flip_iteration(c), 2);
    c.soft_fraction = 0.0;
    EXPECT_EQ(gate_flip_iteration(c), 0);
    c.soft_fraction = 1.0;
    EXPECT_EQ(gate_flip_iteration(c), 7);
    c.soft_iterations = 3;
    EXPECT_EQ(gate_flip_iteration(c), 3);
}

TEST(Seeds, LanesAreDistinctAndStable)
{
    for (std::uint64_t seed : {0ull, 1ull, 42ull, 1ull << 40})
    {
        const auto a = lane_seed(seed, SeedLane::Init);
        const auto b = lane_seed(seed, SeedLane::Training);
        const auto c = lane_seed(seed, SeedLane::Validation);
        EXPECT_NE(a, b);
        EXPECT_NE(b, c);
        EXPECT_NE(a, c);
        EXPECT_EQ(a, lane_seed(seed, SeedLane::Init));
        EXPECT_NE(a, lane_seed(seed + 1, SeedLane::Init));
    }
    EXPECT_EQ(restart_seed(10, 3), 13u);
}

TEST(Config, ValidationRejectsOutOfRange)
{
    EXPECT_NO_THROW(TrainConfig{}.validate());
    auto bad = [](auto mutate) {
        TrainConfig c;
        mutate(c);
        return c;
    };
    EXPECT_THROW(bad([](TrainConfig& c) { c.restarts = 0; }).validate(), ConfigError);
    EXPECT_THROW(bad([](TrainConfig& c) { c.iterations = -1; }).validate(), ConfigError);
    EXPECT_THROW(bad([](TrainConfig& c) { c.soft_fraction = 1.5; }).validate(), ConfigError);
    EXPECT_THROW(bad([](TrainConfig& c) { c.soft_fraction = -0.1; }).validate(), ConfigError);
    EXPECT_THROW(bad([](TrainConfig& c) { c.sample_size = 0; }).validate(), ConfigError);
    EXPECT_THROW(bad([](TrainConfig& c) { c.learning_rate = 0.0; }).validate(), ConfigError);
    EXPECT_THROW(bad([](TrainConfig& c) { c.depth = 0; }).validate(), ConfigError);
    EXPECT_THROW(bad([](TrainConfig& c) { c.threads = -2; }).validate(), ConfigError);
}

TEST(TrainOnce, ZeroIterationsExtractsInitialModel)
{
    const Benchmark& b = get_benchmark("fp1");
    TrainConfig c = small_config();
    c.iterations = 0;
    MsflModel m = init_model(2, 2, OperatorLibrary::standard(), 77);
    RunRecord r = train_once(b.problem, m, c, 77);
    EXPECT_EQ(r.iterations_run, 0);
    EXPECT_TRUE(r.curve.empty());
    EXPECT_TRUE(std::ranges::equal(r.parameters, m.parameters()));
    m.set_gate_mode(GateMode::Discrete);
    EXPECT_EQ(r.expression, extract(m));
    EXPECT_TRUE(std::isfinite(r.validation_loss));
    EXPECT_GT(r.validation_loss, 0.0);
}

TEST(TrainOnce, SameSeedIsBitIdentical)
{
    const Benchmark& b = get_benchmark("heat");
    TrainConfig c = small_config();
    MsflModel m = init_model(2, 2, OperatorLibrary::standard(), 3);
    RunRecord a = train_once(b.problem, m, c, 3);
    RunRecord r = train_once(b.problem, m, c, 3);
    EXPECT_TRUE(same_record(a, r));
    c.engine = Engine::Tape;
    RunRecord t = train_once(b.problem, m, c, 3);
    EXPECT_EQ(t.iterations_run, a.iterations_run);
    EXPECT_NEAR(t.validation_loss, a.validation_loss, 1e-6 * a.validation_loss);
}

TEST(TrainOnce, CurveSampledAndLossDecreases)
{
    const Benchmark& b = get_benchmark("fp1");
    TrainConfig c = small_config();
    c.iterations = 300;
    c.curve_every = 100;
    MsflModel m = init_model(2, 2, OperatorLibrary::standard(), 1);
    RunRecord r = train_once(b.problem, m, c, 1);
    ASSERT_EQ(r.curve.size(), 3u);
    EXPECT_EQ(r.curve[0].first, 0);
    EXPECT_EQ(r.curve[2].first, 200);
    EXPECT_LT(r.curve[2].second, r.curve[0].second);
    EXPECT_EQ(r.gate_flip, 75);
}

TEST(TrainOnce, DimensionMismatchThrows)
{
    const Benchmark& b = get_benchmark("fp1");
    MsflModel m = init_model(2, 3, OperatorLibrary::standard(), 1);
    EXPECT_THROW(train_once(b.problem, m, small_config(), 1), DimensionMismatch);
}

TEST(TrainOnce, NonFiniteLossMarksDivergence)
{
    const Benchmark& b = get_benchmark("fp1");
    MsflModel m = init_model(1, 2, OperatorLibrary::standard(), 1);
    std::vector<double> p(m.parameters().begin(), m.parameters().end());
    p[0] = NAN;
    m.set_parameters(p);
    RunRecord r = train_once(b.problem, m, small_config(), 1);
    EXPECT_TRUE(r.diverged);
    EXPECT_EQ(r.iterations_run, 0);
    EXPECT_TRUE(std::isinf(r.validation_loss));
}

TEST(Solve, SingleRestartWinsByDefault)
{
    const Benchmark& b = get_benchmark("fp1");
    TrainConfig c = small_config();
    c.restarts = 1;
    SolutionReport rep = solve(b.problem, c);
    ASSERT_EQ(rep.runs.size(), 1u);
    EXPECT_EQ(rep.winner, 0u);
    EXPECT_EQ(rep.raw, rep.runs[0].expression);
    EXPECT_EQ(rep.validation_loss, rep.runs[0].validation_loss);
}

TEST(Solve, WinnerHasMinimumValidationLossAndRunsMatchTrainOnce)
{
    const Benchmark& b = get_benchmark("fp1");
    TrainConfig c = small_config();
    c.restarts = 4;
    SolutionReport rep = solve(b.problem, c);
    ASSERT_EQ(rep.runs.size(), 4u);
    for (const RunRecord& r : rep.runs)
        EXPECT_LE(rep.validation_loss, r.validation_loss);
    for (int i = 0; i < 4; ++i)
    {
        const RunRecord& r = rep.runs[i];
        EXPECT_EQ(r.restart, i);
        EXPECT_EQ(r.seed, restart_seed(c.seed, i));
        MsflModel m = init_model(2, 2, OperatorLibrary::standard(),
                                 lane_seed(r.seed, SeedLane::Init));
        EXPECT_TRUE(same_record(r, train_once(b.problem, m, c, r.seed)));
    }
    EXPECT_EQ(rep.simplified, simplify(rep.raw));
}

TEST(Solve, RestartThreadingDoesNotChangeResults)
{
    const Benchmark& b = get_benchmark("heat");
    TrainConfig c = small_config();
    c.restarts = 3;
    SolutionReport a = solve(b.problem, c);
    c.threads = 3;
    SolutionReport d = solve(b.problem, c);
    ASSERT_EQ(a.runs.size(), d.runs.size());
    for (std::size_t i = 0; i < a.runs.size(); ++i)
        EXPECT_TRUE(same_record(a.runs[i], d.runs[i]));
    EXPECT_EQ(a.winner, d.winner);
}

TEST(Solve, InvalidConfigThrows)
{
    TrainConfig c = small_config();
    c.restarts = 0;
    EXPECT_THROW(solve(get_benchmark("fp1").problem, c), ConfigError);
}

TEST(Solve, DepthResolution)
{
    TrainConfig c;
    EXPECT_EQ(resolved_depth(c, get_benchmark("fp1").problem), 2);
    EXPECT_EQ(resolved_depth(c, get_benchmark("wave").problem), 3);
    c.depth = 4;
    EXPECT_EQ(resolved_depth(c, get_benchmark("fp1").problem), 4);
}
