// Times one loss-and-gradient evaluation of the batched kernel against the
// serial tape reference on every built-in benchmark.
//
//   bench_loss [points] [repeats]

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "sympde/bench.hpp"
#include "sympde/kernel.hpp"
#include "sympde/train.hpp"

using namespace sympde;

template <class F>
double seconds_per_call(F&& f, int repeats)
{
    f();
    auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < repeats; ++i)
        f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()
           / repeats;
}

int main(int argc, char** argv)
{
    const std::size_t points = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 2000;
    const int repeats = argc > 2 ? std::atoi(argv[2]) : 5;
    const int cores = omp_get_num_procs();

    std::printf("%-6s %8s %12s %12s %12s %9s %9s %10s\n", "bench", "points", "tape[ms]",
                "kernel1[ms]", "kernelN[ms]", "x(1)", "x(N)", "rel|dg|");
    for (const std::string& name : benchmark_names())
    {
        const Benchmark& b = get_benchmark(name);
        const PdeProblem& p = b.problem;
        Points batch = sample_domain(p, points, 1);
        MsflModel model = init_model(b.depth, static_cast<int>(p.dims()),
                                     OperatorLibrary::standard(), 3);

        LossEvaluation ref;
        double t_ref = seconds_per_call(
            [&] { ref = reference_loss(p, model, batch, p.epsilon(), true); }, repeats);

        LossKernel serial(p, batch, p.epsilon(), 1);
        LossKernel parallel(p, batch, p.epsilon(), cores);
        LossEvaluation ker;
        double t_one = seconds_per_call([&] { ker = serial.evaluate(model, true); }, repeats);
        double t_all = seconds_per_call([&] { ker = parallel.evaluate(model, true); }, repeats);

        double diff = 0.0;
        double scale = 0.0;
        for (std::size_t i = 0; i < ref.gradient.size(); ++i)
        {
            diff = std::max(diff, std::abs(ref.gradient[i] - ker.gradient[i]));
            scale = std::max(scale, std::abs(ref.gradient[i]));
        }
        diff /= std::max(scale, 1e-300);

        std::printf("%-6s %8zu %12.3f %12.3f %12.3f %9.1f %9.1f %10.2e\n", name.c_str(), points,
                    1e3 * t_ref, 1e3 * t_one, 1e3 * t_all, t_ref / t_one, t_ref / t_all, diff);
    }
    std::printf("cores: %d\n", cores);
    return 0;
}
