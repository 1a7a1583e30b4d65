#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "sympde/msfl.hpp"
#include "sympde/pde.hpp"

namespace sympde {

struct LossEvaluation
{
    double l1 = 0.0;
    double l2 = 0.0;
    double total = 0.0;
    // d total / d parameters, empty unless requested.
    std::vector<double> gradient;
};

// Batched total loss and its parameter gradient for an MSFL model.
//
// Forward and reverse sweeps are hand-derived per sample point and run in
// parallel over fixed-size blocks; block partials are summed in block order,
// so the result does not depend on the thread count. The tape-based
// reference_loss computes the same quantity serially.
class LossKernel
{
  public:
    static constexpr std::size_t kBlockSize = 64;

    // threads = 0 uses the OpenMP default.
    LossKernel(PdeProblem problem, Points batch, double epsilon, int threads = 0);

    LossEvaluation evaluate(const MsflModel& model, bool with_gradient) const;

    const PdeProblem& problem() const { return problem_; }
    const Points& batch() const { return batch_; }
    double epsilon() const { return eps_; }

  private:
    struct Block
    {
        // npos for the interior batch, else the constraint index.
        std::size_t constraint;
        std::size_t begin;
        std::size_t end;
    };
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    PdeProblem problem_;
    Points batch_;
    double eps_;
    int threads_;
    StencilPlan residual_plan_;
    std::vector<std::optional<StencilPlan>> constraint_plans_;
    std::vector<Block> blocks_;
};

// Serial reference: the same loss recorded on a Tape (gradient by reverse
// accumulation) or evaluated on plain doubles when no gradient is needed.
LossEvaluation reference_loss(const PdeProblem& problem, const MsflModel& model,
                              const Points& batch, double epsilon, bool with_gradient);

}  // namespace sympde
