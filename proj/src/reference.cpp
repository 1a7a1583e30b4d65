#include "sympde/kernel.hpp"

namespace sympde {

LossEvaluation reference_loss(const PdeProblem& problem, const MsflModel& model,
                              const Points& batch, double epsilon, bool with_gradient)
{
    LossEvaluation out;
    if (!with_gradient)
    {
        auto params = model.parameters();
        std::vector<double> gates = compute_gates(model, params, model.gate_mode());
        std::vector<double> scratch;
        auto f = [&](std::span<const double> x) {
            return forward<double>(model, params, gates, x, scratch);
        };
        out.l1 = l1_loss<double>(f, problem, batch, epsilon);
        out.l2 = l2_loss<double>(f, problem, epsilon);
        out.total = out.l1 + problem.lambda() * out.l2;
        return out;
    }

    Tape tape;
    std::vector<Value> params;
    params.reserve(model.parameter_count());
    for (double p : model.parameters())
        params.push_back(tape.variable(p));
    std::vector<Value> gates =
        compute_gates(model, std::span<const Value>(params), model.gate_mode());
    std::vector<Value> scratch;
    auto f = [&](std::span<const double> x) {
        return forward<Value>(model, params, gates, x, scratch);
    };
    Value l1 = l1_loss<Value>(f, problem, batch, epsilon);
    Value l2 = l2_loss<Value>(f, problem, epsilon);
    Value total = l1 + Value(problem.lambda()) * l2;
    Gradient grad = tape.backward(total);

    out.l1 = l1.primal();
    out.l2 = l2.primal();
    out.total = total.primal();
    out.gradient.reserve(params.size());
    for (const Value& p : params)
        out.gradient.push_back(grad[p]);
    return out;
}

}  // namespace sympde
