#include "sympde/grid.hpp"

#include <charconv>
#include <cstdio>

#include "sympde/error.hpp"

namespace sympde {
namespace {

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void require_plane(const PdeProblem& problem)
{
    if (problem.dims() != 2)
        throw ConfigError("grid export needs exactly two variables, problem has "
                          + std::to_string(problem.dims()));
}

double axis_value(const PdeProblem& problem, std::size_t axis, std::size_t i, std::size_t n)
{
    const double lo = problem.lower(axis);
    const double hi = problem.upper(axis);
    return i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

template <class Cell>
void write_grid(std::ostream& out, const PdeProblem& problem, Resolution res, const char* column,
                Cell&& cell)
{
    require_plane(problem);
    out << problem.variables()[0] << ',' << problem.variables()[1] << ',' << column << '\n';
    std::vector<double> x(2);
    for (std::size_t i = 0; i < res.rows; ++i)
    {
        x[0] = axis_value(problem, 0, i, res.rows);
        for (std::size_t j = 0; j < res.cols; ++j)
        {
            x[1] = axis_value(problem, 1, j, res.cols);
            out << num(x[0]) << ',' << num(x[1]) << ',' << num(cell(x)) << '\n';
        }
    }
}

}  // namespace

Resolution parse_resolution(const std::string& text)
{
    const auto sep = text.find('x');
    Resolution res;
    auto parse_part = [&](std::string_view part, std::size_t& value) {
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
        return ec == std::errc() && ptr == part.data() + part.size() && !part.empty();
    };
    if (sep == std::string::npos
        || !parse_part(std::string_view(text).substr(0, sep), res.rows)
        || !parse_part(std::string_view(text).substr(sep + 1), res.cols))
        throw ConfigError("resolution must look like RxC, got '" + text + "'");
    if (res.rows < 2 || res.cols < 2)
        throw ConfigError("resolution needs at least 2 samples per axis");
    return res;
}

void write_solution_grid(std::ostream& out, const PlainFunction& f, const PdeProblem& problem,
                         Resolution res)
{
    write_grid(out, problem, res, "f", [&](std::span<const double> x) { return f(x); });
}

void write_residual_grid(std::ostream& out, const PlainFunction& f, const PdeProblem& problem,
                         Resolution res, double epsilon)
{
    StencilPlan plan(problem.residual_slots(), problem.dims(), epsilon);
    std::vector<double> fv(plan.offset_count());
    std::vector<double> slots(plan.slot_count());
    std::vector<double> pt(problem.dims());
    std::vector<double> scratch;
    write_grid(out, problem, res, "g", [&](std::span<const double> x) {
        for (std::size_t i = 0; i < plan.offset_count(); ++i)
        {
            plan.shifted(x, i, pt);
            fv[i] = f(pt);
        }
        plan.combine<double>(fv, slots);
        return problem.compiled_residual().evaluate<double>(x, slots, scratch);
    });
}

void write_boundary_fit(std::ostream& out, const PlainFunction& f, const PdeProblem& problem,
                        double epsilon)
{
    out << "constraint_id,coord,target,actual\n";
    const auto& cons = problem.constraints();
    for (std::size_t c = 0; c < cons.size(); ++c)
    {
        const Constraint& con = cons[c];
        for (std::size_t n = 0; n < con.points.size(); ++n)
        {
            auto x = con.points[n];
            double actual = con.kind == Constraint::Kind::Derivative
                                ? fd_slots(f, x, {*con.slot}, epsilon).at(con.slot->name)
                                : f(x);
            double coord = con.free_axis ? x[*con.free_axis] : 0.0;
            out << c << ',' << num(coord) << ',' << num(con.targets[n]) << ',' << num(actual)
                << '\n';
        }
    }
}

}  // namespace sympde
