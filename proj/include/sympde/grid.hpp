#pragma once

#include <cstddef>
#include <ostream>
#include <string>

#include "sympde/pde.hpp"

namespace sympde {

struct Resolution
{
    std::size_t rows = 101;  // samples along the first variable
    std::size_t cols = 101;  // samples along the second variable
};

// "RxC" with R, C >= 2; throws ConfigError.
Resolution parse_resolution(const std::string& text);

// Column layouts, one header line then one row per point, first variable
// outermost:
//   solution grid:  <var0>,<var1>,f
//   residual grid:  <var0>,<var1>,g
//   boundary fit:   constraint_id,coord,target,actual
// Grids need a two-variable problem and throw ConfigError otherwise.
void write_solution_grid(std::ostream& out, const PlainFunction& f, const PdeProblem& problem,
                         Resolution res);
void write_residual_grid(std::ostream& out, const PlainFunction& f, const PdeProblem& problem,
                         Resolution res, double epsilon);
// coord is the constraint's first free variable; actual is f or the
// constrained derivative at that point.
void write_boundary_fit(std::ostream& out, const PlainFunction& f, const PdeProblem& problem,
                        double epsilon);

}  // namespace sympde
