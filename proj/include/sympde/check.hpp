#pragma once

#include <string>
#include <vector>

namespace sympde {

struct CheckOptions
{
    // Smallest step of the stencil convergence sweep (halving from 1e-1).
    double min_epsilon = 1e-3;
};

struct SuiteResult
{
    std::string name;
    bool passed = false;
    std::string detail;
};

// registry-load, softmax, gradient, gate-consistency, stencil-convergence
std::vector<std::string> suite_names();
// Throws ConfigError for an unknown suite name.
SuiteResult run_suite(const std::string& name, const CheckOptions& options = {});

// Least-squares slope of log(error) against log(epsilon).
double convergence_order(const std::vector<double>& epsilons, const std::vector<double>& errors);

}  // namespace sympde
