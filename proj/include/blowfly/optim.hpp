#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace blowfly {

struct NelderMeadOptions {
    double reflection = 1.0;
    double expansion = 2.0;
    double contraction = 0.5;
    double shrink = 0.5;
    std::size_t max_evaluations = 20000;
    double f_tolerance = 1e-10;   // spread of simplex values
    double x_tolerance = 1e-10;   // largest vertex distance from the best vertex
    std::vector<double> initial_step;  // per coordinate; empty uses default_step
    double default_step = 0.1;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Minimizes f by the Nelder-Mead simplex method. Non-finite objective values
/// are treated as +inf, so infeasible regions simply repel the simplex.
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& options = {});

/// Restarts nelder_mead from its own optimum until a pass improves the value
/// by less than `improvement` or `max_passes` is reached.
NelderMeadResult nelder_mead_polished(const Objective& f, std::vector<double> x0, const NelderMeadOptions& options = {},
                                      std::size_t max_passes = 5, double improvement = 1e-9);

}  // namespace blowfly
