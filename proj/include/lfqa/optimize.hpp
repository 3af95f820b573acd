#pragma once

#include <functional>
#include <vector>

namespace lfqa {

struct OptimizeResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Objective returning f(x) and writing the gradient into `grad`.
using GradientObjective = std::function<double(const std::vector<double>& x,
                                               std::vector<double>& grad)>;

struct BfgsOptions {
  // Stop once the gradient's infinity norm drops below this.
  double gradient_tolerance = 1e-6;
  int max_iterations = 2000;
};

// Minimizes with BFGS and a backtracking Armijo line search.
OptimizeResult minimize_bfgs(const GradientObjective& f, std::vector<double> x0,
                             const BfgsOptions& options = {});

struct NelderMeadOptions {
  // Initial simplex offsets per coordinate (0 entries fall back to 0.05 or
  // 5% of |x0|).
  std::vector<double> initial_step;
  // Stop when the spread of simplex values and vertices falls below these.
  double f_tolerance = 1e-12;
  double x_tolerance = 1e-10;
  int max_evaluations = 20000;
};

OptimizeResult minimize_nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0,
                                    const NelderMeadOptions& options = {});

}  // namespace lfqa
