#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace recal {

struct SimplexOptions {
  std::size_t max_evaluations = 10000;
  /// Stop once (f_worst - f_best) < tolerance * (1 + |f_best|).
  double tolerance = 1e-10;
};

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  bool converged = false;
  std::size_t evaluations = 0;
  std::size_t iterations = 0;
};

using Objective = std::function<double(std::span<const double>)>;

/// Derivative-free Nelder-Mead minimization (reflection 1, expansion 2,
/// contraction 1/2, shrink 1/2). The initial simplex is x0 plus one vertex
/// per coordinate displaced by steps[i]. Non-finite objective values are
/// treated as +inf. `on_iteration`, when set, receives the best value after
/// every iteration.
SimplexResult nelder_mead(const Objective& f, std::vector<double> x0, std::span<const double> steps,
                          const SimplexOptions& opts,
                          const std::function<void(double)>& on_iteration = {});

}  // namespace recal
