#pragma once

#include <functional>

#include <Eigen/Core>

namespace curvpose {

struct NelderMeadOptions {
  int max_iters = 1000;
  double xtol = 1e-8;   // stop when every vertex is within xtol (inf-norm) of the best
  double ftol = 1e-10;  // stop when every value is within ftol of the best
  // Per-coordinate initial simplex offsets. A zero entry holds that coordinate
  // fixed at x0. Empty means 0.05 * |x0_i| (0.00025 where x0_i == 0).
  Eigen::VectorXd initial_step;
  // Box bounds; trial points are projected onto the box. Empty means unbounded.
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;
using IterationCallback = std::function<void(int iteration, double best_value)>;

// Standard simplex method: reflection 1, expansion 2, contraction 0.5, shrink 0.5.
// Returns the best vertex ever evaluated, so value <= objective(x0). Throws
// kNonFiniteObjective if any evaluation is NaN or infinite.
NelderMeadResult nelder_mead(const Objective& objective, const Eigen::VectorXd& x0,
                             const NelderMeadOptions& options, const IterationCallback& on_iteration = {});

}  // namespace curvpose
