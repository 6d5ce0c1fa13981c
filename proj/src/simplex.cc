#include "curvpose/simplex.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "curvpose/errors.h"

namespace curvpose {
namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

}  // namespace

NelderMeadResult nelder_mead(const Objective& objective, const Eigen::VectorXd& x0,
                             const NelderMeadOptions& options, const IterationCallback& on_iteration) {
  const Eigen::Index full_dim = x0.size();
  const bool bounded = options.lower.size() == full_dim && options.upper.size() == full_dim;
  if ((options.lower.size() != 0 || options.upper.size() != 0) && !bounded) {
    throw Error(ErrorCode::kInvalidArgument, "nelder_mead: bounds must match the dimension");
  }
  if (options.initial_step.size() != 0 && options.initial_step.size() != full_dim) {
    throw Error(ErrorCode::kInvalidArgument, "nelder_mead: initial_step must match the dimension");
  }

  Eigen::VectorXd step(full_dim);
  for (Eigen::Index i = 0; i < full_dim; ++i) {
    if (options.initial_step.size() != 0) {
      step[i] = options.initial_step[i];
    } else {
      step[i] = x0[i] != 0.0 ? 0.05 * std::abs(x0[i]) : 0.00025;
    }
  }
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < full_dim; ++i) {
    if (step[i] != 0.0) active.push_back(i);
  }
  const std::size_t n = active.size();

  auto project = [&](Eigen::VectorXd x) {
    if (bounded) x = x.cwiseMax(options.lower).cwiseMin(options.upper);
    return x;
  };

  NelderMeadResult result;
  auto evaluate = [&](const Eigen::VectorXd& x) {
    const double f = objective(x);
    ++result.evaluations;
    if (!std::isfinite(f)) throw Error(ErrorCode::kNonFiniteObjective, "objective returned a non-finite value");
    return f;
  };

  std::vector<Eigen::VectorXd> xs;
  std::vector<double> fs;
  xs.reserve(n + 1);
  xs.push_back(project(x0));
  fs.push_back(evaluate(xs[0]));
  for (std::size_t k = 0; k < n; ++k) {
    const Eigen::Index i = active[k];
    Eigen::VectorXd x = xs[0];
    x[i] += step[i];
    if (bounded && x[i] > options.upper[i]) x[i] = xs[0][i] - step[i];
    x = project(x);
    xs.push_back(x);
    fs.push_back(evaluate(x));
  }

  std::vector<std::size_t> order(n + 1);
  auto sort_simplex = [&]() {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    std::vector<Eigen::VectorXd> xs2;
    std::vector<double> fs2;
    xs2.reserve(n + 1);
    fs2.reserve(n + 1);
    for (std::size_t k : order) {
      xs2.push_back(std::move(xs[k]));
      fs2.push_back(fs[k]);
    }
    xs = std::move(xs2);
    fs = std::move(fs2);
  };
  auto converged = [&]() {
    double xspread = 0.0;
    double fspread = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      xspread = std::max(xspread, (xs[k] - xs[0]).cwiseAbs().maxCoeff());
      fspread = std::max(fspread, std::abs(fs[k] - fs[0]));
    }
    return n == 0 || xspread <= options.xtol || fspread <= options.ftol;
  };

  sort_simplex();
  while (!converged()) {
    if (result.iterations >= options.max_iters) break;
    ++result.iterations;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(full_dim);
    for (std::size_t k = 0; k < n; ++k) centroid += xs[k];
    centroid /= static_cast<double>(n);
    const Eigen::VectorXd& worst = xs[n];

    const Eigen::VectorXd xr = project(centroid + kReflect * (centroid - worst));
    const double fr = evaluate(xr);
    bool shrink = false;
    if (fr < fs[0]) {
      const Eigen::VectorXd xe = project(centroid + kExpand * (xr - centroid));
      const double fe = evaluate(xe);
      if (fe < fr) {
        xs[n] = xe;
        fs[n] = fe;
      } else {
        xs[n] = xr;
        fs[n] = fr;
      }
    } else if (fr < fs[n - 1]) {
      xs[n] = xr;
      fs[n] = fr;
    } else if (fr < fs[n]) {
      const Eigen::VectorXd xc = project(centroid + kContract * (xr - centroid));
      const double fc = evaluate(xc);
      if (fc <= fr) {
        xs[n] = xc;
        fs[n] = fc;
      } else {
        shrink = true;
      }
    } else {
      const Eigen::VectorXd xcc = project(centroid + kContract * (worst - centroid));
      const double fcc = evaluate(xcc);
      if (fcc < fs[n]) {
        xs[n] = xcc;
        fs[n] = fcc;
      } else {
        shrink = true;
      }
    }
    if (shrink) {
      for (std::size_t k = 1; k <= n; ++k) {
        xs[k] = project(xs[0] + kShrink * (xs[k] - xs[0]));
        fs[k] = evaluate(xs[k]);
      }
    }
    sort_simplex();
    if (on_iteration) on_iteration(result.iterations, fs[0]);
  }

  result.converged = converged();
  result.x = xs[0];
  result.value = fs[0];
  return result;
}

}  // namespace curvpose
