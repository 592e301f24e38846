#include "recal/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "recal/errors.hpp"

namespace recal {

namespace {

struct Vertex {
  std::vector<double> x;
  double f;
};

}  // namespace

SimplexResult nelder_mead(const Objective& f, std::vector<double> x0, std::span<const double> steps,
                          const SimplexOptions& opts,
                          const std::function<void(double)>& on_iteration) {
  const std::size_t dim = x0.size();
  if (dim == 0 || steps.size() != dim) {
    throw InputError("simplex: starting point and step vector must be non-empty and equally sized");
  }

  SimplexResult result;
  auto eval = [&](const std::vector<double>& x) {
    ++result.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<Vertex> simplex;
  simplex.reserve(dim + 1);
  simplex.push_back({x0, eval(x0)});
  for (std::size_t i = 0; i < dim; ++i) {
    auto x = x0;
    x[i] += steps[i];
    simplex.push_back({x, eval(x)});
  }

  auto by_value = [](const Vertex& l, const Vertex& r) { return l.f < r.f; };
  std::vector<double> centroid(dim);
  auto along = [&](double coef, const std::vector<double>& worst) {
    // centroid + coef * (centroid - worst)
    std::vector<double> x(dim);
    for (std::size_t i = 0; i < dim; ++i) x[i] = centroid[i] + coef * (centroid[i] - worst[i]);
    return x;
  };

  while (true) {
    std::stable_sort(simplex.begin(), simplex.end(), by_value);
    const double best = simplex.front().f;
    const double worst = simplex.back().f;
    if (std::isfinite(worst) && worst - best < opts.tolerance * (1.0 + std::abs(best))) {
      result.converged = true;
      break;
    }
    if (result.evaluations >= opts.max_evaluations) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t v = 0; v < dim; ++v) {
      for (std::size_t i = 0; i < dim; ++i) centroid[i] += simplex[v].x[i];
    }
    for (double& c : centroid) c /= static_cast<double>(dim);

    Vertex& w = simplex.back();
    const double second_worst = simplex[dim - 1].f;

    auto xr = along(1.0, w.x);
    const double fr = eval(xr);
    if (fr < best) {
      auto xe = along(2.0, w.x);
      const double fe = eval(xe);
      if (fe < fr) {
        w = {std::move(xe), fe};
      } else {
        w = {std::move(xr), fr};
      }
    } else if (fr < second_worst) {
      w = {std::move(xr), fr};
    } else {
      // Outside contraction when the reflection beat the worst vertex,
      // inside contraction otherwise.
      const bool outside = fr < w.f;
      auto xc = along(outside ? 0.5 : -0.5, w.x);
      const double fc = eval(xc);
      if (fc < (outside ? fr : w.f)) {
        w = {std::move(xc), fc};
      } else {
        const auto& lo = simplex.front().x;
        for (std::size_t v = 1; v <= dim; ++v) {
          for (std::size_t i = 0; i < dim; ++i) {
            simplex[v].x[i] = lo[i] + 0.5 * (simplex[v].x[i] - lo[i]);
          }
          simplex[v].f = eval(simplex[v].x);
        }
      }
    }
    ++result.iterations;
    if (on_iteration) {
      const auto it = std::min_element(simplex.begin(), simplex.end(), by_value);
      on_iteration(it->f);
    }
  }

  result.x = simplex.front().x;
  result.value = simplex.front().f;
  return result;
}

}  // namespace recal
