#include "lfqa/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lfqa/error.hpp"

namespace lfqa {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

OptimizeResult minimize_bfgs(const GradientObjective& f, std::vector<double> x0,
                             const BfgsOptions& options) {
  const std::size_t n = x0.size();
  OptimizeResult result;
  result.x = std::move(x0);
  std::vector<double> g(n);
  result.value = f(result.x, g);
  if (n == 0) {
    result.converged = true;
    return result;
  }
  // Inverse Hessian approximation, row-major.
  std::vector<double> h(n * n, 0.0);
  auto reset = [&] {
    std::fill(h.begin(), h.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) h[i * n + i] = 1.0;
  };
  reset();
  bool first_step = true;
  std::vector<double> p(n), x_new(n), g_new(n), s(n), y(n), hy(n);
  for (int it = 0; it < options.max_iterations; ++it) {
    result.iterations = it;
    if (inf_norm(g) < options.gradient_tolerance) {
      result.converged = true;
      return result;
    }
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = 0.0;
      for (std::size_t j = 0; j < n; ++j) p[i] -= h[i * n + j] * g[j];
    }
    double slope = dot(g, p);
    if (!(slope < 0.0)) {
      reset();
      for (std::size_t i = 0; i < n; ++i) p[i] = -g[i];
      slope = dot(g, p);
    }
    double alpha = 1.0;
    double f_new = 0.0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = result.x[i] + alpha * p[i];
      f_new = f(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= result.value + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // No descent left at double precision; accept a stationary point.
      result.converged = inf_norm(g) < options.gradient_tolerance * 10.0;
      return result;
    }
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = x_new[i] - result.x[i];
      y[i] = g_new[i] - g[i];
    }
    const double sy = dot(s, y);
    if (sy > 1e-300) {
      if (first_step) {
        const double scale = sy / dot(y, y);
        for (std::size_t i = 0; i < n; ++i) h[i * n + i] = scale;
        first_step = false;
      }
      for (std::size_t i = 0; i < n; ++i) {
        hy[i] = 0.0;
        for (std::size_t j = 0; j < n; ++j) hy[i] += h[i * n + j] * y[j];
      }
      const double yhy = dot(y, hy);
      const double rho = 1.0 / sy;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          h[i * n + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
        }
      }
    }
    result.x = x_new;
    result.value = f_new;
    g = g_new;
  }
  result.iterations = options.max_iterations;
  result.converged = inf_norm(g) < options.gradient_tolerance;
  return result;
}

OptimizeResult minimize_nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0,
                                    const NelderMeadOptions& options) {
  const std::size_t n = x0.size();
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "Nelder-Mead needs at least one parameter");
  auto eval = [&](const std::vector<double>& x) {
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  std::vector<std::vector<double>> simplex(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) {
    double step = i < options.initial_step.size() ? options.initial_step[i] : 0.0;
    if (step == 0.0) step = x0[i] != 0.0 ? 0.05 * std::abs(x0[i]) : 0.05;
    simplex[i + 1][i] += step;
  }
  std::vector<double> values(n + 1);
  int evaluations = 0;
  for (std::size_t i = 0; i <= n; ++i) {
    values[i] = eval(simplex[i]);
    ++evaluations;
  }
  std::vector<std::size_t> order(n + 1);
  OptimizeResult result;
  int iterations = 0;
  while (evaluations < options.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return values[a] < values[b]; });
    {
      auto s2 = simplex;
      auto v2 = values;
      for (std::size_t i = 0; i <= n; ++i) {
        simplex[i] = s2[order[i]];
        values[i] = v2[order[i]];
      }
    }
    double f_spread = 0.0;
    double x_spread = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      f_spread = std::max(f_spread, std::abs(values[i] - values[0]));
      for (std::size_t j = 0; j < n; ++j) {
        x_spread = std::max(x_spread, std::abs(simplex[i][j] - simplex[0][j]));
      }
    }
    if (f_spread <= options.f_tolerance && x_spread <= options.x_tolerance) {
      result.converged = true;
      break;
    }
    ++iterations;
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / static_cast<double>(n);
    }
    auto along = [&](double t) {
      std::vector<double> x(n);
      for (std::size_t j = 0; j < n; ++j) x[j] = centroid[j] + t * (simplex[n][j] - centroid[j]);
      return x;
    };
    const std::vector<double> xr = along(-1.0);
    const double fr = eval(xr);
    ++evaluations;
    if (fr < values[0]) {
      const std::vector<double> xe = along(-2.0);
      const double fe = eval(xe);
      ++evaluations;
      if (fe < fr) {
        simplex[n] = xe;
        values[n] = fe;
      } else {
        simplex[n] = xr;
        values[n] = fr;
      }
      continue;
    }
    if (fr < values[n - 1]) {
      simplex[n] = xr;
      values[n] = fr;
      continue;
    }
    const bool outside = fr < values[n];
    const std::vector<double> xc = along(outside ? -0.5 : 0.5);
    const double fc = eval(xc);
    ++evaluations;
    if (fc < (outside ? fr : values[n])) {
      simplex[n] = xc;
      values[n] = fc;
      continue;
    }
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
      }
      values[i] = eval(simplex[i]);
      ++evaluations;
    }
  }
  const auto best = static_cast<std::size_t>(
      std::min_element(values.begin(), values.end()) - values.begin());
  result.x = simplex[best];
  result.value = values[best];
  result.iterations = iterations;
  return result;
}

}  // namespace lfqa
