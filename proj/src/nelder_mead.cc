#include "posecal/nelder_mead.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace posecal {

NelderMeadResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const Eigen::VectorXd& start, const Eigen::VectorXd& steps,
    const NelderMeadOptions& options) {
  const int n = static_cast<int>(start.size());
  if (n == 0 || steps.size() != n) {
    throw std::invalid_argument("nelder_mead: bad dimensions");
  }
  const double dn = n;
  const double reflect = 1.0;
  const double expand = 1.0 + 2.0 / dn;
  const double contract = 0.75 - 1.0 / (2.0 * dn);
  const double shrink = n > 1 ? 1.0 - 1.0 / dn : 0.5;

  int evaluations = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evaluations;
    const double v = objective(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  std::vector<Eigen::VectorXd> simplex(n + 1, start);
  std::vector<double> values(n + 1);
  values[0] = eval(start);
  for (int i = 0; i < n; ++i) {
    simplex[i + 1](i) += steps(i);
    values[i + 1] = eval(simplex[i + 1]);
  }

  std::vector<int> order(n + 1);
  bool converged = false;
  while (evaluations < options.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return values[a] < values[b]; });
    {
      std::vector<Eigen::VectorXd> s(n + 1);
      std::vector<double> v(n + 1);
      for (int i = 0; i <= n; ++i) {
        s[i] = std::move(simplex[order[i]]);
        v[i] = values[order[i]];
      }
      simplex = std::move(s);
      values = std::move(v);
    }

    if (std::isfinite(values[n])) {
      double f_spread = values[n] - values[0];
      double x_spread = 0.0;
      for (int i = 1; i <= n; ++i) {
        x_spread = std::max(x_spread,
                            (simplex[i] - simplex[0]).lpNorm<Eigen::Infinity>());
      }
      if (f_spread <= options.f_tolerance && x_spread <= options.x_tolerance) {
        converged = true;
        break;
      }
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) centroid += simplex[i];
    centroid /= dn;

    const Eigen::VectorXd xr =
        centroid + reflect * (centroid - simplex[n]);
    const double fr = eval(xr);
    if (fr < values[0]) {
      const Eigen::VectorXd xe = centroid + expand * (xr - centroid);
      const double fe = eval(xe);
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
    bool accepted = false;
    if (fr < values[n]) {
      const Eigen::VectorXd xc = centroid + contract * (xr - centroid);
      const double fc = eval(xc);
      if (fc <= fr) {
        simplex[n] = xc;
        values[n] = fc;
        accepted = true;
      }
    } else {
      const Eigen::VectorXd xc = centroid + contract * (simplex[n] - centroid);
      const double fc = eval(xc);
      if (fc < values[n]) {
        simplex[n] = xc;
        values[n] = fc;
        accepted = true;
      }
    }
    if (!accepted) {
      for (int i = 1; i <= n; ++i) {
        simplex[i] = simplex[0] + shrink * (simplex[i] - simplex[0]);
        values[i] = eval(simplex[i]);
      }
    }
  }

  const auto best = std::min_element(values.begin(), values.end());
  NelderMeadResult out;
  out.x = simplex[best - values.begin()];
  out.value = *best;
  out.evaluations = evaluations;
  out.converged = converged;
  return out;
}

}  // namespace posecal
