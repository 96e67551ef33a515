#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <thread>
#include <vector>

namespace shrinkerlab {

struct NelderMeadResult {
  Eigen::VectorXd argmax;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

// Maximizes f by the Nelder-Mead simplex method starting from `start` with
// per-coordinate initial steps. Converged means the simplex diameter or the
// relative spread of its values dropped below tol.
inline NelderMeadResult nelder_mead_max(const std::function<double(const Eigen::VectorXd&)>& f,
                                        const Eigen::VectorXd& start, const Eigen::VectorXd& step,
                                        int max_iterations, double tol) {
  const auto d = start.size();
  std::vector<Eigen::VectorXd> simplex(d + 1, start);
  std::vector<double> values(d + 1);
  NelderMeadResult out;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++out.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : -HUGE_VAL;
  };
  for (Eigen::Index i = 0; i < d; ++i) simplex[i + 1][i] += step[i];
  for (Eigen::Index i = 0; i <= d; ++i) values[i] = eval(simplex[i]);

  std::vector<Eigen::Index> order(d + 1);
  for (; out.iterations < max_iterations; ++out.iterations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] > values[b]; });
    const auto best = order.front(), worst = order.back(), second = order[d - 1];

    double diameter = 0.0;
    for (Eigen::Index i = 1; i <= d; ++i)
      diameter = std::max(diameter, (simplex[order[i]] - simplex[best]).cwiseAbs().maxCoeff());
    const double spread = std::abs(values[best] - values[worst]);
    if (diameter < tol || spread <= tol * std::max(1.0, std::abs(values[best]))) {
      out.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (Eigen::Index i = 0; i < d; ++i) centroid += simplex[order[i]];
    centroid /= static_cast<double>(d);

    const Eigen::VectorXd reflected = centroid + (centroid - simplex[worst]);
    const double f_reflected = eval(reflected);
    if (f_reflected > values[best]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double f_expanded = eval(expanded);
      if (f_expanded > f_reflected) {
        simplex[worst] = expanded;
        values[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected > values[second]) {
      simplex[worst] = reflected;
      values[worst] = f_reflected;
      continue;
    }
    const bool outside = f_reflected > values[worst];
    const Eigen::VectorXd contracted =
        outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                : Eigen::VectorXd(centroid + 0.5 * (simplex[worst] - centroid));
    const double f_contracted = eval(contracted);
    if (f_contracted > (outside ? f_reflected : values[worst])) {
      simplex[worst] = contracted;
      values[worst] = f_contracted;
      continue;
    }
    for (Eigen::Index i = 1; i <= d; ++i) {
      const auto k = order[i];
      simplex[k] = simplex[best] + 0.5 * (simplex[k] - simplex[best]);
      values[k] = eval(simplex[k]);
    }
  }
  const auto top = std::max_element(values.begin(), values.end()) - values.begin();
  out.argmax = simplex[top];
  out.value = values[top];
  return out;
}

// Worker count: explicit request, else SHRINKERLAB_THREADS, else 1.
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SHRINKERLAB_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  return 1;
}

// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
// written by exactly one worker, so results are independent of scheduling.
inline void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += threads) body(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace shrinkerlab
