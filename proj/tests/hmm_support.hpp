#pragma once

#include <gapmark/hmm.hpp>

#include <cmath>
#include <random>
#include <string>

namespace gapmark::test {

inline std::vector<double> random_row(std::mt19937_64& rng, std::size_t n, double zero_rate = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> row(n);
  double total = 0;
  for (auto& x : row) {
    x = u(rng) < zero_rate ? 0.0 : u(rng) + 1e-3;
    total += x;
  }
  if (total == 0) {
    row[0] = 1;
    total = 1;
  }
  for (auto& x : row) x /= total;
  return row;
}

// N states, M symbols in total (the last one is the unseen symbol).
inline HmmModel random_model(std::mt19937_64& rng, std::size_t n, std::size_t m, double zero_rate = 0.0) {
  HmmModel model;
  for (std::size_t i = 0; i < n; ++i) model.states.push_back("S" + std::to_string(i));
  for (std::size_t k = 0; k + 1 < m; ++k) model.alphabet.push_back(ObservationCode{k});
  model.initial = random_row(rng, n, zero_rate);
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = random_row(rng, n, zero_rate);
    model.transition.insert(model.transition.end(), a.begin(), a.end());
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto b = random_row(rng, m, zero_rate);
    model.emission.insert(model.emission.end(), b.begin(), b.end());
  }
  model.sensor_count = 8;
  model.delta_t_seconds = 7;
  model.paradigm = "p1";
  return model;
}

// log-sum-exp over all N^T paths using path_log_probability.
inline double brute_force_likelihood(const HmmModel& model, const std::vector<std::size_t>& obs) {
  const std::size_t n = model.state_count();
  std::vector<std::size_t> path(obs.size(), 0);
  std::vector<double> logs;
  while (true) {
    logs.push_back(path_log_probability(model, path, obs));
    std::size_t t = 0;
    while (t < path.size() && ++path[t] == n) path[t++] = 0;
    if (t == path.size()) break;
  }
  double best = -INFINITY;
  for (double l : logs) best = std::max(best, l);
  if (best == -INFINITY) return best;
  double sum = 0;
  for (double l : logs) sum += std::exp(l - best);
  return best + std::log(sum);
}

}  // namespace gapmark::test
