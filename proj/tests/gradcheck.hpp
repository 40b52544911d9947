#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "spmf/baseline.hpp"

namespace spmf::testing {

struct GradProbe {
  double relative_error = 0.0;
  std::size_t parameters = 0;
};

// Random model and batch, analytic gradient vs central differences over
// every parameter; error is ||a - n|| / max(||a||, ||n||).
inline GradProbe gradient_probe(Rng& rng, double eps = 1e-5) {
  const std::size_t D = 4 + rng.below(24);
  const std::size_t C = 2 + rng.below(4);
  std::vector<int> labels;
  for (std::size_t c = 0; c < C; ++c) labels.push_back(static_cast<int>(c) + 1);
  LinearModel m = init_model(D, labels, rng.next_u64());
  for (double& b : m.biases) b = rng.normal(0.0, 0.5);

  std::vector<Sample> samples(1 + rng.below(8));
  for (auto& s : samples) {
    for (std::size_t d = 0; d < D; ++d) s.x.push_back(rng.uniform01());
    s.label = labels[rng.below(C)];
  }
  std::vector<const Sample*> batch;
  for (const auto& s : samples) batch.push_back(&s);

  const auto analytic = loss_and_gradient(m, batch).grad;
  auto loss = [&] { return loss_and_gradient(m, batch).loss; };
  auto central = [&](double& p) {
    const double keep = p;
    p = keep + eps;
    const double up = loss();
    p = keep - eps;
    const double down = loss();
    p = keep;
    return (up - down) / (2.0 * eps);
  };

  double diff = 0.0, na = 0.0, nn = 0.0;
  auto accumulate = [&](double a, double n) {
    diff += (a - n) * (a - n);
    na += a * a;
    nn += n * n;
  };
  for (std::size_t i = 0; i < m.weights.size(); ++i) accumulate(analytic.weights[i], central(m.weights[i]));
  for (std::size_t i = 0; i < m.biases.size(); ++i) accumulate(analytic.biases[i], central(m.biases[i]));
  const double scale = std::max({std::sqrt(na), std::sqrt(nn), 1e-300});
  return {std::sqrt(diff) / scale, m.weights.size() + m.biases.size()};
}

}  // namespace spmf::testing
