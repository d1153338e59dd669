#include "mpt/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mpt/random.hpp"

namespace mpt {

void validate(const TrainConfig& cfg, const Dataset& train_set) {
  validate(cfg.objective);
  validate(cfg.spec);
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate)) {
    throw std::invalid_argument("learning_rate must be positive");
  }
  if (cfg.epochs == 0) throw std::invalid_argument("epochs must be positive");
  if (cfg.batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (cfg.batch_size > train_set.size()) {
    throw std::invalid_argument("batch_size " + std::to_string(cfg.batch_size) +
                                " exceeds training set size " + std::to_string(train_set.size()));
  }
  if (train_set.inputs.cols != input_size(cfg.spec)) {
    throw std::invalid_argument("training inputs have width " + std::to_string(train_set.inputs.cols) +
                                ", network expects " + std::to_string(input_size(cfg.spec)));
  }
  if (train_set.num_labels != cfg.spec.num_labels) {
    throw std::invalid_argument("dataset has " + std::to_string(train_set.num_labels) +
                                " labels, network has " + std::to_string(cfg.spec.num_labels));
  }
}

TrainResult train(const TrainConfig& cfg, const Dataset& train_set) {
  validate(cfg, train_set);
  TrainResult result;
  result.params = init_parameters(cfg.spec, derive_seed(cfg.seed, {tag_hash("init")}));
  Rng order_rng(derive_seed(cfg.seed, {tag_hash("shuffle")}));

  const std::size_t n = train_set.size();
  const std::size_t width = train_set.inputs.cols;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    order_rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t m = std::min(cfg.batch_size, n - start);
      Matrix batch(m, width);
      std::vector<std::uint32_t> labels(m);
      for (std::size_t r = 0; r < m; ++r) {
        const std::size_t src = order[start + r];
        std::copy_n(train_set.inputs.row(src).begin(), width, batch.row(r).begin());
        labels[r] = train_set.labels[src];
      }

      const ForwardTrace trace = forward_trace(cfg.spec, result.params, batch);
      Matrix upstream;
      try {
        result.last_loss = batch_loss(cfg.objective, trace.energies(), labels).value;
        upstream = batch_loss_gradient(cfg.objective, trace.energies(), labels);
      } catch (const DivergedError&) {
        result.diverged = true;
        return result;
      }
      const GradientVector grad = backward(cfg.spec, result.params, trace, upstream);
      // Ascent: every objective is maximized.
      for (std::size_t k = 0; k < grad.size(); ++k) {
        result.params.values[k] += cfg.learning_rate * grad.values[k];
      }
      ++result.steps;
      if (!all_finite(result.params.values)) {
        result.diverged = true;
        return result;
      }
    }
  }
  return result;
}

}  // namespace mpt
