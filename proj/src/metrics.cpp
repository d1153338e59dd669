#include "mpt/metrics.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace mpt {

std::size_t argmax(std::span<const double> row) {
  if (row.empty()) throw std::invalid_argument("argmax of an empty row");
  std::size_t best = 0;
  for (std::size_t j = 1; j < row.size(); ++j) {
    if (row[j] > row[best]) best = j;
  }
  return best;
}

double accuracy(const EnergyTable& energies, std::span<const std::uint32_t> labels) {
  if (energies.rows == 0) throw std::invalid_argument("accuracy of an empty batch");
  if (labels.size() != energies.rows) throw std::invalid_argument("label count does not match rows");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < energies.rows; ++i) {
    if (labels[i] >= energies.cols) throw std::invalid_argument("label out of range");
    if (argmax(energies.row(i)) == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(energies.rows);
}

double auroc(const ScoreSample& sample) {
  if (sample.in_scores.empty() || sample.out_scores.empty()) {
    throw std::invalid_argument("AUROC needs nonempty in and out samples");
  }
  std::vector<double> out = sample.out_scores;
  std::sort(out.begin(), out.end());
  // Twice the Mann-Whitney U statistic, kept integral so the result is exact.
  std::uint64_t twice_u = 0;
  for (double s : sample.in_scores) {
    const auto lo = std::lower_bound(out.begin(), out.end(), s);
    const auto hi = std::upper_bound(lo, out.end(), s);
    twice_u += 2 * static_cast<std::uint64_t>(lo - out.begin()) + static_cast<std::uint64_t>(hi - lo);
  }
  const double pairs = static_cast<double>(sample.in_scores.size()) *
                       static_cast<double>(sample.out_scores.size());
  return static_cast<double>(twice_u) / (2.0 * pairs);
}

double mean_auroc(std::span<const double> per_dataset) {
  if (per_dataset.empty()) throw std::invalid_argument("mean of no AUROC values");
  double total = 0.0;
  for (double v : per_dataset) total += v;
  return total / static_cast<double>(per_dataset.size());
}

double robustness_auc(const RobustnessCurve& curve) {
  if (curve.levels.empty() || curve.levels.size() != curve.accuracies.size()) {
    throw std::invalid_argument("robustness curve needs matching nonempty levels and accuracies");
  }
  for (std::size_t k = 1; k < curve.levels.size(); ++k) {
    if (!(curve.levels[k] > curve.levels[k - 1])) {
      throw std::invalid_argument("noise levels must be strictly increasing");
    }
  }
  double total = 0.0;
  for (double a : curve.accuracies) total += a;
  return total / static_cast<double>(curve.accuracies.size());
}

}  // namespace mpt
