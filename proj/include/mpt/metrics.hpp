#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mpt/matrix.hpp"

namespace mpt {

struct ScoreSample {
  std::vector<double> in_scores;
  std::vector<double> out_scores;
};

/// Test accuracy per noise level. Levels strictly increasing.
struct RobustnessCurve {
  std::vector<double> levels;
  std::vector<double> accuracies;
};

/// Column of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> row);

/// Fraction of rows whose argmax equals the label.
double accuracy(const EnergyTable& energies, std::span<const std::uint32_t> labels);

/// P(in > out) + 0.5 P(in == out) over all in/out pairs, O(n log n).
double auroc(const ScoreSample& sample);

double mean_auroc(std::span<const double> per_dataset);

/// Mean accuracy over the noise levels.
double robustness_auc(const RobustnessCurve& curve);

}  // namespace mpt
