#include "mpt/harness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "mpt/random.hpp"

namespace mpt {
namespace {

constexpr std::size_t kChunkRows = 512;

RunRecord zero_record(std::span<const Dataset> out_sets, const EvaluationPlan& plan) {
  RunRecord rec;
  rec.diverged = true;
  rec.robustness.levels = plan.noise_levels;
  rec.robustness.accuracies.assign(plan.noise_levels.size(), 0.0);
  for (const auto& out : out_sets) rec.out_names.push_back(out.name);
  if (!out_sets.empty()) {
    for (auto kind : plan.score_kinds) {
      rec.auroc.push_back({kind, std::vector<double>(out_sets.size(), 0.0), 0.0});
    }
  }
  return rec;
}

}  // namespace

EnergyTable predict(const NetworkSpec& spec, const ParameterVector& params, const Matrix& inputs) {
  EnergyTable energies(inputs.rows, spec.num_labels);
  for (std::size_t start = 0; start < inputs.rows; start += kChunkRows) {
    const std::size_t m = std::min(kChunkRows, inputs.rows - start);
    Matrix chunk(m, inputs.cols);
    std::copy_n(inputs.data.begin() + static_cast<std::ptrdiff_t>(start * inputs.cols), m * inputs.cols,
                chunk.data.begin());
    const EnergyTable part = forward(spec, params, chunk);
    std::copy(part.data.begin(), part.data.end(),
              energies.data.begin() + static_cast<std::ptrdiff_t>(start * energies.cols));
  }
  return energies;
}

RobustnessCurve robustness_curve(const NetworkSpec& spec, const ParameterVector& params,
                                 const Dataset& test_set, std::span<const double> levels,
                                 std::uint64_t noise_seed) {
  RobustnessCurve curve;
  for (double level : levels) {
    const NoiseSpec noise{level, derive_seed(noise_seed, {std::bit_cast<std::uint64_t>(level)})};
    const Dataset noisy = perturb(test_set, noise);
    curve.levels.push_back(level);
    curve.accuracies.push_back(accuracy(predict(spec, params, noisy.inputs), noisy.labels));
  }
  return curve;
}

double ood_auroc(ScoreKind kind, const EnergyTable& in_energies, const EnergyTable& out_energies) {
  return auroc({score_rows(kind, in_energies), score_rows(kind, out_energies)});
}

RunRecord evaluate(const NetworkSpec& spec, const ParameterVector& params, const Dataset& test_set,
                   std::span<const Dataset> out_sets, const EvaluationPlan& plan,
                   const Dataset* train_set, bool diverged) {
  if (diverged || !all_finite(params.values)) return zero_record(out_sets, plan);

  const EnergyTable test_energies = predict(spec, params, test_set.inputs);
  if (!all_finite(test_energies.data)) return zero_record(out_sets, plan);

  RunRecord rec;
  rec.test_acc = accuracy(test_energies, test_set.labels);
  if (train_set != nullptr) rec.train_acc = accuracy(predict(spec, params, train_set->inputs), train_set->labels);

  if (!plan.noise_levels.empty()) {
    rec.robustness = robustness_curve(spec, params, test_set, plan.noise_levels, plan.noise_seed);
    rec.robustness_auc = robustness_auc(rec.robustness);
  }

  if (!out_sets.empty()) {
    std::vector<EnergyTable> out_energies;
    for (const auto& out : out_sets) {
      rec.out_names.push_back(out.name);
      out_energies.push_back(predict(spec, params, out.inputs));
      if (!all_finite(out_energies.back().data)) return zero_record(out_sets, plan);
    }
    for (auto kind : plan.score_kinds) {
      ScoreAuroc entry{kind, {}, 0.0};
      for (const auto& energies : out_energies) entry.per_out.push_back(ood_auroc(kind, test_energies, energies));
      entry.mean = mean_auroc(entry.per_out);
      rec.auroc.push_back(std::move(entry));
    }
  }
  return rec;
}

}  // namespace mpt
