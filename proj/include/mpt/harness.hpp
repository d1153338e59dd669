#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mpt/data.hpp"
#include "mpt/metrics.hpp"
#include "mpt/netcore.hpp"
#include "mpt/objectives.hpp"
#include "mpt/scores.hpp"

namespace mpt {

struct TrainConfig {
  ObjectiveConfig objective;
  double learning_rate = 0.01;
  std::size_t batch_size = 64;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;
  NetworkSpec spec;
};

/// Throws std::invalid_argument if the config cannot train on `train_set`.
void validate(const TrainConfig& cfg, const Dataset& train_set);

struct TrainResult {
  ParameterVector params;
  bool diverged = false;
  std::size_t steps = 0;
  double last_loss = std::numeric_limits<double>::quiet_NaN();
};

/// Plain SGD ascent on the configured objective with a fixed learning rate
/// and a seeded shuffle every epoch. Stops at the first non-finite loss or
/// parameter and reports the run as diverged.
TrainResult train(const TrainConfig& cfg, const Dataset& train_set);

/// Energies for every row of `inputs`, evaluated in bounded chunks.
EnergyTable predict(const NetworkSpec& spec, const ParameterVector& params, const Matrix& inputs);

struct EvaluationPlan {
  std::vector<ScoreKind> score_kinds{std::begin(kAllScores), std::end(kAllScores)};
  std::vector<double> noise_levels = standard_noise_levels();
  std::uint64_t noise_seed = 0;
};

struct ScoreAuroc {
  ScoreKind kind = ScoreKind::kEnergy;
  std::vector<double> per_out;  ///< one entry per out-dataset, in out_names order
  double mean = 0.0;
};

struct RunRecord {
  std::string run_id;
  ObjectiveConfig objective;
  std::size_t batch_size = 0;
  std::uint64_t seed = 0;
  double learning_rate = 0.0;
  std::size_t epochs = 0;

  bool diverged = false;
  double train_acc = 0.0;
  double test_acc = 0.0;
  double robustness_auc = 0.0;
  RobustnessCurve robustness;
  std::vector<std::string> out_names;
  std::vector<ScoreAuroc> auroc;  ///< empty when no out-datasets were given
  std::string error;              ///< set when the cell failed outside training
  double wall_time = 0.0;
};

/// Accuracies, robustness curve over plan.noise_levels and per-score AUROC
/// against each out-dataset (in-distribution side = test_set). A diverged
/// model, or one whose energies are non-finite, gets zeros everywhere.
RunRecord evaluate(const NetworkSpec& spec, const ParameterVector& params, const Dataset& test_set,
                   std::span<const Dataset> out_sets, const EvaluationPlan& plan,
                   const Dataset* train_set = nullptr, bool diverged = false);

/// Test accuracy on perturbed copies of `test_set`, one per level.
RobustnessCurve robustness_curve(const NetworkSpec& spec, const ParameterVector& params,
                                 const Dataset& test_set, std::span<const double> levels,
                                 std::uint64_t noise_seed);

/// AUROC of one score between the test set and one out-dataset.
double ood_auroc(ScoreKind kind, const EnergyTable& in_energies, const EnergyTable& out_energies);

struct GridSpec {
  std::vector<ObjectiveKind> objectives;
  std::vector<double> alpha_grid;
  std::vector<std::size_t> batch_sizes;
  std::size_t seed_count = 1;

  double learning_rate = 0.01;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;
  NetworkSpec spec;

  Dataset train_set;
  Dataset test_set;
  std::vector<Dataset> out_sets;
  EvaluationPlan evaluation;

  std::size_t total_runs() const {
    return objectives.size() * alpha_grid.size() * batch_sizes.size() * seed_count;
  }
};

void validate(const GridSpec& grid);

struct GridCell {
  std::string run_id;
  TrainConfig config;
  std::size_t seed_index = 0;
};

/// Default alpha axis: 0.5, 1, 2, 4, 8, 16, 32, 64.
std::vector<double> default_alpha_grid();

/// Seed for one cell, a function of the cell's own axis values only.
std::uint64_t cell_seed(std::uint64_t base, ObjectiveKind kind, double alpha, std::size_t batch_size,
                        std::size_t seed_index);

std::vector<GridCell> grid_cells(const GridSpec& grid);

/// Trains and evaluates one cell. Exceptions other than divergence are
/// captured in RunRecord::error.
RunRecord run_cell(const GridSpec& grid, const GridCell& cell);

/// Runs every cell, `jobs` at a time. Records come back in cell order.
std::vector<RunRecord> run_grid(const GridSpec& grid, std::size_t jobs = 1);

}  // namespace mpt
