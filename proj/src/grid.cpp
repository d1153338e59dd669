#include "mpt/harness.hpp"

#include <atomic>
#include <bit>
#include <chrono>
#include <cstdio>
#include <stdexcept>
#include <thread>

#include "mpt/random.hpp"

namespace mpt {

std::vector<double> default_alpha_grid() { return {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0}; }

void validate(const GridSpec& grid) {
  if (grid.objectives.empty() || grid.alpha_grid.empty() || grid.batch_sizes.empty() || grid.seed_count == 0) {
    throw std::invalid_argument("grid axes must be nonempty");
  }
  for (double a : grid.alpha_grid) validate(ObjectiveConfig{ObjectiveKind::kCCE, a});
  validate(grid.spec);
  validate(grid.train_set);
  validate(grid.test_set);
  for (const auto& out : grid.out_sets) {
    validate(out);
    if (out.name == "mean") throw std::invalid_argument("out-dataset name 'mean' is reserved");
  }
  if (grid.test_set.size() == 0) throw std::invalid_argument("test set is empty");
}

std::uint64_t cell_seed(std::uint64_t base, ObjectiveKind kind, double alpha, std::size_t batch_size,
                        std::size_t seed_index) {
  return derive_seed(base, {tag_hash(objective_name(kind)), std::bit_cast<std::uint64_t>(alpha),
                            static_cast<std::uint64_t>(batch_size), static_cast<std::uint64_t>(seed_index)});
}

std::vector<GridCell> grid_cells(const GridSpec& grid) {
  std::vector<GridCell> cells;
  cells.reserve(grid.total_runs());
  for (auto kind : grid.objectives) {
    for (double alpha : grid.alpha_grid) {
      for (std::size_t batch : grid.batch_sizes) {
        for (std::size_t s = 0; s < grid.seed_count; ++s) {
          GridCell cell;
          char id[96];
          std::snprintf(id, sizeof id, "%s-a%g-b%zu-s%zu", std::string(objective_name(kind)).c_str(), alpha,
                        batch, s);
          cell.run_id = id;
          cell.seed_index = s;
          cell.config.objective = {kind, alpha};
          cell.config.learning_rate = grid.learning_rate;
          cell.config.batch_size = batch;
          cell.config.epochs = grid.epochs;
          cell.config.seed = cell_seed(grid.seed, kind, alpha, batch, s);
          cell.config.spec = grid.spec;
          cells.push_back(std::move(cell));
        }
      }
    }
  }
  return cells;
}

RunRecord run_cell(const GridSpec& grid, const GridCell& cell) {
  const auto started = std::chrono::steady_clock::now();
  RunRecord rec;
  try {
    const TrainResult trained = train(cell.config, grid.train_set);
    EvaluationPlan plan = grid.evaluation;
    plan.noise_seed = derive_seed(cell.config.seed, {tag_hash("noise")});
    rec = evaluate(cell.config.spec, trained.params, grid.test_set, grid.out_sets, plan, &grid.train_set,
                   trained.diverged);
  } catch (const std::exception& e) {
    rec = RunRecord{};
    rec.error = e.what();
  }
  rec.run_id = cell.run_id;
  rec.objective = cell.config.objective;
  rec.batch_size = cell.config.batch_size;
  rec.seed = cell.config.seed;
  rec.learning_rate = cell.config.learning_rate;
  rec.epochs = cell.config.epochs;
  if (!rec.error.empty()) {
    // Keep the CSV rectangular for failed cells.
    rec.robustness.levels = grid.evaluation.noise_levels;
    rec.robustness.accuracies.assign(grid.evaluation.noise_levels.size(), 0.0);
    rec.out_names.clear();
    rec.auroc.clear();
    for (const auto& out : grid.out_sets) rec.out_names.push_back(out.name);
    if (!grid.out_sets.empty()) {
      for (auto kind : grid.evaluation.score_kinds) {
        rec.auroc.push_back({kind, std::vector<double>(grid.out_sets.size(), 0.0), 0.0});
      }
    }
  }
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return rec;
}

std::vector<RunRecord> run_grid(const GridSpec& grid, std::size_t jobs) {
  validate(grid);
  const auto cells = grid_cells(grid);
  std::vector<RunRecord> records(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < cells.size(); k = next++) records[k] = run_cell(grid, cells[k]);
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, cells.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return records;
}

}  // namespace mpt
