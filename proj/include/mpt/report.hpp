#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mpt/harness.hpp"

namespace mpt {

struct Summary {
  double max = 0.0;
  double mean = 0.0;
  double std = 0.0;  ///< sample standard deviation, 0 for a single value
};

Summary summarize(std::span<const double> values);

struct ReportRow {
  std::string objective;
  std::optional<double> alpha;  ///< empty for the per-objective row
  std::size_t runs = 0;
  std::size_t diverged = 0;
  std::size_t failed = 0;
  Summary train_acc;
  Summary test_acc;
  Summary robustness_auc;
  std::vector<std::pair<ScoreKind, Summary>> auroc;  ///< over each run's mean AUROC
};

struct Report {
  std::vector<ReportRow> rows;
};

/// Per-(objective, alpha) rows followed by a per-objective row. Diverged
/// runs enter every statistic as zeros.
Report aggregate(std::span<const RunRecord> records);

/// Results CSV: run_id, objective, alpha, batch_size, seed, learning_rate,
/// epochs, diverged, train_acc, test_acc, robustness_auc,
/// auroc_<score>_<outset>..., auroc_<score>_mean..., error, wall_time.
void write_results_csv(std::ostream& out, std::span<const RunRecord> records);
std::vector<RunRecord> read_results_csv(std::istream& in);

void write_report_csv(std::ostream& out, const Report& report);

/// Fixed six-decimal formatting used by every CSV.
std::string format_real(double v);

}  // namespace mpt
