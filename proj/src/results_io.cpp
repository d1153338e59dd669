#include "mpt/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mpt {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

double parse_real(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad number '" + s + "' in results CSV");
  return v;
}

std::uint64_t parse_uint(const std::string& s) {
  std::size_t used = 0;
  const unsigned long long v = std::stoull(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad integer '" + s + "' in results CSV");
  return v;
}

const std::vector<std::string> kFixedColumns = {"run_id", "objective", "alpha", "batch_size", "seed",
                                                "learning_rate", "epochs", "diverged", "train_acc",
                                                "test_acc", "robustness_auc"};

/// Splits "auroc_<score>_<outset>" into (score, outset).
std::pair<ScoreKind, std::string> parse_auroc_column(const std::string& column) {
  const std::string prefix = "auroc_";
  if (column.rfind(prefix, 0) != 0) throw std::invalid_argument("unexpected column '" + column + "'");
  const std::string rest = column.substr(prefix.size());
  // Longest score name first so max_energy is not read as energy.
  for (auto kind : {ScoreKind::kMaxEnergy, ScoreKind::kSoftmax, ScoreKind::kEnergy}) {
    const std::string name = std::string(score_name(kind)) + "_";
    if (rest.rfind(name, 0) == 0) return {kind, rest.substr(name.size())};
  }
  throw std::invalid_argument("unknown score in column '" + column + "'");
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) return {};
  Summary s;
  s.max = *std::max_element(values.begin(), values.end());
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return s;
}

Report aggregate(std::span<const RunRecord> records) {
  std::vector<std::string> objectives;
  for (const auto& r : records) {
    const std::string name(objective_name(r.objective.kind));
    if (std::find(objectives.begin(), objectives.end(), name) == objectives.end()) objectives.push_back(name);
  }
  std::vector<ScoreKind> kinds;
  if (!records.empty()) {
    for (const auto& a : records.front().auroc) kinds.push_back(a.kind);
  }

  auto summarize_group = [&](const std::string& objective, std::optional<double> alpha,
                             const std::vector<const RunRecord*>& group) {
    ReportRow row;
    row.objective = objective;
    row.alpha = alpha;
    row.runs = group.size();
    std::vector<double> train, test, robust;
    std::vector<std::vector<double>> auroc(kinds.size());
    for (const RunRecord* r : group) {
      if (r->diverged) ++row.diverged;
      if (!r->error.empty()) ++row.failed;
      // Diverged and failed runs already carry zeros.
      train.push_back(r->train_acc);
      test.push_back(r->test_acc);
      robust.push_back(r->robustness_auc);
      for (std::size_t k = 0; k < kinds.size(); ++k) {
        double v = 0.0;
        for (const auto& a : r->auroc) {
          if (a.kind == kinds[k]) v = a.mean;
        }
        auroc[k].push_back(v);
      }
    }
    row.train_acc = summarize(train);
    row.test_acc = summarize(test);
    row.robustness_auc = summarize(robust);
    for (std::size_t k = 0; k < kinds.size(); ++k) row.auroc.emplace_back(kinds[k], summarize(auroc[k]));
    return row;
  };

  Report report;
  for (const auto& objective : objectives) {
    std::map<double, std::vector<const RunRecord*>> by_alpha;
    std::vector<const RunRecord*> all;
    for (const auto& r : records) {
      if (objective_name(r.objective.kind) != objective) continue;
      by_alpha[r.objective.alpha].push_back(&r);
      all.push_back(&r);
    }
    for (const auto& [alpha, group] : by_alpha) report.rows.push_back(summarize_group(objective, alpha, group));
    report.rows.push_back(summarize_group(objective, std::nullopt, all));
  }
  return report;
}

void write_results_csv(std::ostream& out, std::span<const RunRecord> records) {
  std::vector<std::string> out_names;
  std::vector<ScoreKind> kinds;
  if (!records.empty()) {
    out_names = records.front().out_names;
    for (const auto& a : records.front().auroc) kinds.push_back(a.kind);
  }
  for (std::size_t c = 0; c < kFixedColumns.size(); ++c) out << (c ? "," : "") << kFixedColumns[c];
  for (auto kind : kinds) {
    for (const auto& name : out_names) out << ",auroc_" << score_name(kind) << '_' << name;
  }
  for (auto kind : kinds) out << ",auroc_" << score_name(kind) << "_mean";
  out << ",error,wall_time\n";

  for (const auto& r : records) {
    if (r.out_names != out_names || r.auroc.size() != kinds.size()) {
      throw std::invalid_argument("record " + r.run_id + " has different AUROC columns");
    }
    out << r.run_id << ',' << objective_name(r.objective.kind) << ',' << format_real(r.objective.alpha) << ','
        << r.batch_size << ',' << r.seed << ',' << format_real(r.learning_rate) << ',' << r.epochs << ','
        << (r.diverged ? 1 : 0) << ',' << format_real(r.train_acc) << ',' << format_real(r.test_acc) << ','
        << format_real(r.robustness_auc);
    for (const auto& a : r.auroc) {
      for (double v : a.per_out) out << ',' << format_real(v);
    }
    for (const auto& a : r.auroc) out << ',' << format_real(a.mean);
    out << ',' << sanitize(r.error) << ',' << format_real(r.wall_time) << '\n';
  }
}

std::vector<RunRecord> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("results CSV is empty");
  const auto header = split_csv_line(line);
  if (header.size() < kFixedColumns.size() + 2 ||
      !std::equal(kFixedColumns.begin(), kFixedColumns.end(), header.begin()) ||
      header[header.size() - 2] != "error" || header.back() != "wall_time") {
    throw std::invalid_argument("results CSV header does not match the expected columns");
  }

  struct AurocColumn {
    std::size_t kind_slot;
    std::optional<std::size_t> out_slot;  // empty for the mean column
  };
  std::vector<ScoreKind> kinds;
  std::vector<std::string> out_names;
  std::vector<AurocColumn> columns;
  for (std::size_t c = kFixedColumns.size(); c + 2 < header.size(); ++c) {
    auto [kind, outset] = parse_auroc_column(header[c]);
    auto kit = std::find(kinds.begin(), kinds.end(), kind);
    if (kit == kinds.end()) kit = kinds.insert(kinds.end(), kind);
    AurocColumn col{static_cast<std::size_t>(kit - kinds.begin()), std::nullopt};
    if (outset != "mean") {
      auto oit = std::find(out_names.begin(), out_names.end(), outset);
      if (oit == out_names.end()) oit = out_names.insert(out_names.end(), outset);
      col.out_slot = static_cast<std::size_t>(oit - out_names.begin());
    }
    columns.push_back(col);
  }

  std::vector<RunRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) throw std::invalid_argument("results CSV row has the wrong column count");
    RunRecord r;
    r.run_id = f[0];
    r.objective = {parse_objective(f[1]), parse_real(f[2])};
    r.batch_size = parse_uint(f[3]);
    r.seed = parse_uint(f[4]);
    r.learning_rate = parse_real(f[5]);
    r.epochs = parse_uint(f[6]);
    r.diverged = f[7] == "1";
    r.train_acc = parse_real(f[8]);
    r.test_acc = parse_real(f[9]);
    r.robustness_auc = parse_real(f[10]);
    r.out_names = out_names;
    for (auto kind : kinds) r.auroc.push_back({kind, std::vector<double>(out_names.size(), 0.0), 0.0});
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const double v = parse_real(f[kFixedColumns.size() + c]);
      auto& slot = r.auroc[columns[c].kind_slot];
      if (columns[c].out_slot) {
        slot.per_out[*columns[c].out_slot] = v;
      } else {
        slot.mean = v;
      }
    }
    r.error = f[f.size() - 2];
    r.wall_time = parse_real(f.back());
    records.push_back(std::move(r));
  }
  return records;
}

void write_report_csv(std::ostream& out, const Report& report) {
  out << "objective,alpha,runs,diverged,failed,train_acc_max,train_acc_mean,train_acc_std,"
         "test_acc_max,test_acc_mean,test_acc_std,robustness_auc_mean,robustness_auc_std";
  std::vector<ScoreKind> kinds;
  if (!report.rows.empty()) {
    for (const auto& [kind, s] : report.rows.front().auroc) kinds.push_back(kind);
  }
  for (auto kind : kinds) {
    const std::string n(score_name(kind));
    out << ",auroc_" << n << "_mean,auroc_" << n << "_std,auroc_" << n << "_max";
  }
  out << '\n';
  for (const auto& row : report.rows) {
    out << row.objective << ',' << (row.alpha ? format_real(*row.alpha) : std::string("all")) << ','
        << row.runs << ',' << row.diverged << ',' << row.failed << ',' << format_real(row.train_acc.max) << ','
        << format_real(row.train_acc.mean) << ',' << format_real(row.train_acc.std) << ','
        << format_real(row.test_acc.max) << ',' << format_real(row.test_acc.mean) << ','
        << format_real(row.test_acc.std) << ',' << format_real(row.robustness_auc.mean) << ','
        << format_real(row.robustness_auc.std);
    for (const auto& [kind, s] : row.auroc) {
      out << ',' << format_real(s.mean) << ',' << format_real(s.std) << ',' << format_real(s.max);
    }
    out << '\n';
  }
}

}  // namespace mpt
