// Acceptance checks, one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "idx_writer.hpp"
#include "mpt/data.hpp"
#include "mpt/harness.hpp"
#include "mpt/metrics.hpp"
#include "mpt/objectives.hpp"
#include "mpt/random.hpp"
#include "mpt/report.hpp"
#include "mpt/scores.hpp"
#include "mpt/verification.hpp"
#include "oracles.hpp"

using namespace mpt;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

int report(int id, const char* title, double limit_seconds, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  if (limit_seconds > 0 && seconds > limit_seconds) {
    out.passed = false;
    out.detail += " (over time limit)";
  }
  std::printf("%s criterion %d: %s [%.1fs] %s\n", out.passed ? "PASS" : "FAIL", id, title, seconds,
              out.detail.c_str());
  std::fflush(stdout);
  return out.passed ? 0 : 1;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Matrix oracle_energies(const NetworkSpec& spec, const std::vector<double>& params, const Matrix& inputs) {
  Matrix e(inputs.rows, spec.num_labels);
  for (std::size_t i = 0; i < inputs.rows; ++i) {
    const auto row = inputs.row(i);
    const auto out = oracle::forward_one(spec, params, {row.begin(), row.end()});
    for (std::size_t y = 0; y < out.size(); ++y) e(i, y) = out[y];
  }
  return e;
}

// Smallest |pre-activation| feeding any CReLU. Central differences with
// step h are only meaningful when this exceeds h comfortably.
double kink_margin(const NetworkSpec& spec, const ParameterVector& params, const Matrix& inputs) {
  const auto trace = forward_trace(spec, params, inputs);
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    if (!std::holds_alternative<CRelu>(spec.layers[l])) continue;
    for (double v : trace.activations[l].data) margin = std::min(margin, std::abs(v));
  }
  return margin;
}

// 1. Analytic gradients against central differences.
Outcome gradient_check() {
  Rng rng(101);
  double worst = 0.0;
  std::size_t checks = 0, redrawn = 0;
  const double alphas[] = {0.5, 1.0, 2.0, 8.0};
  for (auto kind : {ObjectiveKind::kCCE, ObjectiveKind::kJCE, ObjectiveKind::kJI}) {
    for (double alpha : alphas) {
      const ObjectiveConfig cfg{kind, alpha};
      for (int net = 0; net < 24; ++net) {
        const auto spec = net % 3 == 2 ? oracle::random_conv_spec(rng) : oracle::random_dense_spec(rng);
        const auto params = init_parameters(spec, rng.below(1u << 30));
        const std::size_t m = 1 + rng.below(6);
        auto inputs = oracle::random_matrix(rng, m, input_size(spec), -1.0, 1.0);
        while (kink_margin(spec, params, inputs) < 1e-4) {
          inputs = oracle::random_matrix(rng, m, input_size(spec), -1.0, 1.0);
          ++redrawn;
        }
        const auto labels = oracle::random_labels(rng, m, spec.num_labels);

        const auto upstream = batch_loss_gradient(cfg, forward(spec, params, inputs), labels);
        const auto analytic = backward(spec, params, inputs, upstream).values;
        const auto numeric = oracle::central_difference(
            [&](const std::vector<double>& p) { return batch_loss(cfg, oracle_energies(spec, p, inputs), labels).value; },
            params.values, 1e-6);
        worst = std::max(worst, oracle::relative_error(analytic, numeric));
        ++checks;
      }
    }
  }
  return {worst < 1e-4, fmt("%.0f networks, worst relative error %.3g (limit 1e-4), %.0f batches redrawn near a kink",
                            double(checks), worst, double(redrawn))};
}

// 2. Exact bound suite.
Outcome exact_suite() {
  const auto result = verify_exact_suite(2024, 1000);
  std::string detail;
  for (const auto& p : result.properties) {
    detail += p.name + (p.passed ? "=ok " : "=BROKEN ");
  }
  return {result.passed(), detail + "on 1000 instances"};
}

// 3. alpha = 1 CCE is softmax cross entropy.
Outcome alpha_one_recovery() {
  Rng rng(303);
  double worst_value = 0.0, worst_grad = 0.0;
  const ObjectiveConfig cfg{ObjectiveKind::kCCE, 1.0};
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t m = 1 + rng.below(16);
    const auto k = static_cast<std::uint32_t>(2 + rng.below(9));
    const auto e = oracle::random_matrix(rng, m, k, -8.0, 8.0);
    const auto labels = oracle::random_labels(rng, m, k);
    worst_value = std::max(worst_value, std::abs(batch_loss(cfg, e, labels).value - oracle::softmax_log_likelihood(e, labels)));
    const auto g = batch_loss_gradient(cfg, e, labels);
    const auto ref = oracle::softmax_log_likelihood_gradient(e, labels);
    for (std::size_t j = 0; j < g.data.size(); ++j) worst_grad = std::max(worst_grad, std::abs(g.data[j] - ref.data[j]));
  }
  return {worst_value <= 1e-9 && worst_grad <= 1e-9,
          fmt("worst loss gap %.3g, worst gradient gap %.3g (limit 1e-9)", worst_value, worst_grad)};
}

// 4. Fast AUROC against pairwise enumeration.
Outcome auroc_oracle() {
  Rng rng(404);
  double worst = 0.0;
  for (int s = 0; s < 500; ++s) {
    ScoreSample sample;
    const std::size_t n_in = 1 + rng.below(200), n_out = 1 + rng.below(200);
    const bool discrete = s % 2 == 0;
    auto draw = [&] { return discrete ? static_cast<double>(rng.below(5)) : rng.normal(); };
    for (std::size_t i = 0; i < n_in; ++i) sample.in_scores.push_back(draw());
    for (std::size_t i = 0; i < n_out; ++i) sample.out_scores.push_back(draw() - 0.5);
    worst = std::max(worst, std::abs(auroc(sample) - oracle::brute_auroc(sample.in_scores, sample.out_scores)));
  }
  return {worst <= 1e-12, fmt("500 samples, worst gap %.3g (limit 1e-12)", worst)};
}

NetworkSpec two_hidden(std::uint32_t hidden, std::uint32_t labels) {
  return {{Dense{2, hidden}, CRelu{}, Dense{2 * hidden, hidden}, CRelu{}, Dense{2 * hidden, labels}}, {2}, labels};
}

double mean_of(const std::vector<RunRecord>& records, ObjectiveKind kind, double alpha,
               const std::function<double(const RunRecord&)>& field) {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& r : records) {
    if (r.objective.kind == kind && r.objective.alpha == alpha) {
      total += field(r);
      ++n;
    }
  }
  return total / static_cast<double>(n);
}

// 5. Larger alpha keeps accuracy and avoids divergence at an aggressive rate.
Outcome generalization_trend() {
  const std::vector<Point2> centers{{-0.4, -0.3}, {0.4, 0.3}};
  const auto all = synth_blobs(200, 2, centers, 0.35, 55, "blobs");
  GridSpec grid;
  std::tie(grid.train_set, grid.test_set) = split(all, 0.7, 56);
  grid.objectives = {ObjectiveKind::kJCE, ObjectiveKind::kJI};
  grid.alpha_grid = {1.0, 2.0, 8.0};
  grid.batch_sizes = {32};
  grid.seed_count = 5;
  grid.learning_rate = 0.3;
  grid.epochs = 40;
  grid.seed = 5;
  grid.spec = two_hidden(16, 2);
  grid.evaluation.noise_levels = {0.5};
  const auto records = run_grid(grid, 1);

  bool ok = true;
  std::string detail;
  for (auto kind : grid.objectives) {
    const double base = mean_of(records, kind, 1.0, [](const RunRecord& r) { return r.test_acc; });
    detail += std::string(objective_name(kind)) + fmt(" a1=%.3f", base);
    for (double alpha : {2.0, 8.0}) {
      const double acc = mean_of(records, kind, alpha, [](const RunRecord& r) { return r.test_acc; });
      const double div = mean_of(records, kind, alpha, [](const RunRecord& r) { return r.diverged ? 5.0 : 0.0; });
      ok = ok && acc >= base - 0.02 && div == 0.0;
      detail += fmt(" a%g=%.3f(div %.0f)", alpha, acc, div);
    }
    const double div1 = mean_of(records, kind, 1.0, [](const RunRecord& r) { return r.diverged ? 5.0 : 0.0; });
    detail += fmt(" a1 diverged %.0f/5; ", div1);
  }
  return {ok, detail};
}

// 6. Max energy flags shifted blobs as out-of-distribution.
Outcome ood_trend() {
  const std::vector<Point2> centers{{-0.85, 0.85}, {0.85, -0.85}, {-0.85, -0.85}};
  const auto all = synth_blobs(150, 3, centers, 0.05, 1, "blobs");
  GridSpec grid;
  std::tie(grid.train_set, grid.test_set) = split(all, 0.7, 2);
  const std::vector<double> offset{1.0};
  grid.out_sets = {shift(all, offset, "shifted")};
  grid.objectives = {ObjectiveKind::kJCE, ObjectiveKind::kJI};
  grid.alpha_grid = {2.0};
  grid.batch_sizes = {32};
  grid.seed_count = 5;
  grid.learning_rate = 0.5;
  grid.epochs = 200;
  grid.seed = 6;
  grid.spec = two_hidden(16, 3);
  grid.evaluation.noise_levels = {0.5};
  const auto records = run_grid(grid, 1);

  auto score_mean = [](const RunRecord& r, ScoreKind k) {
    for (const auto& a : r.auroc)
      if (a.kind == k) return a.mean;
    return 0.0;
  };
  bool ok = true;
  std::string detail;
  for (auto kind : grid.objectives) {
    double energy = 0.0, max_energy = 0.0;
    int wins = 0;
    for (const auto& r : records) {
      if (r.objective.kind != kind) continue;
      energy += score_mean(r, ScoreKind::kEnergy) / 5.0;
      max_energy += score_mean(r, ScoreKind::kMaxEnergy) / 5.0;
      wins += score_mean(r, ScoreKind::kMaxEnergy) >= score_mean(r, ScoreKind::kSoftmax);
    }
    ok = ok && energy >= 0.9 && max_energy >= 0.9 && wins >= 4;
    detail += std::string(objective_name(kind)) +
              fmt(" energy=%.3f max_energy=%.3f max_energy>=softmax in %.0f/5; ", energy, max_energy, wins);
  }
  return {ok, detail};
}

// 7. Robustness AUC is the plain mean and every noisy coordinate is clamped.
Outcome robustness_protocol() {
  const std::vector<Point2> centers{{-0.5, -0.5}, {0.5, 0.5}};
  const auto all = synth_blobs(100, 2, centers, 0.3, 70, "blobs");
  const auto [train_set, test_set] = split(all, 0.7, 71);
  TrainConfig cfg;
  cfg.objective = {ObjectiveKind::kJCE, 2.0};
  cfg.learning_rate = 0.1;
  cfg.batch_size = 16;
  cfg.epochs = 20;
  cfg.seed = 72;
  cfg.spec = two_hidden(8, 2);
  const auto trained = train(cfg, train_set);
  EvaluationPlan plan;
  plan.noise_seed = 73;
  const auto rec = evaluate(cfg.spec, trained.params, test_set, {}, plan, &train_set, trained.diverged);

  bool ok = rec.robustness.levels.size() == 10 && rec.robustness.accuracies.size() == 10;
  double total = 0.0;
  for (double a : rec.robustness.accuracies) total += a;
  ok = ok && rec.robustness_auc == total / 10.0;

  std::size_t coords = 0, outside = 0;
  for (std::size_t k = 0; k < rec.robustness.levels.size(); ++k) {
    const double level = rec.robustness.levels[k];
    ok = ok && std::abs(level - 0.1 * static_cast<double>(k + 1)) < 1e-12;
    const auto noisy = perturb(test_set, {level, derive_seed(plan.noise_seed, {std::bit_cast<std::uint64_t>(level)})});
    for (double v : noisy.inputs.data) {
      ++coords;
      outside += !(v >= -1.0 && v <= 1.0);
    }
    ok = ok && accuracy(predict(cfg.spec, trained.params, noisy.inputs), noisy.labels) == rec.robustness.accuracies[k];
  }
  ok = ok && outside == 0;
  return {ok, fmt("auc %.6f vs mean %.6f; %.0f coordinates checked, %.0f outside [-1,1]", rec.robustness_auc, total / 10.0,
                  double(coords), double(outside))};
}

std::string results_without_wall_time(const std::vector<RunRecord>& records) {
  std::ostringstream csv;
  write_results_csv(csv, records);
  std::istringstream in(csv.str());
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

// 8. Reruns are byte-identical and a diverged cell is counted with zeros.
Outcome determinism_and_divergence() {
  const std::vector<Point2> centers{{-0.5, -0.5}, {0.5, 0.5}};
  const auto all = synth_blobs(60, 2, centers, 0.3, 80, "blobs");
  GridSpec grid;
  std::tie(grid.train_set, grid.test_set) = split(all, 0.75, 81);
  const std::vector<double> offset{0.8};
  grid.out_sets = {shift(grid.test_set, offset, "shifted")};
  grid.objectives = {ObjectiveKind::kCCE, ObjectiveKind::kJCE, ObjectiveKind::kJI};
  grid.alpha_grid = {1.0, 4.0};
  grid.batch_sizes = {16};
  grid.seed_count = 2;
  grid.learning_rate = 0.05;
  grid.epochs = 5;
  grid.seed = 8;
  grid.spec = two_hidden(6, 2);
  const auto first = results_without_wall_time(run_grid(grid, 1));
  const auto second = results_without_wall_time(run_grid(grid, 3));
  const bool identical = first == second;

  GridSpec blowup = grid;
  blowup.objectives = {ObjectiveKind::kCCE};
  blowup.alpha_grid = {1.0};
  blowup.seed_count = 1;
  blowup.learning_rate = 1e6;
  blowup.epochs = 50;
  const auto records = run_grid(blowup, 1);
  const auto& r = records.front();
  bool zeros = r.diverged && r.train_acc == 0.0 && r.test_acc == 0.0 && r.robustness_auc == 0.0;
  for (const auto& a : r.auroc) {
    zeros = zeros && a.mean == 0.0;
    for (double v : a.per_out) zeros = zeros && v == 0.0;
  }
  const auto agg = aggregate(records);
  const bool counted = !agg.rows.empty() && agg.rows.front().diverged == 1 && agg.rows.back().diverged == 1;
  return {identical && zeros && counted,
          std::string("rerun identical=") + (identical ? "yes" : "no") + " diverged zeros=" + (zeros ? "yes" : "no") +
              " diverged counted=" + (counted ? "yes" : "no")};
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool throws_containing(const std::function<void()>& f, const std::string& text) {
  try {
    f();
  } catch (const std::exception& e) {
    return std::string(e.what()).find(text) != std::string::npos;
  }
  return false;
}

// 9. IDX fixtures.
Outcome idx_fixtures() {
  const std::filesystem::path dir = MPT_FIXTURE_DIR;
  const auto images = read_bytes(dir / "four-images-idx3-ubyte");
  const auto labels = read_bytes(dir / "four-labels-idx1-ubyte");
  const auto ds = load_idx(dir / "four-images-idx3-ubyte", dir / "four-labels-idx1-ubyte");
  const bool round_trip = ds.size() == 4 && fixture::idx_images(ds, 28, 28) == images && fixture::idx_labels(ds) == labels;
  const bool magic = throws_containing(
      [&] { load_idx(dir / "four-images-idx3-ubyte", dir / "bad-magic-labels-idx1-ubyte"); }, "unexpected IDX magic");
  const bool truncated = throws_containing(
      [&] { load_idx(dir / "truncated-images-idx3-ubyte", dir / "four-labels-idx1-ubyte"); }, "truncated");
  return {round_trip && magic && truncated, std::string("round trip=") + (round_trip ? "yes" : "no") +
                                                " bad magic=" + (magic ? "yes" : "no") +
                                                " truncation=" + (truncated ? "yes" : "no")};
}

}  // namespace

int main() {
  int failed = 0;
  failed += report(1, "gradient correctness", 120, gradient_check);
  failed += report(2, "exact bound suite", 10, exact_suite);
  failed += report(3, "alpha=1 recovery", 0, alpha_one_recovery);
  failed += report(4, "AUROC oracle", 0, auroc_oracle);
  failed += report(5, "generalization trend", 600, generalization_trend);
  failed += report(6, "OOD trend", 600, ood_trend);
  failed += report(7, "robustness protocol", 0, robustness_protocol);
  failed += report(8, "determinism and divergence accounting", 0, determinism_and_divergence);
  failed += report(9, "IDX parsing", 0, idx_fixtures);
  return failed;
}
