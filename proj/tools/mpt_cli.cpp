#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mpt/checkpoint.hpp"
#include "mpt/config.hpp"
#include "mpt/harness.hpp"
#include "mpt/metrics.hpp"
#include "mpt/report.hpp"
#include "mpt/verification.hpp"

namespace fs = std::filesystem;
using namespace mpt;

namespace {

struct Options {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  std::string checkpoint;
  std::string results;
  std::vector<std::string> scores;
  std::size_t instances = 1000;
};

std::ofstream open_output(const fs::path& dir, const std::string& file) {
  fs::create_directories(dir);
  std::ofstream out(dir / file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / file).string());
  return out;
}

struct Loaded {
  Json json;
  fs::path base_dir;
};

Loaded load(const Options& opt) {
  const fs::path path = opt.config;
  return {load_json_file(path), path.parent_path()};
}

TrainConfig single_run(const Options& opt, const Json& cfg) {
  auto tc = train_config_from_json(cfg);
  if (opt.seed) tc.seed = *opt.seed;
  return tc;
}

Checkpoint checkpoint_for(const Options& opt, const TrainConfig& tc, const ExperimentData& data) {
  if (!opt.checkpoint.empty()) return load_checkpoint(opt.checkpoint);
  std::clog << "no --checkpoint given, training from the config first\n";
  auto result = train(tc, data.train_set);
  return {tc.spec, std::move(result.params)};
}

int cmd_train(const Options& opt) {
  const auto [cfg, base] = load(opt);
  const auto tc = single_run(opt, cfg);
  const auto data = experiment_data_from_json(cfg, base);
  const auto result = train(tc, data.train_set);
  fs::create_directories(opt.out);
  save_checkpoint(fs::path(opt.out) / "model.mptf", tc.spec, result.params);
  if (result.diverged) {
    std::printf("diverged after %zu steps\n", result.steps);
    return 0;
  }
  const double train_acc = accuracy(predict(tc.spec, result.params, data.train_set.inputs), data.train_set.labels);
  const double test_acc = accuracy(predict(tc.spec, result.params, data.test_set.inputs), data.test_set.labels);
  std::printf("steps %zu  loss %s  train_acc %s  test_acc %s\n", result.steps, format_real(result.last_loss).c_str(),
              format_real(train_acc).c_str(), format_real(test_acc).c_str());
  return 0;
}

int cmd_evaluate(const Options& opt) {
  const auto [cfg, base] = load(opt);
  const auto tc = single_run(opt, cfg);
  const auto data = experiment_data_from_json(cfg, base);
  const auto model = checkpoint_for(opt, tc, data);
  auto rec = evaluate(model.spec, model.params, data.test_set, data.out_sets, evaluation_plan_from_json(cfg),
                      &data.train_set);
  rec.run_id = "evaluate";
  rec.objective = tc.objective;
  rec.batch_size = tc.batch_size;
  rec.seed = tc.seed;
  rec.learning_rate = tc.learning_rate;
  rec.epochs = tc.epochs;
  auto out = open_output(opt.out, "results.csv");
  const std::vector<RunRecord> records{rec};
  write_results_csv(out, records);
  write_results_csv(std::cout, records);
  return 0;
}

int cmd_ood(const Options& opt) {
  const auto [cfg, base] = load(opt);
  const auto tc = single_run(opt, cfg);
  const auto data = experiment_data_from_json(cfg, base);
  if (data.out_sets.empty()) throw std::invalid_argument("config lists no out_sets");
  std::vector<ScoreKind> kinds;
  for (const auto& s : opt.scores) kinds.push_back(parse_score(s));
  if (kinds.empty()) kinds = evaluation_plan_from_json(cfg).score_kinds;

  const auto model = checkpoint_for(opt, tc, data);
  const auto in = predict(model.spec, model.params, data.test_set.inputs);
  std::vector<EnergyTable> outs;
  for (const auto& ds : data.out_sets) outs.push_back(predict(model.spec, model.params, ds.inputs));

  auto out = open_output(opt.out, "ood.csv");
  out << "score,out_set,auroc\n";
  for (auto kind : kinds) {
    std::vector<double> per;
    for (std::size_t k = 0; k < outs.size(); ++k) {
      per.push_back(ood_auroc(kind, in, outs[k]));
      out << score_name(kind) << ',' << data.out_sets[k].name << ',' << format_real(per.back()) << '\n';
    }
    const double mean = mean_auroc(per);
    out << score_name(kind) << ",mean," << format_real(mean) << '\n';
    std::printf("%-10s mean auroc %s\n", std::string(score_name(kind)).c_str(), format_real(mean).c_str());
  }
  return 0;
}

int cmd_robustness(const Options& opt) {
  const auto [cfg, base] = load(opt);
  const auto tc = single_run(opt, cfg);
  const auto data = experiment_data_from_json(cfg, base);
  const auto plan = evaluation_plan_from_json(cfg);
  const auto model = checkpoint_for(opt, tc, data);
  const auto curve = robustness_curve(model.spec, model.params, data.test_set, plan.noise_levels, plan.noise_seed);
  auto out = open_output(opt.out, "robustness.csv");
  out << "level,accuracy\n";
  for (std::size_t k = 0; k < curve.levels.size(); ++k) {
    out << format_real(curve.levels[k]) << ',' << format_real(curve.accuracies[k]) << '\n';
  }
  std::printf("robustness_auc %s\n", format_real(robustness_auc(curve)).c_str());
  return 0;
}

int cmd_grid(const Options& opt) {
  const auto [cfg, base] = load(opt);
  auto grid = grid_spec_from_json(cfg, base);
  if (opt.seed) grid.seed = *opt.seed;
  std::clog << "running " << grid.total_runs() << " cells on " << opt.jobs << " worker(s)\n";
  const auto records = run_grid(grid, opt.jobs);
  auto results = open_output(opt.out, "results.csv");
  write_results_csv(results, records);
  auto report = open_output(opt.out, "report.csv");
  write_report_csv(report, aggregate(records));
  std::size_t diverged = 0, failed = 0;
  for (const auto& r : records) {
    diverged += r.diverged;
    failed += !r.error.empty();
  }
  std::printf("%zu runs, %zu diverged, %zu failed\n", records.size(), diverged, failed);
  return 0;
}

int cmd_report(const Options& opt) {
  std::ifstream in(opt.results);
  if (!in) throw std::runtime_error("cannot read " + opt.results);
  const auto records = read_results_csv(in);
  const auto agg = aggregate(records);
  auto out = open_output(opt.out, "report.csv");
  write_report_csv(out, agg);
  write_report_csv(std::cout, agg);
  return 0;
}

int cmd_verify(const Options& opt) {
  const auto result = verify_exact_suite(opt.seed.value_or(0), opt.instances);
  for (const auto& p : result.properties) {
    std::printf("%-4s %s (%zu checks, worst %.3g)\n", p.passed ? "ok" : "FAIL", p.name.c_str(), p.checks, p.worst);
  }
  return result.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-based classifier training with softmin-bound regularization"};
  app.require_subcommand(1);
  Options opt;
  int (*run)(const Options&) = nullptr;

  auto add = [&](const char* name, const char* help, int (*fn)(const Options&)) {
    auto* sub = app.add_subcommand(name, help);
    sub->callback([&run, fn] { run = fn; });
    return sub;
  };
  auto with_config = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--seed", opt.seed, "override the config seed");
    return sub;
  };

  with_config(add("train", "train one network and write model.mptf", cmd_train));
  with_config(add("evaluate", "accuracy, robustness and OOD AUROC for one model", cmd_evaluate))
      ->add_option("--checkpoint", opt.checkpoint, "trained model")->check(CLI::ExistingFile);
  auto* ood = with_config(add("ood", "AUROC of selected scores against the out_sets", cmd_ood));
  ood->add_option("--checkpoint", opt.checkpoint, "trained model")->check(CLI::ExistingFile);
  ood->add_option("--scores", opt.scores, "energy | max_energy | softmax")->delimiter(',');
  with_config(add("robustness", "accuracy per noise level", cmd_robustness))
      ->add_option("--checkpoint", opt.checkpoint, "trained model")->check(CLI::ExistingFile);
  with_config(add("grid", "run an experiment grid and write results.csv and report.csv", cmd_grid))
      ->add_option("--jobs", opt.jobs, "parallel cells")->check(CLI::PositiveNumber);
  auto* rep = add("report", "aggregate an existing results.csv", cmd_report);
  rep->add_option("--results", opt.results, "results CSV")->required()->check(CLI::ExistingFile);
  rep->add_option("--out", opt.out, "output directory");
  auto* verify = add("verify", "exact-distribution property suite", cmd_verify);
  verify->add_option("--seed", opt.seed, "instance seed");
  verify->add_option("--instances", opt.instances, "random instances")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);
  try {
    return run(opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
