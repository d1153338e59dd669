#include "mpt/config.hpp"

#include <fstream>
#include <stdexcept>

namespace mpt {
namespace {

template <typename T>
T required(const Json& j, const char* key) {
  if (!j.contains(key)) throw std::invalid_argument(std::string("config is missing field '") + key + "'");
  return j.at(key).get<T>();
}

std::uint32_t dim(const Json& j, const char* key) {
  const auto v = required<std::int64_t>(j, key);
  if (v <= 0) throw std::invalid_argument(std::string("layer field '") + key + "' must be positive");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

Json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  return Json::parse(in);
}

NetworkSpec network_spec_from_json(const Json& j) {
  NetworkSpec spec;
  spec.input_shape = required<Shape>(j, "input_shape");
  spec.num_labels = required<std::uint32_t>(j, "num_labels");
  for (const auto& layer : required<Json>(j, "layers")) {
    const auto type = required<std::string>(layer, "type");
    if (type == "dense") {
      spec.layers.emplace_back(Dense{dim(layer, "in_dim"), dim(layer, "out_dim")});
    } else if (type == "conv2d") {
      spec.layers.emplace_back(Conv2d{dim(layer, "in_channels"), dim(layer, "out_channels"),
                                      dim(layer, "kernel_size"), layer.contains("stride") ? dim(layer, "stride") : 1});
    } else if (type == "crelu") {
      spec.layers.emplace_back(CRelu{});
    } else if (type == "flatten") {
      spec.layers.emplace_back(Flatten{});
    } else {
      throw std::invalid_argument("unknown layer type '" + type + "'");
    }
  }
  validate(spec);
  return spec;
}

Json network_spec_to_json(const NetworkSpec& spec) {
  Json layers = Json::array();
  for (const auto& layer : spec.layers) {
    if (const auto* d = std::get_if<Dense>(&layer)) {
      layers.push_back({{"type", "dense"}, {"in_dim", d->in_dim}, {"out_dim", d->out_dim}});
    } else if (const auto* c = std::get_if<Conv2d>(&layer)) {
      layers.push_back({{"type", "conv2d"},
                        {"in_channels", c->in_channels},
                        {"out_channels", c->out_channels},
                        {"kernel_size", c->kernel_size},
                        {"stride", c->stride}});
    } else {
      layers.push_back({{"type", layer_name(layer)}});
    }
  }
  return {{"input_shape", spec.input_shape}, {"num_labels", spec.num_labels}, {"layers", layers}};
}

Dataset dataset_from_json(const Json& ref, const std::filesystem::path& base_dir) {
  const auto kind = required<std::string>(ref, "kind");
  Dataset ds;
  if (kind == "blobs") {
    std::vector<Point2> centers;
    for (const auto& c : required<Json>(ref, "centers")) centers.push_back(c.get<Point2>());
    ds = synth_blobs(required<std::size_t>(ref, "n_per_class"), required<std::uint32_t>(ref, "num_labels"),
                     centers, required<double>(ref, "spread"), ref.value("seed", std::uint64_t{0}),
                     ref.value("name", std::string("blobs")));
  } else if (kind == "idx") {
    auto resolve = [&](const char* key) {
      std::filesystem::path p = required<std::string>(ref, key);
      return p.is_absolute() ? p : base_dir / p;
    };
    ds = load_idx(resolve("images"), resolve("labels"));
    ds.name = ref.value("name", ds.name);
  } else {
    throw std::invalid_argument("unknown dataset kind '" + kind + "'");
  }
  if (ref.contains("shift")) {
    const Json& s = ref.at("shift");
    const auto offset = s.is_array() ? s.get<std::vector<double>>() : std::vector<double>{s.get<double>()};
    ds = shift(ds, offset, ds.name);
  }
  if (ref.contains("keep_labels")) {
    ds = select_labels(ds, ref.at("keep_labels").get<std::vector<std::uint32_t>>(), ds.name);
  }
  if (ref.contains("limit")) {
    const auto limit = std::min(ref.at("limit").get<std::size_t>(), ds.size());
    std::vector<std::size_t> first(limit);
    for (std::size_t i = 0; i < limit; ++i) first[i] = i;
    ds = subset(ds, first, ds.name);
  }
  validate(ds);
  return ds;
}

ExperimentData experiment_data_from_json(const Json& cfg, const std::filesystem::path& base_dir) {
  ExperimentData data;
  Dataset train_source = dataset_from_json(required<Json>(cfg, "train_set"), base_dir);
  if (cfg.contains("test_set")) {
    data.train_set = std::move(train_source);
    data.test_set = dataset_from_json(cfg.at("test_set"), base_dir);
  } else {
    auto [tr, te] = split(train_source, cfg.value("train_fraction", 0.8), cfg.value("split_seed", std::uint64_t{0}));
    data.train_set = std::move(tr);
    data.test_set = std::move(te);
  }
  if (cfg.contains("out_sets")) {
    for (const auto& ref : cfg.at("out_sets")) data.out_sets.push_back(dataset_from_json(ref, base_dir));
  }
  return data;
}

EvaluationPlan evaluation_plan_from_json(const Json& cfg) {
  EvaluationPlan plan;
  if (cfg.contains("score_kinds")) {
    plan.score_kinds.clear();
    for (const auto& s : cfg.at("score_kinds")) plan.score_kinds.push_back(parse_score(s.get<std::string>()));
  }
  if (cfg.contains("noise_levels")) plan.noise_levels = cfg.at("noise_levels").get<std::vector<double>>();
  plan.noise_seed = cfg.value("noise_seed", std::uint64_t{0});
  return plan;
}

TrainConfig train_config_from_json(const Json& cfg) {
  TrainConfig tc;
  const Json& obj = required<Json>(cfg, "objective");
  tc.objective = {parse_objective(required<std::string>(obj, "kind")), required<double>(obj, "alpha")};
  tc.learning_rate = cfg.value("learning_rate", 0.01);
  tc.batch_size = required<std::size_t>(cfg, "batch_size");
  tc.epochs = required<std::size_t>(cfg, "epochs");
  tc.seed = cfg.value("seed", std::uint64_t{0});
  tc.spec = network_spec_from_json(required<Json>(cfg, "spec"));
  validate(tc.objective);
  return tc;
}

GridSpec grid_spec_from_json(const Json& cfg, const std::filesystem::path& base_dir) {
  GridSpec grid;
  for (const auto& name : required<std::vector<std::string>>(cfg, "objectives")) {
    grid.objectives.push_back(parse_objective(name));
  }
  grid.alpha_grid = cfg.contains("alpha_grid") ? cfg.at("alpha_grid").get<std::vector<double>>() : default_alpha_grid();
  grid.batch_sizes = required<std::vector<std::size_t>>(cfg, "batch_sizes");
  grid.seed_count = cfg.value("seed_count", std::size_t{5});
  grid.learning_rate = cfg.value("learning_rate", 0.01);
  grid.epochs = required<std::size_t>(cfg, "epochs");
  grid.seed = cfg.value("seed", std::uint64_t{0});
  grid.spec = network_spec_from_json(required<Json>(cfg, "spec"));
  auto data = experiment_data_from_json(cfg, base_dir);
  grid.train_set = std::move(data.train_set);
  grid.test_set = std::move(data.test_set);
  grid.out_sets = std::move(data.out_sets);
  grid.evaluation = evaluation_plan_from_json(cfg);
  validate(grid);
  return grid;
}

}  // namespace mpt
