#include "fledge/io/config.hpp"

#include <fstream>

namespace fledge::io {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw std::invalid_argument("config: " + path + " " + why);
}

const json& member(const json& j, const std::string& parent, const std::string& key) {
  auto it = j.find(key);
  if (it == j.end()) fail(parent + "." + key, "is missing");
  return *it;
}

double number(const json& j, const std::string& parent, const std::string& key) {
  const json& v = member(j, parent, key);
  if (!v.is_number()) fail(parent + "." + key, "must be a number");
  return v.get<double>();
}

double positive(const json& j, const std::string& parent, const std::string& key) {
  double v = number(j, parent, key);
  if (!(v > 0.0)) fail(parent + "." + key, "must be positive");
  return v;
}

std::vector<double> positive_array(const json& j, const std::string& parent,
                                   const std::string& key, std::size_t want) {
  const json& v = member(j, parent, key);
  if (!v.is_array()) fail(parent + "." + key, "must be an array");
  if (v.size() != want) {
    fail(parent + "." + key, "must have " + std::to_string(want) + " entries");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number() || !(v[i].get<double>() > 0.0)) {
      fail(parent + "." + key + "[" + std::to_string(i) + "]", "must be positive");
    }
    out.push_back(v[i].get<double>());
  }
  return out;
}

}  // namespace

opt::Mode mode_from_name(const std::string& name, const json& params) {
  if (name == "constant") return opt::FixedConstant{positive(params, "mode", "gamma")};
  if (name == "exponential") {
    return opt::FixedExponential{positive(params, "mode", "gamma"),
                                 positive(params, "mode", "decay")};
  }
  if (name == "diminishing") {
    return opt::FixedDiminishing{positive(params, "mode", "gamma"),
                                 positive(params, "mode", "offset")};
  }
  if (name == "full") return opt::FullOptimization{};
  fail("mode.rule", "must be one of constant|exponential|diminishing|full");
}

RunConfig config_from_json(const json& j) {
  RunConfig cfg;

  const json& sys = member(j, "", "system");
  int workers = static_cast<int>(positive(sys, "system", "workers"));
  cfg.system.num_workers = workers;
  cfg.system.model_dim = static_cast<int>(positive(sys, "system", "model_dim"));
  std::size_t want = static_cast<std::size_t>(workers) + 1;
  cfg.system.cpu_freq = positive_array(sys, "system", "cpu_freq", want);
  cfg.system.tx_power = positive_array(sys, "system", "tx_power", want);
  cfg.system.rate = positive_array(sys, "system", "rate", want);
  cfg.system.cycles = positive_array(sys, "system", "cycles", want);
  cfg.system.switched_cap = positive_array(sys, "system", "switched_cap", want);
  const json& levels = member(sys, "system", "quant_level");
  if (!levels.is_array() || levels.size() != want) {
    fail("system.quant_level", "must have N+1 entries");
  }
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const json& v = levels[i];
    std::uint64_t s;
    if (v.is_string() && (v == "inf" || v == "none")) {
      s = cost::kNoQuantization;
    } else if (v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0)) {
      s = v.get<std::uint64_t>();
    } else {
      fail("system.quant_level[" + std::to_string(i) + "]",
           "must be a nonnegative integer or \"inf\"");
    }
    cfg.system.quant_level.push_back(s);
  }
  if (sys.contains("q_table")) {
    for (const auto& [key, val] : sys.at("q_table").items()) {
      cfg.system.q_table[std::stoull(key)] = val.get<double>();
    }
  }
  if (sys.contains("bits_table")) {
    for (const auto& [key, val] : sys.at("bits_table").items()) {
      cfg.system.bits_table[std::stoull(key)] = val.get<double>();
    }
  }
  cfg.system.validate();

  if (j.contains("ml")) {
    const json& ml = j.at("ml");
    cost::MlConstants c;
    c.smooth_L = positive(ml, "ml", "smooth_L");
    c.grad_noise = positive(ml, "ml", "grad_noise");
    c.grad_bound = positive(ml, "ml", "grad_bound");
    c.f_init = number(ml, "ml", "f_init");
    c.f_star_lb = ml.contains("f_star_lb") ? ml.at("f_star_lb").get<double>() : 0.0;
    c.dim = static_cast<int>(positive(ml, "ml", "dim"));
    c.validate();
    cfg.ml = c;
  }

  const json& lim = member(j, "", "limits");
  cfg.limits.time_max = positive(lim, "limits", "time_max");
  cfg.limits.conv_error_max = positive(lim, "limits", "conv_error_max");

  if (j.contains("mode")) {
    const json& m = j.at("mode");
    cfg.mode = mode_from_name(member(m, "mode", "rule").get<std::string>(), m);
  }

  if (j.contains("optimizer")) {
    const json& o = j.at("optimizer");
    if (o.contains("rel_tol")) cfg.optimizer.rel_tol = positive(o, "optimizer", "rel_tol");
    if (o.contains("max_outer")) {
      cfg.optimizer.max_outer = static_cast<int>(positive(o, "optimizer", "max_outer"));
    }
    if (o.contains("samples_per_worker")) {
      cfg.optimizer.equivalent.samples_per_worker =
          positive(o, "optimizer", "samples_per_worker");
    }
    if (o.contains("kkt_tol")) cfg.optimizer.gp.kkt_tol = positive(o, "optimizer", "kkt_tol");
    if (o.contains("feas_tol")) cfg.optimizer.feas_tol = positive(o, "optimizer", "feas_tol");
  }

  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    DatasetConfig& ds = cfg.dataset;
    if (d.contains("kind")) ds.kind = d.at("kind").get<std::string>();
    if (ds.kind != "synthetic-quadratic" && ds.kind != "synthetic-logistic" &&
        ds.kind != "idx" && ds.kind != "generated-digits") {
      fail("dataset.kind", "unknown kind '" + ds.kind + "'");
    }
    if (d.contains("dimension")) ds.dimension = static_cast<int>(positive(d, "dataset", "dimension"));
    if (d.contains("samples_per_worker")) {
      ds.samples_per_worker = static_cast<int>(positive(d, "dataset", "samples_per_worker"));
    }
    if (d.contains("images")) ds.images_path = d.at("images").get<std::string>();
    if (d.contains("labels")) ds.labels_path = d.at("labels").get<std::string>();
    if (d.contains("test_images")) ds.test_images_path = d.at("test_images").get<std::string>();
    if (d.contains("test_labels")) ds.test_labels_path = d.at("test_labels").get<std::string>();
    if (d.contains("subset")) ds.subset = d.at("subset").get<int>();
    if (d.contains("generated_count")) {
      ds.generated_count = static_cast<int>(positive(d, "dataset", "generated_count"));
    }
    if (d.contains("hidden")) ds.hidden = static_cast<int>(positive(d, "dataset", "hidden"));
  }

  if (j.contains("simulation") && j.at("simulation").contains("trials")) {
    cfg.sim_trials = static_cast<int>(positive(j.at("simulation"), "simulation", "trials"));
  }
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config: " + path + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

nlohmann::json config_to_json(const RunConfig& cfg) {
  json j;
  json sys;
  sys["workers"] = cfg.system.num_workers;
  sys["model_dim"] = cfg.system.model_dim;
  sys["cpu_freq"] = cfg.system.cpu_freq;
  sys["tx_power"] = cfg.system.tx_power;
  sys["rate"] = cfg.system.rate;
  sys["cycles"] = cfg.system.cycles;
  sys["switched_cap"] = cfg.system.switched_cap;
  sys["quant_level"] = cfg.system.quant_level;
  if (!cfg.system.q_table.empty()) {
    json t;
    for (const auto& [k, v] : cfg.system.q_table) t[std::to_string(k)] = v;
    sys["q_table"] = t;
  }
  if (!cfg.system.bits_table.empty()) {
    json t;
    for (const auto& [k, v] : cfg.system.bits_table) t[std::to_string(k)] = v;
    sys["bits_table"] = t;
  }
  j["system"] = sys;

  if (cfg.ml) {
    j["ml"] = {{"smooth_L", cfg.ml->smooth_L},   {"grad_noise", cfg.ml->grad_noise},
               {"grad_bound", cfg.ml->grad_bound}, {"f_init", cfg.ml->f_init},
               {"f_star_lb", cfg.ml->f_star_lb},   {"dim", cfg.ml->dim}};
  }
  j["limits"] = {{"time_max", cfg.limits.time_max},
                 {"conv_error_max", cfg.limits.conv_error_max}};

  json m;
  if (const auto* c = std::get_if<opt::FixedConstant>(&cfg.mode)) {
    m = {{"rule", "constant"}, {"gamma", c->gamma}};
  } else if (const auto* e = std::get_if<opt::FixedExponential>(&cfg.mode)) {
    m = {{"rule", "exponential"}, {"gamma", e->gamma}, {"decay", e->decay}};
  } else if (const auto* d = std::get_if<opt::FixedDiminishing>(&cfg.mode)) {
    m = {{"rule", "diminishing"}, {"gamma", d->gamma}, {"offset", d->offset}};
  } else {
    m = {{"rule", "full"}};
  }
  j["mode"] = m;

  j["optimizer"] = {{"rel_tol", cfg.optimizer.rel_tol},
                    {"max_outer", cfg.optimizer.max_outer}};
  if (cfg.optimizer.equivalent.samples_per_worker > 0.0) {
    j["optimizer"]["samples_per_worker"] = cfg.optimizer.equivalent.samples_per_worker;
  }

  json d;
  d["kind"] = cfg.dataset.kind;
  d["dimension"] = cfg.dataset.dimension;
  d["samples_per_worker"] = cfg.dataset.samples_per_worker;
  d["hidden"] = cfg.dataset.hidden;
  d["generated_count"] = cfg.dataset.generated_count;
  if (!cfg.dataset.images_path.empty()) d["images"] = cfg.dataset.images_path;
  if (!cfg.dataset.labels_path.empty()) d["labels"] = cfg.dataset.labels_path;
  if (!cfg.dataset.test_images_path.empty()) d["test_images"] = cfg.dataset.test_images_path;
  if (!cfg.dataset.test_labels_path.empty()) d["test_labels"] = cfg.dataset.test_labels_path;
  if (cfg.dataset.subset > 0) d["subset"] = cfg.dataset.subset;
  j["dataset"] = d;

  j["simulation"] = {{"trials", cfg.sim_trials}};
  j["seed"] = cfg.seed;
  return j;
}

void save_config(const std::string& path, const RunConfig& cfg) {
  save_json(path, config_to_json(cfg));
}

BuiltProblem build_problem(const RunConfig& cfg) {
  BuiltProblem out;
  const DatasetConfig& ds = cfg.dataset;
  if (ds.kind == "synthetic-quadratic" || ds.kind == "synthetic-logistic") {
    out.problem = make_synthetic(ds.kind == "synthetic-quadratic" ? SyntheticKind::Quadratic
                                                                  : SyntheticKind::Logistic,
                                 ds.dimension, ds.samples_per_worker, cfg.system.num_workers,
                                 cfg.seed);
    return out;
  }
  IdxData images, labels;
  if (ds.kind == "idx") {
    images = load_idx(ds.images_path);
    labels = load_idx(ds.labels_path);
    if (ds.subset > 0 && ds.subset < images.count()) {
      std::size_t item = images.item_size();
      images.bytes.resize(std::size_t(ds.subset) * item);
      images.shape[0] = static_cast<std::uint32_t>(ds.subset);
      labels.bytes.resize(ds.subset);
      labels.shape[0] = static_cast<std::uint32_t>(ds.subset);
    }
    if (!ds.test_images_path.empty()) {
      out.eval = GeneratedDataset{load_idx(ds.test_images_path), load_idx(ds.test_labels_path)};
    }
  } else {  // generated-digits
    GeneratedDataset train = generate_digit_dataset(ds.generated_count, cfg.seed);
    images = std::move(train.images);
    labels = std::move(train.labels);
    out.eval = generate_digit_dataset(std::max(200, ds.generated_count / 5), cfg.seed + 1);
  }
  ShardPlan plan = make_shard_plan(images.count(), cfg.system.num_workers, cfg.seed);
  auto mlp = std::make_unique<MlpProblem>(images, labels, plan, ds.hidden);
  out.classifier = mlp.get();
  out.problem = std::move(mlp);
  return out;
}

nlohmann::json report_to_json(const opt::OptimizerReport& report, const std::string& mode,
                              const std::string& baseline) {
  json j;
  j["status"] = opt::to_string(report.status);
  j["mode"] = mode;
  j["baseline"] = baseline;
  j["outer_iterations"] = report.outer_iterations;
  j["kkt_residual"] = report.kkt_residual;
  j["max_iterate_violation"] = report.max_iterate_violation;
  j["energy_trace"] = report.energy_trace;
  j["final"] = {{"energy", report.final_energy}};
  for (const auto& [name, value] : report.final_point) j["final"][name] = value;
  if (report.status == opt::OptStatus::Converged ||
      report.status == opt::OptStatus::MaxIterations) {
    json r;
    r["iterations"] = report.rounded.iterations;
    r["batch"] = report.rounded.batch;
    r["energy"] = report.rounded_energy;
    r["time"] = report.rounded_time;
    r["conv_error"] = report.rounded_conv_error;
    if (const auto* c = std::get_if<cost::ConstantStep>(&report.rounded.rule)) {
      r["rule"] = {{"rule", "constant"}, {"gamma", c->gamma}};
    } else if (const auto* e = std::get_if<cost::ExponentialStep>(&report.rounded.rule)) {
      r["rule"] = {{"rule", "exponential"}, {"gamma", e->gamma}, {"decay", e->decay}};
    } else if (const auto* dd = std::get_if<cost::DiminishingStep>(&report.rounded.rule)) {
      r["rule"] = {{"rule", "diminishing"}, {"gamma", dd->gamma}, {"offset", dd->offset}};
    }
    j["rounded"] = r;
  }
  return j;
}

void save_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  json j;
  in >> j;
  return j;
}

cost::AlgorithmParams params_from_report(const nlohmann::json& report) {
  const json& r = report.contains("rounded") ? report.at("rounded") : report;
  cost::AlgorithmParams p;
  p.iterations = r.at("iterations").get<std::vector<double>>();
  p.batch = r.at("batch").get<double>();
  const json& rule = r.at("rule");
  std::string kind = rule.at("rule").get<std::string>();
  if (kind == "constant") {
    p.rule = cost::ConstantStep{rule.at("gamma").get<double>()};
  } else if (kind == "exponential") {
    p.rule = cost::ExponentialStep{rule.at("gamma").get<double>(), rule.at("decay").get<double>()};
  } else if (kind == "diminishing") {
    p.rule = cost::DiminishingStep{rule.at("gamma").get<double>(), rule.at("offset").get<double>()};
  } else {
    throw std::invalid_argument("report: unknown rule '" + kind + "'");
  }
  return p;
}

}  // namespace fledge::io
