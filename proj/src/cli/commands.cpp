#include "fledge/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <iostream>

#include "CLI11.hpp"

#include "fledge/cost/estimate.hpp"
#include "fledge/io/config.hpp"
#include "fledge/io/csv.hpp"
#include "fledge/sim/metric.hpp"

namespace fledge::cli {

namespace {

using nlohmann::json;

int status_exit_code(opt::OptStatus s) {
  switch (s) {
    case opt::OptStatus::Converged: return 0;
    case opt::OptStatus::Infeasible: return 2;
    case opt::OptStatus::MaxIterations: return 3;
    case opt::OptStatus::RoundingFailed: return 4;
  }
  return 1;
}

opt::Baseline baseline_from_name(const std::string& name) {
  if (name == "none") return opt::Baseline::None;
  if (name == "pm") return opt::Baseline::PmSgd;
  if (name == "fa") return opt::Baseline::FedAvg;
  if (name == "pr") return opt::Baseline::PrSgd;
  throw CLI::ValidationError("--baseline must be one of none|pm|fa|pr");
}

opt::Mode mode_override(const io::RunConfig& cfg, const std::string& name) {
  if (name.empty()) return cfg.mode;
  json params;
  if (const auto* c = std::get_if<opt::FixedConstant>(&cfg.mode)) {
    params["gamma"] = c->gamma;
  } else if (const auto* e = std::get_if<opt::FixedExponential>(&cfg.mode)) {
    params["gamma"] = e->gamma;
    params["decay"] = e->decay;
  } else if (const auto* d = std::get_if<opt::FixedDiminishing>(&cfg.mode)) {
    params["gamma"] = d->gamma;
    params["offset"] = d->offset;
  }
  // Conventional defaults when the config's mode carries no parameters for
  // the requested rule.
  if (!params.contains("gamma")) params["gamma"] = 0.01;
  if (name == "exponential" && !params.contains("decay")) params["decay"] = 0.9995;
  if (name == "diminishing" && !params.contains("offset")) params["offset"] = 600.0;
  return io::mode_from_name(name, params);
}

struct SweepAxis {
  std::string name;                   // Cmax | Tmax | Fratio | sratio
  double value = 0.0;
};

io::RunConfig apply_axis(io::RunConfig cfg, const SweepAxis& axis) {
  if (axis.name == "Cmax") {
    cfg.limits.conv_error_max = axis.value;
  } else if (axis.name == "Tmax") {
    cfg.limits.time_max = axis.value;
  } else if (axis.name == "Fratio") {
    // Two worker classes (first half / second half) around the preserved
    // class-mean frequency.
    int n = cfg.system.num_workers;
    double mean = 0.0;
    for (int i = 1; i <= n; ++i) mean += cfg.system.cpu_freq[i];
    mean /= n;
    double f1 = 2.0 * mean * axis.value / (1.0 + axis.value);
    double f2 = 2.0 * mean / (1.0 + axis.value);
    for (int i = 1; i <= n; ++i) cfg.system.cpu_freq[i] = (i <= n / 2 || n == 1) ? f1 : f2;
  } else if (axis.name == "sratio") {
    int n = cfg.system.num_workers;
    double mean = 0.0;
    for (int i = 1; i <= n; ++i) mean += static_cast<double>(cfg.system.quant_level[i]);
    mean /= n;
    auto s1 = static_cast<std::uint64_t>(
        std::max(1.0, std::round(2.0 * mean * axis.value / (1.0 + axis.value))));
    auto s2 = static_cast<std::uint64_t>(
        std::max(1.0, std::round(2.0 * mean / (1.0 + axis.value))));
    for (int i = 1; i <= n; ++i) cfg.system.quant_level[i] = (i <= n / 2 || n == 1) ? s1 : s2;
  } else {
    throw CLI::ValidationError("--var must be one of Cmax|Tmax|Fratio|sratio");
  }
  return cfg;
}

io::SweepRow sweep_point(const io::RunConfig& base, const SweepAxis& axis,
                         const std::string& mode_name, opt::Baseline baseline) {
  io::RunConfig cfg = apply_axis(base, axis);
  opt::Mode mode = mode_override(cfg, mode_name);
  auto report = baseline == opt::Baseline::None
                    ? opt::optimize(mode, cfg.system, *cfg.ml, cfg.limits, cfg.optimizer)
                    : opt::baseline_optimize(baseline, mode, cfg.system, *cfg.ml, cfg.limits,
                                             cfg.optimizer);
  io::SweepRow row;
  row.sweep_value = axis.value;
  row.mode = mode_name;
  row.status = opt::to_string(report.status);
  if (report.status == opt::OptStatus::Converged ||
      report.status == opt::OptStatus::MaxIterations) {
    row.energy = report.rounded_energy;
    row.time = report.rounded_time;
    row.conv_error = report.rounded_conv_error;
    row.iterations = report.rounded.iterations;
    row.batch = report.rounded.batch;
    if (const auto* c = std::get_if<cost::ConstantStep>(&report.rounded.rule)) {
      row.gamma_param = c->gamma;
    } else if (const auto* e = std::get_if<cost::ExponentialStep>(&report.rounded.rule)) {
      row.gamma_param = e->gamma;
      row.rho_param = e->decay;
    } else if (const auto* d = std::get_if<cost::DiminishingStep>(&report.rounded.rule)) {
      row.gamma_param = d->gamma;
      row.rho_param = d->offset;
    }
  }
  return row;
}

int cmd_optimize(const std::string& config_path, const std::string& mode_name,
                 const std::string& baseline_name, const std::string& out_path) {
  io::RunConfig cfg = io::load_config(config_path);
  if (!cfg.ml) {
    std::cerr << "config: ml constants are required for optimize\n";
    return 1;
  }
  opt::Mode mode = mode_override(cfg, mode_name);
  opt::Baseline baseline = baseline_from_name(baseline_name);
  auto report = baseline == opt::Baseline::None
                    ? opt::optimize(mode, cfg.system, *cfg.ml, cfg.limits, cfg.optimizer)
                    : opt::baseline_optimize(baseline, mode, cfg.system, *cfg.ml, cfg.limits,
                                             cfg.optimizer);
  json j = io::report_to_json(report, opt::mode_name(mode), baseline_name);
  if (!out_path.empty()) io::save_json(out_path, j);
  std::cout << "optimize: " << opt::to_string(report.status)
            << " energy=" << report.rounded_energy << " kkt=" << report.kkt_residual << "\n";
  return status_exit_code(report.status);
}

int cmd_sweep(const std::string& config_path, const std::string& var, std::vector<double> grid,
              std::vector<std::string> modes, const std::string& baseline_name,
              const std::string& out_path, int jobs) {
  io::RunConfig cfg = io::load_config(config_path);
  if (!cfg.ml) {
    std::cerr << "config: ml constants are required for sweep\n";
    return 1;
  }
  opt::Baseline baseline = baseline_from_name(baseline_name);

  std::vector<double> unique_grid;
  for (double v : grid) {
    if (std::find(unique_grid.begin(), unique_grid.end(), v) != unique_grid.end()) {
      std::cerr << "sweep: duplicate grid value " << v << " ignored\n";
      continue;
    }
    unique_grid.push_back(v);
  }

  struct Task {
    SweepAxis axis;
    std::string mode;
  };
  std::vector<Task> tasks;
  for (double v : unique_grid) {
    for (const auto& m : modes) tasks.push_back({{var, v}, m});
  }

  std::vector<io::SweepRow> rows(tasks.size());
  const int pool = std::max(1, jobs);
  for (std::size_t begin = 0; begin < tasks.size(); begin += pool) {
    std::size_t end = std::min(tasks.size(), begin + pool);
    std::vector<std::future<io::SweepRow>> futs;
    for (std::size_t i = begin; i < end; ++i) {
      futs.push_back(std::async(std::launch::async, [&, i] {
        return sweep_point(cfg, tasks[i].axis, tasks[i].mode, baseline);
      }));
    }
    for (std::size_t i = begin; i < end; ++i) rows[i] = futs[i - begin].get();
  }
  io::write_sweep_csv(out_path, cfg.system.num_workers, rows);
  std::cout << "sweep: " << rows.size() << " rows -> " << out_path << "\n";
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& params_path, int trials,
                 const std::string& out_path, bool with_metric) {
  io::RunConfig cfg = io::load_config(config_path);
  io::BuiltProblem built = io::build_problem(cfg);

  cost::AlgorithmParams params;
  if (!params_path.empty()) {
    params = io::params_from_report(io::load_json(params_path));
  } else {
    if (!cfg.ml) {
      std::cerr << "config: ml constants are required to optimize parameters\n";
      return 1;
    }
    auto report = opt::optimize(cfg.mode, cfg.system, *cfg.ml, cfg.limits, cfg.optimizer);
    if (report.status == opt::OptStatus::Infeasible ||
        report.status == opt::OptStatus::RoundingFailed) {
      std::cerr << "simulate: optimizer returned " << opt::to_string(report.status) << "\n";
      return status_exit_code(report.status);
    }
    params = report.rounded;
  }
  if (trials <= 0) trials = cfg.sim_trials;

  json j;
  j["trials"] = trials;
  j["rounds"] = params.k0();
  j["iterations"] = params.iterations;
  j["batch"] = params.batch;
  json per_trial = json::array();
  for (int t = 0; t < trials; ++t) {
    sim::SimOptions opts;
    opts.seed = cfg.seed + static_cast<std::uint64_t>(t);
    opts.record = with_metric ? sim::RecordLevel::SyncAverages : sim::RecordLevel::Loss;
    sim::Trajectory traj = run_genqsgd(*built.problem, params, cfg.system, opts);
    json entry;
    entry["seed"] = opts.seed;
    entry["final_loss"] = traj.losses.back();
    if (t == 0) j["per_round_loss"] = traj.losses;
    double up = 0.0, down = traj.initial_broadcast_bits;
    for (double b : traj.uplink_bits) up += b;
    for (double b : traj.downlink_bits) down += b;
    entry["uplink_bits"] = up;
    entry["downlink_bits"] = down;
    if (with_metric) entry["metric"] = sim::convergence_metric(traj, *built.problem);
    if (built.classifier && built.eval) {
      entry["test_accuracy"] =
          built.classifier->accuracy(traj.final_model, built.eval->images, built.eval->labels);
    }
    per_trial.push_back(entry);
  }
  j["runs"] = per_trial;
  if (!out_path.empty()) io::save_json(out_path, j);
  std::cout << "simulate: " << trials << " trial(s), final loss "
            << per_trial.back().at("final_loss").get<double>() << "\n";
  return 0;
}

int cmd_estimate(const std::string& config_path, int budget, double safety,
                 const std::string& out_path) {
  io::RunConfig cfg = io::load_config(config_path);
  io::BuiltProblem built = io::build_problem(cfg);
  cost::EstimateOptions opts;
  opts.sample_budget = budget;
  opts.safety_factor = safety;
  opts.seed = cfg.seed;
  cost::MlConstants ml = cost::estimate_ml_constants(*built.problem, opts);
  cfg.ml = ml;
  if (cfg.system.model_dim != ml.dim) {
    std::cerr << "estimate: note, system.model_dim " << cfg.system.model_dim
              << " differs from problem dimension " << ml.dim << "\n";
  }
  io::save_config(out_path, cfg);
  std::cout << "estimate: L=" << ml.smooth_L << " sigma=" << ml.grad_noise
            << " G=" << ml.grad_bound << " f_init=" << ml.f_init << " -> " << out_path << "\n";
  return 0;
}

int cmd_validate_bound(const std::string& config_path, int instances, int trials,
                       double threshold, const std::string& out_path) {
  io::RunConfig cfg = io::load_config(config_path);
  if (!cfg.ml) {
    std::cerr << "config: ml constants are required for validate-bound\n";
    return 1;
  }
  io::BuiltProblem built = io::build_problem(cfg);

  sim::Rng rng(sim::derive_seed(cfg.seed, sim::StreamPurpose::kEstimate, 99));
  int passed = 0;
  json results = json::array();
  for (int inst = 0; inst < instances; ++inst) {
    cost::AlgorithmParams params;
    params.iterations.assign(cfg.system.num_workers + 1, 1.0);
    params.iterations[0] = 5 + rng.uniform_int(25);
    for (int n = 1; n <= cfg.system.num_workers; ++n) {
      params.iterations[n] = 1 + rng.uniform_int(4);
    }
    params.batch = 1 + rng.uniform_int(4);
    double gamma = (0.05 + 0.45 * rng.uniform()) / cfg.ml->smooth_L;
    params.rule = cost::ConstantStep{gamma};

    auto check = sim::validate_bound(*built.problem, params, cfg.system, *cfg.ml, trials,
                                     cfg.seed + 1000 * inst);
    passed += check.pass ? 1 : 0;
    results.push_back({{"ratio", check.ratio},
                       {"empirical", check.empirical},
                       {"bound", check.bound},
                       {"pass", check.pass}});
  }
  double rate = static_cast<double>(passed) / instances;
  json j;
  j["instances"] = instances;
  j["trials"] = trials;
  j["pass_rate"] = rate;
  j["threshold"] = threshold;
  j["results"] = results;
  if (!out_path.empty()) io::save_json(out_path, j);
  std::cout << "validate-bound: " << passed << "/" << instances << " within the bound\n";
  return rate >= threshold ? 0 : 2;
}

int cmd_make_dataset(const std::string& out_dir, int count, std::uint64_t seed) {
  io::GeneratedDataset train = io::generate_digit_dataset(count, seed);
  io::GeneratedDataset test = io::generate_digit_dataset(std::max(200, count / 5), seed + 1);
  io::save_idx(out_dir + "/train-images-idx3-ubyte", train.images);
  io::save_idx(out_dir + "/train-labels-idx1-ubyte", train.labels);
  io::save_idx(out_dir + "/t10k-images-idx3-ubyte", test.images);
  io::save_idx(out_dir + "/t10k-labels-idx1-ubyte", test.labels);
  std::cout << "make-dataset: " << count << " train / " << test.images.count()
            << " test samples -> " << out_dir << "\n";
  return 0;
}

}  // namespace

int run(std::vector<std::string> args) {
  CLI::App app{"Quantized federated learning: parameter optimization and simulation"};
  app.require_subcommand(1);

  std::string config_path, out_path, mode_name, baseline_name = "none", params_path, var;
  std::vector<double> grid;
  std::vector<std::string> modes{"constant"};
  int trials = 0, budget = 2000, instances = 20, jobs = 4, count = 2000;
  double safety = 1.1, threshold = 0.95;
  std::uint64_t seed = 1;
  bool with_metric = false;

  auto* opt_cmd = app.add_subcommand("optimize", "Solve for the energy-minimal parameters");
  opt_cmd->add_option("--config", config_path)->required();
  opt_cmd->add_option("--mode", mode_name, "constant|exponential|diminishing|full");
  opt_cmd->add_option("--baseline", baseline_name, "none|pm|fa|pr");
  opt_cmd->add_option("--out", out_path);

  auto* sweep_cmd = app.add_subcommand("sweep", "Optimize across a grid of a system knob");
  sweep_cmd->add_option("--config", config_path)->required();
  sweep_cmd->add_option("--var", var, "Cmax|Tmax|Fratio|sratio")->required();
  sweep_cmd->add_option("--grid", grid)->required()->delimiter(',');
  sweep_cmd->add_option("--modes", modes)->delimiter(',');
  sweep_cmd->add_option("--baseline", baseline_name);
  sweep_cmd->add_option("--out", out_path)->required();
  sweep_cmd->add_option("--jobs", jobs);

  auto* sim_cmd = app.add_subcommand("simulate", "Run the training loop");
  sim_cmd->add_option("--config", config_path)->required();
  sim_cmd->add_option("--params", params_path, "optimizer report with rounded parameters");
  sim_cmd->add_option("--trials", trials);
  sim_cmd->add_option("--out", out_path);
  sim_cmd->add_flag("--metric", with_metric, "record the weighted gradient-norm metric");

  auto* est_cmd = app.add_subcommand("estimate-constants", "Pre-train the problem descriptors");
  est_cmd->add_option("--config", config_path)->required();
  est_cmd->add_option("--budget", budget);
  est_cmd->add_option("--safety", safety);
  est_cmd->add_option("--out", out_path)->required();

  auto* val_cmd = app.add_subcommand("validate-bound", "Empirical check of the error bound");
  val_cmd->add_option("--config", config_path)->required();
  val_cmd->add_option("--instances", instances);
  val_cmd->add_option("--trials", trials);
  val_cmd->add_option("--threshold", threshold);
  val_cmd->add_option("--out", out_path);

  auto* mk_cmd = app.add_subcommand("make-dataset", "Write a synthetic digit set as IDX files");
  mk_cmd->add_option("--out-dir", out_path)->required();
  mk_cmd->add_option("--count", count);
  mk_cmd->add_option("--seed", seed);

  std::vector<const char*> argv;
  std::string prog = "fledge";
  argv.push_back(prog.c_str());
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (opt_cmd->parsed()) return cmd_optimize(config_path, mode_name, baseline_name, out_path);
    if (sweep_cmd->parsed()) {
      return cmd_sweep(config_path, var, grid, modes, baseline_name, out_path, jobs);
    }
    if (sim_cmd->parsed()) {
      return cmd_simulate(config_path, params_path, trials, out_path, with_metric);
    }
    if (est_cmd->parsed()) return cmd_estimate(config_path, budget, safety, out_path);
    if (val_cmd->parsed()) {
      return cmd_validate_bound(config_path, instances, trials == 0 ? 30 : trials, threshold,
                                out_path);
    }
    if (mk_cmd->parsed()) return cmd_make_dataset(out_path, count, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(std::move(args));
}

}  // namespace fledge::cli
