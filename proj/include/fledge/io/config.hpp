#pragma once

#include <memory>
#include <optional>
#include <string>

#include "json.hpp"

#include "fledge/io/mnist_mlp.hpp"
#include "fledge/io/synthetic.hpp"
#include "fledge/opt/optimizer.hpp"

// Run configuration: the edge system, problem descriptors, limits, mode, and
// dataset; persisted as JSON with field-path diagnostics on schema errors.

namespace fledge::io {

struct DatasetConfig {
  std::string kind = "synthetic-quadratic";  // synthetic-quadratic | synthetic-logistic |
                                             // idx | generated-digits
  int dimension = 20;                        // synthetic kinds
  int samples_per_worker = 16;               // synthetic kinds
  std::string images_path, labels_path;      // idx kind
  std::string test_images_path, test_labels_path;  // optional held-out set
  int subset = 0;                            // idx: cap on training samples (0 = all)
  int generated_count = 2000;                // generated-digits kind
  int hidden = 128;                          // classifier width
};

struct RunConfig {
  cost::SystemProfile system;
  std::optional<cost::MlConstants> ml;
  cost::Limits limits;
  opt::Mode mode = opt::FixedConstant{0.01};
  opt::OptimizeOptions optimizer;
  DatasetConfig dataset;
  int sim_trials = 1;
  std::uint64_t seed = 1;
};

RunConfig load_config(const std::string& path);
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& cfg);
void save_config(const std::string& path, const RunConfig& cfg);

opt::Mode mode_from_name(const std::string& name, const nlohmann::json& params);

struct BuiltProblem {
  std::unique_ptr<sim::MlProblem> problem;
  const MlpProblem* classifier = nullptr;  // non-owning, set for image datasets
  std::optional<GeneratedDataset> eval;    // held-out set when available
};
BuiltProblem build_problem(const RunConfig& cfg);

nlohmann::json report_to_json(const opt::OptimizerReport& report, const std::string& mode,
                              const std::string& baseline);
void save_json(const std::string& path, const nlohmann::json& j);
nlohmann::json load_json(const std::string& path);

// Reads integer algorithm parameters back out of a saved optimizer report.
cost::AlgorithmParams params_from_report(const nlohmann::json& report);

}  // namespace fledge::io
