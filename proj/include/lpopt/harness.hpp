#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "lpopt/objectives.hpp"
#include "lpopt/optimizers.hpp"

namespace lpopt {

struct DatasetSpec {
  std::string kind = "regression";  // regression | classification |
                                    // conditioned | csv | idx
  long n = 1000;
  int d = 100;
  double noise_sd = 0.0;
  int classes = 10;
  double separation = 1.0;
  double kappa = 1.0;
  std::uint64_t seed = 0;
  std::string path;               // csv
  std::string task = "regression";  // csv target interpretation
  std::string images, labels;     // idx pair
};

struct ObjectiveSpec {
  std::string loss = "auto";  // auto | squared | softmax
  double l2 = 0.0;
};

struct NamedConfig {
  std::string name;
  OptimizerConfig config;
};

struct ExperimentSpec {
  DatasetSpec dataset;
  ObjectiveSpec objective;
  std::vector<NamedConfig> configs;
  std::vector<std::uint64_t> seeds = {0};
  std::string out_dir = "out";
};

Dataset build_dataset(const DatasetSpec& spec);
LossFamily resolve_loss(const ObjectiveSpec& ospec, const Dataset& ds);

DatasetSpec dataset_from_json(const nlohmann::json& j);
OptimizerConfig config_from_json(const nlohmann::json& j);
ExperimentSpec experiment_from_json(const nlohmann::json& j);
ExperimentSpec load_experiment_file(const std::string& path);
nlohmann::json config_to_json(const OptimizerConfig& cfg);
nlohmann::json experiment_to_json(const ExperimentSpec& spec);

// Metric trace as CSV: "pass,seconds,loss,grad_norm,delta" with shortest
// round-trip number formatting, so identical runs give identical bytes in
// every column except seconds.
void write_run_csv(const std::string& path, const RunRecord& rec);
std::vector<MetricRow> read_run_csv(const std::string& path);

// Runs a config, transparently preparing a quantized dataset copy when the
// algorithm consumes quantized examples at a width the objective lacks.
// A diverged run is returned (status "diverged") rather than thrown.
RunRecord run_prepared(const Objective& obj, const OptimizerConfig& cfg,
                       std::uint64_t data_seed);

struct RunOutput {
  std::string name;
  std::uint64_t seed = 0;
  std::string csv_path;  // relative to out_dir
  std::string status;
  double final_loss = 0.0;
  double final_grad_norm = 0.0;
  long rows = 0;
  long steps = 0;
};

struct ExperimentResult {
  std::vector<RunOutput> runs;
  std::vector<RunRecord> records;  // aligned with runs
  std::string manifest_path;
};

// Executes every (config, seed) pair, writes one trace CSV per run plus a
// manifest echoing the resolved spec, and returns the per-run summaries.
// Files are written to a temp name then renamed, so readers never observe
// partial output.
ExperimentResult run_experiment(const ExperimentSpec& spec);

struct GridAxis {
  std::string param;  // alpha | delta | mu | bits | epochs | inner
  std::vector<double> values;
};

struct GridOutcome {
  std::map<std::string, double> params;
  std::vector<double> per_seed;  // +inf for diverged seeds
  double mean_metric = 0.0;
  std::string status;  // "ok" unless any seed diverged
};

struct GridResult {
  std::vector<GridOutcome> points;
  std::size_t best_index = 0;
  OptimizerConfig best_config;
};

// Exhaustive Cartesian search.  Axes are iterated in name order with the
// listed value order, and the first point achieving the minimal seed-mean
// wins ties, so the selection is deterministic.
GridResult grid_search(const Objective& obj, const OptimizerConfig& base,
                       std::vector<GridAxis> axes,
                       std::span<const std::uint64_t> seeds,
                       const std::string& metric = "grad_norm",
                       std::uint64_t data_seed = 0);

struct SweepRow {
  double kappa = 1.0;
  std::string algorithm;
  int bits = 0;  // 0 for full precision
  double alpha = 0.0;
  double mu = 0.0;  // 0 where not applicable
  double grad_norm = 0.0;
  std::string status;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

// For each condition number: tune full-precision baseline over step sizes
// and the bit-centered method over (step size, scale) at each width, and
// report each winner's final gradient norm on the fixed-spectrum problem.
SweepResult conditioning_sweep(std::span<const double> kappas,
                               std::span<const int> bit_widths,
                               long inner_steps, int epochs,
                               std::uint64_t seed);
void write_sweep_csv(const std::string& path, const SweepResult& res);

}  // namespace lpopt
