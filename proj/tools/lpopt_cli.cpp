#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lpopt/harness.hpp"
#include "lpopt/text.hpp"
#include "lpopt/theory.hpp"

namespace {

using namespace lpopt;

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t pos = s.find(',', start);
    const std::string item =
        pos == std::string::npos ? s.substr(start) : s.substr(start, pos - start);
    if (!item.empty()) out.push_back(parse_double(item));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  if (out.empty()) throw InvalidInputError("expected a comma-separated list: " + s);
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (double v : parse_double_list(s)) out.push_back(static_cast<int>(v));
  return out;
}

// "alpha=1e-3,1e-2;mu=0.5,3" -> axes
std::vector<GridAxis> parse_grid_string(const std::string& s) {
  std::vector<GridAxis> axes;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t pos = s.find(';', start);
    const std::string part =
        pos == std::string::npos ? s.substr(start) : s.substr(start, pos - start);
    if (!part.empty()) {
      const std::size_t eq = part.find('=');
      if (eq == std::string::npos) {
        throw InvalidInputError("grid: expected name=v1,v2 in '" + part + "'");
      }
      axes.push_back({part.substr(0, eq), parse_double_list(part.substr(eq + 1))});
    }
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  if (axes.empty()) throw InvalidInputError("grid: no axes given");
  return axes;
}

struct Overrides {
  std::string algo, option, dataset, task = "regression", out;
  double alpha = 0.0, delta = 0.0, mu = 0.0;
  int bits = 0, epochs = 0;
  long inner = 0;
  std::uint64_t seed = 0;
  CLI::App* sub = nullptr;

  bool has(const std::string& flag) const { return sub->count(flag) > 0; }
};

void add_override_flags(CLI::App* sub, Overrides& o) {
  o.sub = sub;
  sub->add_option("--algo", o.algo,
                  "override algorithm (sgd|svrg|lp-sgd|lp-svrg|halp|lm-halp)");
  sub->add_option("--alpha", o.alpha, "override step size");
  sub->add_option("--bits", o.bits, "override bit width");
  sub->add_option("--delta", o.delta, "override fixed scale");
  sub->add_option("--mu", o.mu, "override scale aggressiveness");
  sub->add_option("--epochs", o.epochs, "override outer iterations");
  sub->add_option("--inner", o.inner, "override epoch length T");
  sub->add_option("--option", o.option, "override epoch update rule (I|II)");
  sub->add_option("--seed", o.seed, "run a single seed");
  sub->add_option("--dataset", o.dataset,
                  "dataset file: .json spec or .csv with a target column");
  sub->add_option("--task", o.task, "csv target interpretation (regression|classification)");
  sub->add_option("--out", o.out, "output directory");
}

void apply_overrides(const Overrides& o, ExperimentSpec& spec) {
  if (o.has("--dataset")) {
    const std::filesystem::path p(o.dataset);
    if (p.extension() == ".json") {
      std::ifstream in(p);
      if (!in) throw IoError("cannot open dataset spec " + o.dataset);
      nlohmann::json j;
      in >> j;
      spec.dataset = dataset_from_json(j);
    } else if (p.extension() == ".csv") {
      spec.dataset = DatasetSpec{};
      spec.dataset.kind = "csv";
      spec.dataset.path = o.dataset;
      spec.dataset.task = o.task;
    } else {
      throw InvalidInputError("--dataset expects a .json or .csv file");
    }
  }
  for (auto& nc : spec.configs) {
    OptimizerConfig& c = nc.config;
    if (o.has("--algo")) c.algorithm = algorithm_from_string(o.algo);
    if (o.has("--alpha")) c.alpha = o.alpha;
    if (o.has("--bits")) c.bits = o.bits;
    if (o.has("--delta")) c.delta = o.delta;
    if (o.has("--mu")) c.mu = o.mu;
    if (o.has("--epochs")) c.epochs = o.epochs;
    if (o.has("--inner")) c.inner_steps = o.inner;
    if (o.has("--option")) c.option = epoch_option_from_string(o.option);
  }
  if (o.has("--seed")) spec.seeds = {o.seed};
  if (o.has("--out")) spec.out_dir = o.out;
}

ExperimentSpec spec_for(const std::string& spec_path, const Overrides& o) {
  ExperimentSpec spec;
  if (!spec_path.empty()) {
    spec = load_experiment_file(spec_path);
  } else {
    if (!o.has("--dataset") || !o.has("--algo")) {
      throw InvalidInputError("without --spec, both --dataset and --algo are required");
    }
    NamedConfig nc;
    nc.config.algorithm = algorithm_from_string(o.algo);
    nc.config.alpha = 1e-3;
    nc.name = o.algo;
    spec.configs.push_back(std::move(nc));
  }
  ExperimentSpec out = spec;
  apply_overrides(o, out);
  return out;
}

int cmd_run(const std::string& spec_path, const Overrides& o) {
  const ExperimentSpec spec = spec_for(spec_path, o);
  const ExperimentResult result = run_experiment(spec);
  for (const RunOutput& r : result.runs) {
    std::cout << r.name << " seed=" << r.seed << " status=" << r.status
              << " loss=" << format_double(r.final_loss)
              << " grad_norm=" << format_double(r.final_grad_norm) << " -> "
              << r.csv_path << "\n";
  }
  std::cout << "manifest: " << result.manifest_path << "\n";
  return 0;
}

int cmd_grid(const std::string& spec_path, const std::string& grid_str,
             const std::string& metric_flag, const Overrides& o) {
  if (spec_path.empty()) {
    throw InvalidInputError("grid: --spec is required");
  }
  std::ifstream in(spec_path);
  if (!in) throw IoError("cannot open experiment spec " + spec_path);
  nlohmann::json j;
  in >> j;
  ExperimentSpec spec = experiment_from_json(j);
  apply_overrides(o, spec);

  std::vector<GridAxis> axes;
  if (!grid_str.empty()) {
    axes = parse_grid_string(grid_str);
  } else if (j.contains("grid")) {
    for (const auto& [key, vals] : j.at("grid").items()) {
      axes.push_back({key, vals.get<std::vector<double>>()});
    }
  } else {
    throw InvalidInputError("grid: provide --grid or a 'grid' object in the spec");
  }
  std::string metric = metric_flag;
  if (metric.empty()) metric = j.value("metric", std::string("grad_norm"));

  Dataset ds = build_dataset(spec.dataset);
  const LossFamily lf = resolve_loss(spec.objective, ds);
  const Objective obj(std::move(ds), lf, spec.objective.l2);
  const OptimizerConfig& base = spec.configs.front().config;

  const GridResult res =
      grid_search(obj, base, axes, spec.seeds, metric, spec.dataset.seed);

  std::string csv;
  {
    std::string header;
    for (const auto& [k, v] : res.points.front().params) header += k + ",";
    csv = header + metric + ",status\n";
  }
  for (const GridOutcome& p : res.points) {
    for (const auto& [k, v] : p.params) csv += format_double(v) + ",";
    csv += format_double(p.mean_metric) + "," + p.status + "\n";
  }
  std::filesystem::create_directories(spec.out_dir);
  const std::string csv_path =
      (std::filesystem::path(spec.out_dir) / "grid.csv").string();
  {
    std::ofstream out(csv_path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + csv_path);
    out << csv;
  }

  const GridOutcome& bestp = res.points[res.best_index];
  std::cout << "grid points: " << res.points.size() << "\n";
  std::cout << "best (" << metric << "=" << format_double(bestp.mean_metric) << "):";
  for (const auto& [k, v] : bestp.params) std::cout << " " << k << "=" << format_double(v);
  std::cout << " status=" << bestp.status << "\n";
  std::cout << "table: " << csv_path << "\n";
  return 0;
}

int cmd_sweep(const std::string& kappas_str, const std::string& bits_str,
              long inner, int epochs, std::uint64_t seed, std::string out_dir) {
  const std::vector<double> kappas = parse_double_list(kappas_str);
  const std::vector<int> bits = parse_int_list(bits_str);
  const SweepResult res = conditioning_sweep(kappas, bits, inner, epochs, seed);
  if (out_dir.empty()) out_dir = "out";
  std::filesystem::create_directories(out_dir);
  const std::string path =
      (std::filesystem::path(out_dir) / "conditioning.csv").string();
  write_sweep_csv(path, res);
  for (const SweepRow& row : res.rows) {
    std::cout << "kappa=" << format_double(row.kappa) << " " << row.algorithm;
    if (row.bits > 0) std::cout << "-" << row.bits;
    std::cout << " alpha=" << format_double(row.alpha);
    if (row.mu > 0) std::cout << " mu=" << format_double(row.mu);
    std::cout << " grad_norm=" << format_double(row.grad_norm)
              << " status=" << row.status << "\n";
  }
  std::cout << "table: " << path << "\n";
  return 0;
}

int cmd_quantize_demo(int bits, double delta, const std::string& values_str,
                      long samples, std::uint64_t seed) {
  const LPRepr repr(delta, bits);
  std::cout << "representation: delta=" << format_double(repr.delta())
            << " bits=" << repr.bits() << "\n";
  std::cout << "codes: [" << repr.min_code() << ", " << repr.max_code() << "]"
            << "  values: [" << format_double(repr.min_value()) << ", "
            << format_double(repr.max_value()) << "]\n";
  std::vector<double> values;
  if (!values_str.empty()) {
    values = parse_double_list(values_str);
  } else {
    values = {0.0, repr.delta() * 0.25, repr.delta() * 2.5,
              repr.max_value() * 0.5, repr.max_value() * 2.0};
  }
  QuantRng rng(seed);
  for (const double x : values) {
    double sum = 0.0;
    std::int64_t lo = repr.max_code(), hi = repr.min_code();
    for (long s = 0; s < samples; ++s) {
      const LPScalar q = quantize_scalar(x, repr, rng);
      sum += q.value();
      lo = std::min(lo, q.code);
      hi = std::max(hi, q.code);
    }
    const double mean = sum / static_cast<double>(samples);
    std::cout << "x=" << format_double(x) << "  mean=" << format_double(mean)
              << "  bias=" << format_double(mean - x) << "  codes=[" << lo
              << ", " << hi << "]\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"low-precision stochastic optimization toolkit"};
  app.require_subcommand(1);

  std::string run_spec;
  Overrides run_o;
  CLI::App* run_cmd = app.add_subcommand("run", "execute an experiment spec");
  run_cmd->add_option("--spec", run_spec, "experiment spec (json)");
  add_override_flags(run_cmd, run_o);

  std::string grid_spec, grid_str, grid_metric;
  Overrides grid_o;
  CLI::App* grid_cmd =
      app.add_subcommand("grid", "tune the first config over a parameter grid");
  grid_cmd->add_option("--spec", grid_spec, "experiment spec (json)");
  grid_cmd->add_option("--grid", grid_str, "axes, e.g. alpha=1e-3,1e-2;mu=0.5,3");
  grid_cmd->add_option("--metric", grid_metric, "grad_norm (default) or loss");
  add_override_flags(grid_cmd, grid_o);

  std::string sw_kappas = "1,4,16,64,256,1024";
  std::string sw_bits = "16,8";
  long sw_inner = 1000;
  int sw_epochs = 50;
  std::uint64_t sw_seed = 1;
  std::string sw_out = "out";
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep-kappa", "tuned comparison across problem condition numbers");
  sweep_cmd->add_option("--kappas", sw_kappas, "condition numbers");
  sweep_cmd->add_option("--bits", sw_bits, "bit widths for the centered method");
  sweep_cmd->add_option("--inner", sw_inner, "epoch length T");
  sweep_cmd->add_option("--epochs", sw_epochs, "outer iterations K");
  sweep_cmd->add_option("--seed", sw_seed, "seed");
  sweep_cmd->add_option("--out", sw_out, "output directory");

  int qd_bits = 8;
  double qd_delta = 0.7;
  std::string qd_values;
  long qd_samples = 100000;
  std::uint64_t qd_seed = 0;
  CLI::App* qd_cmd = app.add_subcommand(
      "quantize-demo", "show stochastic rounding behavior for a representation");
  qd_cmd->add_option("--bits", qd_bits, "bit width");
  qd_cmd->add_option("--delta", qd_delta, "lattice step");
  qd_cmd->add_option("--values", qd_values, "comma-separated test values");
  qd_cmd->add_option("--samples", qd_samples, "rounding samples per value");
  qd_cmd->add_option("--seed", qd_seed, "seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(run_spec, run_o);
    if (grid_cmd->parsed()) return cmd_grid(grid_spec, grid_str, grid_metric, grid_o);
    if (sweep_cmd->parsed()) {
      return cmd_sweep(sw_kappas, sw_bits, sw_inner, sw_epochs, sw_seed, sw_out);
    }
    if (qd_cmd->parsed()) {
      return cmd_quantize_demo(qd_bits, qd_delta, qd_values, qd_samples, qd_seed);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
