#include "lpopt/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "lpopt/dataset_io.hpp"
#include "lpopt/text.hpp"

namespace lpopt {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text_atomic(const std::string& path, const std::string& content) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  const fs::path tmp(path + ".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, p);
}

std::string sanitize_name(const std::string& name) {
  if (name.empty()) throw InvalidInputError("config name must not be empty");
  std::string out = name;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
    if (!ok) c = '-';
  }
  return out;
}

void apply_param(OptimizerConfig& cfg, const std::string& param, double v) {
  if (param == "alpha") {
    cfg.alpha = v;
  } else if (param == "delta") {
    cfg.delta = v;
  } else if (param == "mu") {
    cfg.mu = v;
  } else if (param == "bits") {
    cfg.bits = static_cast<int>(std::llround(v));
  } else if (param == "epochs") {
    cfg.epochs = static_cast<int>(std::llround(v));
  } else if (param == "inner") {
    cfg.inner_steps = std::llround(v);
  } else {
    throw InvalidInputError("grid: unknown parameter '" + param + "'");
  }
}

double final_metric(const RunRecord& rec, const std::string& metric) {
  if (rec.rows.empty()) return std::numeric_limits<double>::infinity();
  return metric == "loss" ? rec.rows.back().loss : rec.rows.back().grad_norm;
}

}  // namespace

Dataset build_dataset(const DatasetSpec& spec) {
  if (spec.kind == "regression") {
    return make_regression(spec.n, spec.d, spec.noise_sd, spec.seed);
  }
  if (spec.kind == "classification") {
    return make_classification(spec.n, spec.d, spec.classes, spec.separation,
                               spec.seed);
  }
  if (spec.kind == "conditioned") {
    return make_conditioned_regression(spec.kappa, spec.seed);
  }
  if (spec.kind == "csv") {
    if (spec.task != "regression" && spec.task != "classification") {
      throw InvalidInputError("dataset: csv task must be regression or classification");
    }
    return load_csv_dataset(spec.path, spec.task == "classification");
  }
  if (spec.kind == "idx") {
    return load_idx(spec.images, spec.labels);
  }
  throw InvalidInputError("dataset: unknown kind '" + spec.kind + "'");
}

LossFamily resolve_loss(const ObjectiveSpec& ospec, const Dataset& ds) {
  if (ospec.loss == "auto") {
    return ds.is_classification() ? LossFamily::Softmax : LossFamily::Squared;
  }
  if (ospec.loss == "squared") return LossFamily::Squared;
  if (ospec.loss == "softmax") return LossFamily::Softmax;
  throw InvalidInputError("objective: unknown loss '" + ospec.loss + "'");
}

DatasetSpec dataset_from_json(const json& j) {
  try {
    DatasetSpec s;
    s.kind = j.value("kind", s.kind);
    s.n = j.value("n", s.n);
    s.d = j.value("d", s.d);
    s.noise_sd = j.value("noise_sd", s.noise_sd);
    s.classes = j.value("classes", s.classes);
    s.separation = j.value("separation", s.separation);
    s.kappa = j.value("kappa", s.kappa);
    s.seed = j.value("seed", s.seed);
    s.path = j.value("path", s.path);
    s.task = j.value("task", s.task);
    s.images = j.value("images", s.images);
    s.labels = j.value("labels", s.labels);
    return s;
  } catch (const json::exception& e) {
    throw InvalidInputError(std::string("dataset json: ") + e.what());
  }
}

OptimizerConfig config_from_json(const json& j) {
  try {
    OptimizerConfig c;
    c.algorithm = algorithm_from_string(j.at("algo").get<std::string>());
    c.alpha = j.at("alpha").get<double>();
    c.epochs = j.value("epochs", c.epochs);
    c.inner_steps = j.value("inner", c.inner_steps);
    c.bits = j.value("bits", c.bits);
    c.delta = j.value("delta", c.delta);
    c.mu = j.value("mu", c.mu);
    c.option = epoch_option_from_string(j.value("option", std::string("I")));
    c.full_grad_period = j.value("full_grad_period", c.full_grad_period);
    c.seed = j.value("seed", c.seed);
    c.metric_every_passes = j.value("metric_every_passes", c.metric_every_passes);
    c.delta_min = j.value("delta_min", c.delta_min);
    c.divergence_limit = j.value("divergence_limit", c.divergence_limit);
    return c;
  } catch (const json::exception& e) {
    throw InvalidInputError(std::string("config json: ") + e.what());
  }
}

ExperimentSpec experiment_from_json(const json& j) {
  try {
    ExperimentSpec s;
    if (j.contains("dataset")) s.dataset = dataset_from_json(j.at("dataset"));
    if (j.contains("objective")) {
      s.objective.loss = j.at("objective").value("loss", s.objective.loss);
      s.objective.l2 = j.at("objective").value("l2", s.objective.l2);
    }
    if (!j.contains("configs") || !j.at("configs").is_array() ||
        j.at("configs").empty()) {
      throw InvalidInputError("experiment json: 'configs' must be a non-empty array");
    }
    std::set<std::string> names;
    for (const auto& item : j.at("configs")) {
      NamedConfig nc;
      nc.config = config_from_json(item);
      nc.name = item.value("name", to_string(nc.config.algorithm));
      if (!names.insert(nc.name).second) {
        throw InvalidInputError("experiment json: duplicate config name '" +
                                nc.name + "'");
      }
      s.configs.push_back(std::move(nc));
    }
    if (j.contains("seeds")) {
      s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    } else if (j.contains("repetitions")) {
      const auto reps = j.at("repetitions").get<long>();
      if (reps < 1) throw InvalidInputError("experiment json: repetitions must be >= 1");
      const auto base = j.value("seed_base", std::uint64_t{0});
      s.seeds.clear();
      for (long r = 0; r < reps; ++r) s.seeds.push_back(base + static_cast<std::uint64_t>(r));
    }
    if (s.seeds.empty()) {
      throw InvalidInputError("experiment json: need at least one seed");
    }
    s.out_dir = j.value("out", s.out_dir);
    return s;
  } catch (const json::exception& e) {
    throw InvalidInputError(std::string("experiment json: ") + e.what());
  }
}

ExperimentSpec load_experiment_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open experiment spec " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("experiment spec " + path + ": " + e.what());
  }
  return experiment_from_json(j);
}

json config_to_json(const OptimizerConfig& cfg) {
  json j;
  j["algo"] = to_string(cfg.algorithm);
  j["alpha"] = cfg.alpha;
  j["epochs"] = cfg.epochs;
  j["inner"] = cfg.inner_steps;
  j["bits"] = cfg.bits;
  j["delta"] = cfg.delta;
  j["mu"] = cfg.mu;
  j["option"] = to_string(cfg.option);
  j["full_grad_period"] = cfg.full_grad_period;
  j["seed"] = cfg.seed;
  j["metric_every_passes"] = cfg.metric_every_passes;
  j["delta_min"] = cfg.delta_min;
  j["divergence_limit"] = cfg.divergence_limit;
  return j;
}

json experiment_to_json(const ExperimentSpec& spec) {
  json j;
  json d;
  d["kind"] = spec.dataset.kind;
  d["n"] = spec.dataset.n;
  d["d"] = spec.dataset.d;
  d["noise_sd"] = spec.dataset.noise_sd;
  d["classes"] = spec.dataset.classes;
  d["separation"] = spec.dataset.separation;
  d["kappa"] = spec.dataset.kappa;
  d["seed"] = spec.dataset.seed;
  if (!spec.dataset.path.empty()) d["path"] = spec.dataset.path;
  d["task"] = spec.dataset.task;
  if (!spec.dataset.images.empty()) d["images"] = spec.dataset.images;
  if (!spec.dataset.labels.empty()) d["labels"] = spec.dataset.labels;
  j["dataset"] = d;
  j["objective"] = {{"loss", spec.objective.loss}, {"l2", spec.objective.l2}};
  j["seeds"] = spec.seeds;
  j["out"] = spec.out_dir;
  json configs = json::array();
  for (const auto& nc : spec.configs) {
    json c = config_to_json(nc.config);
    c["name"] = nc.name;
    configs.push_back(c);
  }
  j["configs"] = configs;
  return j;
}

void write_run_csv(const std::string& path, const RunRecord& rec) {
  std::string s = "pass,seconds,loss,grad_norm,delta\n";
  for (const MetricRow& row : rec.rows) {
    s += format_double(row.pass);
    s += ',';
    s += format_double(row.seconds);
    s += ',';
    s += format_double(row.loss);
    s += ',';
    s += format_double(row.grad_norm);
    s += ',';
    s += format_double(row.delta);
    s += '\n';
  }
  write_text_atomic(path, s);
}

std::vector<MetricRow> read_run_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace " + path);
  std::string line;
  if (!std::getline(in, line) || line != "pass,seconds,loss,grad_norm,delta") {
    throw IoError("trace " + path + ": unexpected header");
  }
  std::vector<MetricRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    while (true) {
      const std::size_t pos = line.find(',', start);
      if (pos == std::string::npos) {
        f.push_back(line.substr(start));
        break;
      }
      f.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
    if (f.size() != 5) throw IoError("trace " + path + ": malformed row");
    MetricRow row;
    row.pass = parse_double(f[0]);
    row.seconds = parse_double(f[1]);
    row.loss = parse_double(f[2]);
    row.grad_norm = parse_double(f[3]);
    row.delta = parse_double(f[4]);
    rows.push_back(row);
  }
  return rows;
}

RunRecord run_prepared(const Objective& obj, const OptimizerConfig& cfg,
                       std::uint64_t data_seed) {
  try {
    if (cfg.algorithm == Algorithm::LmHalp) {
      const auto& q = obj.dataset().quantized;
      if (!q.has_value() || q->repr.bits() != cfg.bits) {
        Dataset ds = obj.dataset();
        quantize_dataset(ds, cfg.bits, data_seed);
        const Objective prepared(std::move(ds), obj.loss_family(), obj.l2());
        return run(prepared, cfg);
      }
    }
    return run(obj, cfg);
  } catch (const DivergenceError& e) {
    return e.partial;
  }
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  if (spec.configs.empty()) {
    throw InvalidInputError("experiment: no configs");
  }
  if (spec.seeds.empty()) {
    throw InvalidInputError("experiment: no seeds");
  }
  {
    std::set<std::string> names;
    for (const auto& nc : spec.configs) {
      if (!names.insert(nc.name).second) {
        throw InvalidInputError("experiment: duplicate config name '" + nc.name + "'");
      }
    }
  }
  fs::create_directories(spec.out_dir);

  Dataset ds = build_dataset(spec.dataset);
  const LossFamily lf = resolve_loss(spec.objective, ds);
  const Objective base(std::move(ds), lf, spec.objective.l2);

  ExperimentResult result;
  for (const auto& nc : spec.configs) {
    for (const std::uint64_t seed : spec.seeds) {
      OptimizerConfig cfg = nc.config;
      cfg.seed = seed;
      RunRecord rec = run_prepared(base, cfg, spec.dataset.seed);
      const std::string fname =
          sanitize_name(nc.name) + "_seed" + std::to_string(seed) + ".csv";
      write_run_csv((fs::path(spec.out_dir) / fname).string(), rec);
      RunOutput ro;
      ro.name = nc.name;
      ro.seed = seed;
      ro.csv_path = fname;
      ro.status = rec.status;
      ro.final_loss = rec.rows.empty() ? 0.0 : rec.rows.back().loss;
      ro.final_grad_norm = rec.rows.empty() ? 0.0 : rec.rows.back().grad_norm;
      ro.rows = static_cast<long>(rec.rows.size());
      ro.steps = rec.steps_taken;
      result.runs.push_back(std::move(ro));
      result.records.push_back(std::move(rec));
    }
  }

  json manifest = experiment_to_json(spec);
  json runs = json::array();
  for (const auto& ro : result.runs) {
    json r;
    r["name"] = ro.name;
    r["seed"] = ro.seed;
    r["csv"] = ro.csv_path;
    r["status"] = ro.status;
    r["rows"] = ro.rows;
    r["steps"] = ro.steps;
    r["final_loss"] = ro.final_loss;
    r["final_grad_norm"] = ro.final_grad_norm;
    runs.push_back(r);
  }
  manifest["runs"] = runs;
  const std::string mpath = (fs::path(spec.out_dir) / "manifest.json").string();
  write_text_atomic(mpath, manifest.dump(2) + "\n");
  result.manifest_path = mpath;
  return result;
}

GridResult grid_search(const Objective& obj, const OptimizerConfig& base,
                       std::vector<GridAxis> axes,
                       std::span<const std::uint64_t> seeds,
                       const std::string& metric, std::uint64_t data_seed) {
  if (metric != "grad_norm" && metric != "loss") {
    throw InvalidInputError("grid: metric must be grad_norm or loss");
  }
  if (seeds.empty()) {
    throw InvalidInputError("grid: need at least one seed");
  }
  std::sort(axes.begin(), axes.end(),
            [](const GridAxis& a, const GridAxis& b) { return a.param < b.param; });
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (axes[i].values.empty()) {
      throw InvalidInputError("grid: axis '" + axes[i].param + "' has no values");
    }
    if (i > 0 && axes[i].param == axes[i - 1].param) {
      throw InvalidInputError("grid: duplicate axis '" + axes[i].param + "'");
    }
  }

  GridResult res;
  std::vector<std::size_t> idx(axes.size(), 0);
  double best = std::numeric_limits<double>::infinity();
  bool done = false;
  std::size_t point = 0;
  while (!done) {
    OptimizerConfig cfg = base;
    GridOutcome out;
    for (std::size_t i = 0; i < axes.size(); ++i) {
      const double v = axes[i].values[idx[i]];
      apply_param(cfg, axes[i].param, v);
      out.params[axes[i].param] = v;
    }
    out.status = "ok";
    double sum = 0.0;
    for (const std::uint64_t seed : seeds) {
      cfg.seed = seed;
      const RunRecord rec = run_prepared(obj, cfg, data_seed);
      double m = final_metric(rec, metric);
      if (rec.status == "diverged" || !std::isfinite(m)) {
        m = std::numeric_limits<double>::infinity();
        out.status = "diverged";
      }
      out.per_seed.push_back(m);
      sum += m;
    }
    out.mean_metric = sum / static_cast<double>(seeds.size());
    if (point == 0 || out.mean_metric < best) {
      best = out.mean_metric;
      res.best_index = point;
      res.best_config = cfg;
      res.best_config.seed = base.seed;
    }
    res.points.push_back(std::move(out));

    // odometer over axes, last axis fastest
    done = true;
    for (std::size_t i = axes.size(); i-- > 0;) {
      if (++idx[i] < axes[i].values.size()) {
        done = false;
        break;
      }
      idx[i] = 0;
    }
    ++point;
  }
  return res;
}

SweepResult conditioning_sweep(std::span<const double> kappas,
                               std::span<const int> bit_widths,
                               long inner_steps, int epochs,
                               std::uint64_t seed) {
  if (kappas.empty()) {
    throw InvalidInputError("sweep: need at least one kappa");
  }
  if (inner_steps < 1 || epochs < 1) {
    throw InvalidInputError("sweep: inner_steps and epochs must be >= 1");
  }
  // Half-decade step-size grid: whole decades are too coarse for the
  // baseline to converge on badly conditioned problems, which would mask
  // the precision wall this sweep is meant to expose.
  std::vector<double> alphas;
  for (int i = 0; i <= 16; ++i) alphas.push_back(std::pow(10.0, -10.0 + 0.5 * i));
  std::vector<double> mus;
  for (int i = 0; i <= 12; ++i) {
    mus.push_back(std::exp(std::log(0.5) +
                           i * (std::log(2000.0) - std::log(0.5)) / 12.0));
  }
  const std::uint64_t seeds_arr[1] = {seed};
  const std::span<const std::uint64_t> seeds(seeds_arr, 1);

  SweepResult res;
  for (const double kappa : kappas) {
    Dataset ds = make_conditioned_regression(kappa, seed);
    const Objective obj(std::move(ds), LossFamily::Squared, 0.0);

    OptimizerConfig base;
    base.epochs = epochs;
    base.inner_steps = inner_steps;
    base.seed = seed;

    {
      OptimizerConfig svrg = base;
      svrg.algorithm = Algorithm::Svrg;
      const GridResult g =
          grid_search(obj, svrg, {{"alpha", alphas}}, seeds, "grad_norm", seed);
      const GridOutcome& won = g.points[g.best_index];
      SweepRow row;
      row.kappa = kappa;
      row.algorithm = "svrg";
      row.bits = 0;
      row.alpha = won.params.at("alpha");
      row.mu = 0.0;
      row.grad_norm = won.mean_metric;
      row.status = won.status;
      res.rows.push_back(std::move(row));
    }
    for (const int bits : bit_widths) {
      OptimizerConfig halp = base;
      halp.algorithm = Algorithm::Halp;
      halp.bits = bits;
      halp.mu = 1.0;
      const GridResult g = grid_search(
          obj, halp, {{"alpha", alphas}, {"mu", mus}}, seeds, "grad_norm", seed);
      const GridOutcome& won = g.points[g.best_index];
      SweepRow row;
      row.kappa = kappa;
      row.algorithm = "halp";
      row.bits = bits;
      row.alpha = won.params.at("alpha");
      row.mu = won.params.at("mu");
      row.grad_norm = won.mean_metric;
      row.status = won.status;
      res.rows.push_back(std::move(row));
    }
  }
  return res;
}

void write_sweep_csv(const std::string& path, const SweepResult& res) {
  std::string s = "kappa,algorithm,bits,alpha,mu,grad_norm,status\n";
  for (const SweepRow& row : res.rows) {
    s += format_double(row.kappa);
    s += ',';
    s += row.algorithm;
    s += ',';
    s += std::to_string(row.bits);
    s += ',';
    s += format_double(row.alpha);
    s += ',';
    s += format_double(row.mu);
    s += ',';
    s += format_double(row.grad_norm);
    s += ',';
    s += row.status;
    s += '\n';
  }
  write_text_atomic(path, s);
}

}  // namespace lpopt
