#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "lpopt/errors.hpp"
#include "lpopt/objectives.hpp"

namespace lpopt {

enum class Algorithm { Sgd, Svrg, LpSgd, LpSvrg, Halp, LmHalp };

// Epoch update rule for the variance-reduced methods: keep the last inner
// iterate, or one sampled uniformly from the epoch.
enum class EpochOption { LastIterate, SampledIterate };

// How widening a bit-centered run to 16 bits treats mu.  Scale shrinks mu
// by the span ratio so the per-step lattice spacing matches the narrow run
// (the representable range grows, removing any saturation effect); Clip
// keeps mu, so the representable range matches and only resolution is added.
enum class ClipMode { Scale, Clip };

Algorithm algorithm_from_string(const std::string& s);
std::string to_string(Algorithm a);
EpochOption epoch_option_from_string(const std::string& s);
std::string to_string(EpochOption o);
ClipMode clip_mode_from_string(const std::string& s);

struct OptimizerConfig {
  Algorithm algorithm = Algorithm::Svrg;
  double alpha = 1e-3;
  int epochs = 1;             // outer iterations K
  long inner_steps = 0;       // T; 0 derives full_grad_period * n
  int bits = 8;
  double delta = 0.0;         // fixed scale (quantized-iterate methods)
  double mu = 0.0;            // scale aggressiveness (bit-centered methods)
  EpochOption option = EpochOption::LastIterate;
  int full_grad_period = 2;   // data passes per outer iteration when T == 0
  std::uint64_t seed = 0;
  double metric_every_passes = 0.0;  // 0 records every epoch boundary
  double delta_min = 1e-300;         // lower clamp for derived scales
  double divergence_limit = 1e12;
  bool lm_bypass_aux_quant = false;  // test hook: full-precision inner update
  Eigen::VectorXd init;              // empty means zeros
};

struct MetricRow {
  double pass = 0.0;       // data passes completed (gradient evaluations / n)
  double seconds = 0.0;    // wall time since run start
  double loss = 0.0;
  double grad_norm = 0.0;
  double delta = 0.0;      // iterate scale in effect (0 for full precision)
  std::uint64_t iterate_hash = 0;
  double delta_inner = 0.0;  // inner-update scale (linear-model method)
  double delta_aux = 0.0;    // auxiliary scalar scale (linear-model method)
};

struct RunRecord {
  std::vector<MetricRow> rows;
  Eigen::VectorXd final_iterate;
  std::string status = "ok";  // "ok" | "converged" | "diverged"
  std::uint64_t inner_fp_vector_ops = 0;  // counted inside inner loops only
  std::uint64_t inner_lp_vector_ops = 0;
  long steps_taken = 0;
};

// Thrown when a measured loss or gradient norm leaves the configured
// range; carries everything recorded up to and including the bad row.
struct DivergenceError : Error {
  RunRecord partial;
  DivergenceError(const std::string& msg, RunRecord rec)
      : Error(msg), partial(std::move(rec)) {}
};

// Effective epoch length: inner_steps, or full_grad_period * n when unset.
long resolve_inner_steps(const OptimizerConfig& cfg, long n);

// Content hash of an iterate (FNV-1a over the double bytes).
std::uint64_t hash_vector(const Eigen::VectorXd& v);

RunRecord run_sgd(const Objective& obj, const OptimizerConfig& cfg);
RunRecord run_svrg(const Objective& obj, const OptimizerConfig& cfg);
RunRecord run_lp_sgd(const Objective& obj, const OptimizerConfig& cfg);
RunRecord run_lp_svrg(const Objective& obj, const OptimizerConfig& cfg);
RunRecord run_halp(const Objective& obj, const OptimizerConfig& cfg);
RunRecord run_lm_halp(const Objective& obj, const OptimizerConfig& cfg);

// Dispatch on cfg.algorithm.
RunRecord run(const Objective& obj, const OptimizerConfig& cfg);

// Derive the 16-bit companion of a bit-centered base config under the
// given mode, leaving everything else untouched.
OptimizerConfig clipping_variant_config(const OptimizerConfig& base, ClipMode mode);
RunRecord run_clipping_variant(const Objective& obj, const OptimizerConfig& base,
                               ClipMode mode);

}  // namespace lpopt
