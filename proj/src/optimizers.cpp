#include "lpopt/optimizers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "lpopt/instr.hpp"
#include "lpopt/theory.hpp"

namespace lpopt {

namespace {

constexpr std::uint64_t kSampleStream = 0;  // component / epoch sampling
constexpr std::uint64_t kRoundStream = 1;   // stochastic rounding

std::span<const double> cspan(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

std::span<double> mspan(Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

bool uses_fixed_scale(Algorithm a) {
  return a == Algorithm::LpSgd || a == Algorithm::LpSvrg;
}

bool uses_bit_centering(Algorithm a) {
  return a == Algorithm::Halp || a == Algorithm::LmHalp;
}

void validate_config(const Objective& obj, const OptimizerConfig& cfg) {
  if (!(std::isfinite(cfg.alpha) && cfg.alpha >= 0.0)) {
    throw InvalidInputError("optimizer: alpha must be finite and >= 0");
  }
  if (cfg.epochs < 0) {
    throw InvalidInputError("optimizer: epochs must be >= 0");
  }
  if (cfg.inner_steps < 0) {
    throw InvalidInputError("optimizer: inner_steps must be >= 0");
  }
  if (cfg.full_grad_period < 1) {
    throw InvalidInputError("optimizer: full_grad_period must be >= 1");
  }
  if (!(std::isfinite(cfg.metric_every_passes) && cfg.metric_every_passes >= 0.0)) {
    throw InvalidInputError("optimizer: metric_every_passes must be finite and >= 0");
  }
  if (!(std::isfinite(cfg.divergence_limit) && cfg.divergence_limit > 0.0)) {
    throw InvalidInputError("optimizer: divergence_limit must be positive");
  }
  if (!(std::isfinite(cfg.delta_min) && cfg.delta_min > 0.0)) {
    throw InvalidInputError("optimizer: delta_min must be positive");
  }
  if (cfg.init.size() != 0 && cfg.init.size() != obj.dim()) {
    throw InvalidInputError("optimizer: init length does not match objective");
  }
  if (uses_fixed_scale(cfg.algorithm)) {
    if (cfg.bits < 2 || cfg.bits > 64) {
      throw InvalidInputError("optimizer: bits must be in [2, 64]");
    }
    if (!(std::isfinite(cfg.delta) && cfg.delta > 0.0)) {
      throw InvalidInputError("optimizer: delta must be positive for fixed-scale runs");
    }
  }
  if (uses_bit_centering(cfg.algorithm)) {
    if (cfg.bits < 2 || cfg.bits > 64) {
      throw InvalidInputError("optimizer: bits must be in [2, 64]");
    }
    if (!(std::isfinite(cfg.mu) && cfg.mu > 0.0)) {
      throw InvalidInputError("optimizer: mu must be positive for bit-centered runs");
    }
  }
  if (cfg.algorithm == Algorithm::LmHalp) {
    if (cfg.bits > 32) {
      throw InvalidInputError("lm_halp: bits must be <= 32 (inner arithmetic is 2b wide)");
    }
    if (cfg.option != EpochOption::LastIterate) {
      throw InvalidInputError("lm_halp: only the last-iterate epoch update is defined");
    }
    const auto& q = obj.dataset().quantized;
    if (!q.has_value()) {
      throw InvalidInputError("lm_halp: dataset has no quantized examples");
    }
    if (q->repr.bits() != cfg.bits) {
      throw InvalidInputError("lm_halp: dataset quantized at a different width");
    }
    if (q->rows.size() != static_cast<std::size_t>(obj.num_components()) ||
        (!q->rows.empty() &&
         q->rows.front().size() != static_cast<std::size_t>(obj.feature_dim()))) {
      throw InvalidInputError("lm_halp: quantized rows do not match the dataset shape");
    }
  }
}

Eigen::VectorXd initial_iterate(const Objective& obj, const OptimizerConfig& cfg) {
  if (cfg.init.size() == 0) return Eigen::VectorXd::Zero(obj.dim());
  return cfg.init;
}

struct Recorder {
  explicit Recorder(const OptimizerConfig& c) : cfg(c) {}

  const OptimizerConfig& cfg;
  RunRecord rec;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double next_pass = 0.0;

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }

  bool due(double pass, bool forced) const {
    return forced || cfg.metric_every_passes <= 0.0 ||
           pass + 1e-9 >= next_pass;
  }

  // Records a measurement row (subject to the metric_every gate) and
  // enforces the divergence guard; the guard runs whether or not the row
  // was stored, so a blowup is never silently skipped.
  void boundary(double pass, const Eigen::VectorXd& w, double loss,
                double grad_norm, double delta, double delta_inner,
                double delta_aux, bool forced) {
    const bool bad = !(std::isfinite(loss) && std::isfinite(grad_norm)) ||
                     loss > cfg.divergence_limit ||
                     grad_norm > cfg.divergence_limit;
    if (due(pass, forced) || bad) {
      MetricRow row;
      row.pass = pass;
      row.seconds = elapsed();
      row.loss = loss;
      row.grad_norm = grad_norm;
      row.delta = delta;
      row.iterate_hash = hash_vector(w);
      row.delta_inner = delta_inner;
      row.delta_aux = delta_aux;
      rec.rows.push_back(row);
      if (cfg.metric_every_passes > 0.0) {
        next_pass = pass + cfg.metric_every_passes;
      }
    }
    if (bad) {
      rec.status = "diverged";
      rec.final_iterate = w;
      throw DivergenceError("run diverged near pass " + std::to_string(pass),
                            std::move(rec));
    }
  }

  // Mid-epoch blowup: the update became non-finite before the next
  // scheduled measurement.
  [[noreturn]] void blowup(double pass, const Eigen::VectorXd& w, double delta) {
    boundary(pass, w, std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity(), delta, 0.0, 0.0, true);
    throw DivergenceError("unreachable", std::move(rec));  // boundary throws
  }

  void add_inner(const instr::Counters& before) {
    const auto after = instr::counters();
    rec.inner_fp_vector_ops += after.fp_vector_ops - before.fp_vector_ops;
    rec.inner_lp_vector_ops += after.lp_vector_ops - before.lp_vector_ops;
  }
};

}  // namespace

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "sgd") return Algorithm::Sgd;
  if (s == "svrg") return Algorithm::Svrg;
  if (s == "lp-sgd" || s == "lp_sgd") return Algorithm::LpSgd;
  if (s == "lp-svrg" || s == "lp_svrg") return Algorithm::LpSvrg;
  if (s == "halp") return Algorithm::Halp;
  if (s == "lm-halp" || s == "lm_halp") return Algorithm::LmHalp;
  throw InvalidInputError("unknown algorithm '" + s + "'");
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Sgd: return "sgd";
    case Algorithm::Svrg: return "svrg";
    case Algorithm::LpSgd: return "lp-sgd";
    case Algorithm::LpSvrg: return "lp-svrg";
    case Algorithm::Halp: return "halp";
    case Algorithm::LmHalp: return "lm-halp";
  }
  throw InvalidInputError("unknown algorithm enum value");
}

EpochOption epoch_option_from_string(const std::string& s) {
  if (s == "I" || s == "i" || s == "last") return EpochOption::LastIterate;
  if (s == "II" || s == "ii" || s == "sampled") return EpochOption::SampledIterate;
  throw InvalidInputError("unknown epoch option '" + s + "' (use I or II)");
}

std::string to_string(EpochOption o) {
  return o == EpochOption::LastIterate ? "I" : "II";
}

ClipMode clip_mode_from_string(const std::string& s) {
  if (s == "scale") return ClipMode::Scale;
  if (s == "clip") return ClipMode::Clip;
  throw InvalidInputError("unknown clip mode '" + s + "' (use scale or clip)");
}

long resolve_inner_steps(const OptimizerConfig& cfg, long n) {
  const long t = cfg.inner_steps > 0 ? cfg.inner_steps
                                     : static_cast<long>(cfg.full_grad_period) * n;
  if (t < 1) {
    throw InvalidInputError("optimizer: epoch length must be >= 1");
  }
  return t;
}

std::uint64_t hash_vector(const Eigen::VectorXd& v) {
  std::uint64_t h = 1469598103934665603ULL;
  const auto* p = reinterpret_cast<const unsigned char*>(v.data());
  const std::size_t nb = sizeof(double) * static_cast<std::size_t>(v.size());
  for (std::size_t i = 0; i < nb; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

RunRecord run_sgd(const Objective& obj, const OptimizerConfig& cfg) {
  validate_config(obj, cfg);
  const long n = obj.num_components();
  const long T = resolve_inner_steps(cfg, n);
  QuantRng sample(cfg.seed, kSampleStream);
  Eigen::VectorXd w = initial_iterate(obj, cfg);
  Eigen::VectorXd g(obj.dim());
  Recorder r{cfg};
  long steps = 0;
  for (int k = 0; k < cfg.epochs; ++k) {
    r.boundary(static_cast<double>(steps) / n, w, obj.loss(w),
               obj.full_gradient(w).norm(), 0.0, 0.0, 0.0, k == 0);
    const auto before = instr::counters();
    for (long t = 0; t < T; ++t) {
      const long i = static_cast<long>(sample.next_index(static_cast<std::size_t>(n)));
      obj.component_gradient_into(i, w, g);
      w.noalias() -= cfg.alpha * g;
      instr::count_fp();
    }
    r.add_inner(before);
    steps += T;
  }
  r.boundary(static_cast<double>(steps) / n, w, obj.loss(w),
             obj.full_gradient(w).norm(), 0.0, 0.0, 0.0, true);
  r.rec.final_iterate = w;
  r.rec.steps_taken = steps;
  return std::move(r.rec);
}

RunRecord run_svrg(const Objective& obj, const OptimizerConfig& cfg) {
  validate_config(obj, cfg);
  const long n = obj.num_components();
  const long T = resolve_inner_steps(cfg, n);
  QuantRng sample(cfg.seed, kSampleStream);
  Eigen::VectorXd wt = initial_iterate(obj, cfg);
  Eigen::VectorXd w, snapshot, gt;
  Eigen::VectorXd g1(obj.dim()), g2(obj.dim());
  Recorder r{cfg};
  long steps = 0;
  for (int k = 0; k < cfg.epochs; ++k) {
    gt = obj.full_gradient(wt);
    r.boundary(static_cast<double>(steps) / n, wt, obj.loss(wt), gt.norm(),
               0.0, 0.0, 0.0, k == 0);
    long t_pick = -1;
    if (cfg.option == EpochOption::SampledIterate) {
      t_pick = static_cast<long>(sample.next_index(static_cast<std::size_t>(T)));
    }
    w = wt;
    snapshot = wt;
    const auto before = instr::counters();
    for (long t = 0; t < T; ++t) {
      if (t == t_pick) snapshot = w;
      const long i = static_cast<long>(sample.next_index(static_cast<std::size_t>(n)));
      obj.component_gradient_into(i, w, g1);
      obj.component_gradient_into(i, wt, g2);
      w.noalias() -= cfg.alpha * (g1 - g2 + gt);
      instr::count_fp();
    }
    r.add_inner(before);
    wt = cfg.option == EpochOption::SampledIterate ? snapshot : w;
    steps += T;
  }
  r.boundary(static_cast<double>(steps) / n, wt, obj.loss(wt),
             obj.full_gradient(wt).norm(), 0.0, 0.0, 0.0, true);
  r.rec.final_iterate = wt;
  r.rec.steps_taken = steps;
  return std::move(r.rec);
}

RunRecord run_lp_sgd(const Objective& obj, const OptimizerConfig& cfg) {
  validate_config(obj, cfg);
  const long n = obj.num_components();
  const long T = resolve_inner_steps(cfg, n);
  const LPRepr repr(cfg.delta, cfg.bits);
  QuantRng sample(cfg.seed, kSampleStream);
  QuantRng rounder(cfg.seed, kRoundStream);
  Eigen::VectorXd w0 = initial_iterate(obj, cfg);
  LPVector w_lp = quantize_vector(cspan(w0), repr, rounder);
  Eigen::VectorXd w(obj.dim()), g(obj.dim()), u(obj.dim());
  to_real(w_lp, mspan(w));
  Recorder r{cfg};
  long steps = 0;
  for (int k = 0; k < cfg.epochs; ++k) {
    r.boundary(static_cast<double>(steps) / n, w, obj.loss(w),
               obj.full_gradient(w).norm(), cfg.delta, 0.0, 0.0, k == 0);
    const auto before = instr::counters();
    for (long t = 0; t < T; ++t) {
      const long i = static_cast<long>(sample.next_index(static_cast<std::size_t>(n)));
      obj.component_gradient_into(i, w, g);
      u = w - cfg.alpha * g;
      instr::count_fp();
      if (!u.allFinite()) {
        r.blowup(static_cast<double>(steps + t + 1) / n, u, cfg.delta);
      }
      w_lp = quantize_vector(cspan(u), repr, rounder);
      to_real(w_lp, mspan(w));
    }
    r.add_inner(before);
    steps += T;
  }
  r.boundary(static_cast<double>(steps) / n, w, obj.loss(w),
             obj.full_gradient(w).norm(), cfg.delta, 0.0, 0.0, true);
  r.rec.final_iterate = w;
  r.rec.steps_taken = steps;
  return std::move(r.rec);
}

RunRecord run_lp_svrg(const Objective& obj, const OptimizerConfig& cfg) {
  validate_config(obj, cfg);
  const long n = obj.num_components();
  const long T = resolve_inner_steps(cfg, n);
  const LPRepr repr(cfg.delta, cfg.bits);
  QuantRng sample(cfg.seed, kSampleStream);
  QuantRng rounder(cfg.seed, kRoundStream);
  Eigen::VectorXd w0 = initial_iterate(obj, cfg);
  LPVector wt_lp = quantize_vector(cspan(w0), repr, rounder);
  Eigen::VectorXd wt(obj.dim()), w(obj.dim()), u(obj.dim()), gt;
  Eigen::VectorXd g1(obj.dim()), g2(obj.dim());
  to_real(wt_lp, mspan(wt));
  Recorder r{cfg};
  long steps = 0;
  for (int k = 0; k < cfg.epochs; ++k) {
    gt = obj.full_gradient(wt);
    r.boundary(static_cast<double>(steps) / n, wt, obj.loss(wt), gt.norm(),
               cfg.delta, 0.0, 0.0, k == 0);
    long t_pick = -1;
    if (cfg.option == EpochOption::SampledIterate) {
      t_pick = static_cast<long>(sample.next_index(static_cast<std::size_t>(T)));
    }
    LPVector w_lp = wt_lp;
    LPVector snapshot_lp = wt_lp;
    w = wt;
    const auto before = instr::counters();
    for (long t = 0; t < T; ++t) {
      if (t == t_pick) snapshot_lp = w_lp;
      const long i = static_cast<long>(sample.next_index(static_cast<std::size_t>(n)));
      obj.component_gradient_into(i, w, g1);
      obj.component_gradient_into(i, wt, g2);
      u = w - cfg.alpha * (g1 - g2 + gt);
      instr::count_fp();
      if (!u.allFinite()) {
        r.blowup(static_cast<double>(steps + t + 1) / n, u, cfg.delta);
      }
      w_lp = quantize_vector(cspan(u), repr, rounder);
      to_real(w_lp, mspan(w));
    }
    r.add_inner(before);
    wt_lp = cfg.option == EpochOption::SampledIterate ? snapshot_lp : w_lp;
    to_real(wt_lp, mspan(wt));
    steps += T;
  }
  r.boundary(static_cast<double>(steps) / n, wt, obj.loss(wt),
             obj.full_gradient(wt).norm(), cfg.delta, 0.0, 0.0, true);
  r.rec.final_iterate = wt;
  r.rec.steps_taken = steps;
  return std::move(r.rec);
}

RunRecord run_halp(const Objective& obj, const OptimizerConfig& cfg) {
  validate_config(obj, cfg);
  const long n = obj.num_components();
  const long T = resolve_inner_steps(cfg, n);
  QuantRng sample(cfg.seed, kSampleStream);
  QuantRng rounder(cfg.seed, kRoundStream);
  Eigen::VectorXd wt = initial_iterate(obj, cfg);
  Eigen::VectorXd z(obj.dim()), wz(obj.dim()), u(obj.dim()), zero =
      Eigen::VectorXd::Zero(obj.dim());
  Eigen::VectorXd g1(obj.dim()), g2(obj.dim()), gt;
  Recorder r{cfg};
  long steps = 0;
  bool converged = false;
  for (int k = 0; k < cfg.epochs && !converged; ++k) {
    gt = obj.full_gradient(wt);
    const double gn = gt.norm();
    double delta = 0.0;
    if (std::isfinite(gn) && gn > 0.0) {
      delta = std::max(theory::halp_scale(gn, cfg.mu, cfg.bits), cfg.delta_min);
    }
    r.boundary(static_cast<double>(steps) / n, wt, obj.loss(wt), gn, delta,
               0.0, 0.0, k == 0 || gn == 0.0);
    if (gn == 0.0) {
      r.rec.status = "converged";
      converged = true;
      break;
    }
    const LPRepr repr(delta, cfg.bits);
    LPVector z_lp = quantize_vector(cspan(zero), repr, rounder);
    LPVector snapshot_lp = z_lp;
    to_real(z_lp, mspan(z));
    long t_pick = -1;
    if (cfg.option == EpochOption::SampledIterate) {
      t_pick = static_cast<long>(sample.next_index(static_cast<std::size_t>(T)));
    }
    const auto before = instr::counters();
    for (long t = 0; t < T; ++t) {
      if (t == t_pick) snapshot_lp = z_lp;
      const long i = static_cast<long>(sample.next_index(static_cast<std::size_t>(n)));
      wz = wt + z;
      instr::count_fp();
      obj.component_gradient_into(i, wz, g1);
      obj.component_gradient_into(i, wt, g2);
      u = z - cfg.alpha * (g1 - g2 + gt);
      instr::count_fp();
      if (!u.allFinite()) {
        r.blowup(static_cast<double>(steps + t + 1) / n, u, delta);
      }
      z_lp = quantize_vector(cspan(u), repr, rounder);
      to_real(z_lp, mspan(z));
    }
    r.add_inner(before);
    if (cfg.option == EpochOption::SampledIterate) {
      to_real(snapshot_lp, mspan(z));
    }
    wt += z;
    steps += T;
  }
  if (!converged) {
    gt = obj.full_gradient(wt);
    const double gn = gt.norm();
    double delta = 0.0;
    if (std::isfinite(gn) && gn > 0.0) {
      delta = std::max(theory::halp_scale(gn, cfg.mu, cfg.bits), cfg.delta_min);
    }
    r.boundary(static_cast<double>(steps) / n, wt, obj.loss(wt), gn, delta,
               0.0, 0.0, true);
    if (gn == 0.0) r.rec.status = "converged";
  }
  r.rec.final_iterate = wt;
  r.rec.steps_taken = steps;
  return std::move(r.rec);
}

RunRecord run_lm_halp(const Objective& obj, const OptimizerConfig& cfg) {
  validate_config(obj, cfg);
  const auto& q = *obj.dataset().quantized;
  const long n = obj.num_components();
  const int d = obj.feature_dim();
  const int nc = obj.num_outputs();
  const long T = resolve_inner_steps(cfg, n);
  const double delta_d = q.repr.delta();
  const int b = cfg.bits;

  QuantRng sample(cfg.seed, kSampleStream);
  QuantRng rounder(cfg.seed, kRoundStream);

  Eigen::VectorXd wt = initial_iterate(obj, cfg);
  Eigen::MatrixXd phi(n, nc);
  Eigen::VectorXd gvec(obj.dim());
  Eigen::VectorXd xbuf(d), abuf(d), zbuf(d), ubuf(d);
  Eigen::VectorXd logits(nc), phirow(nc), dl(nc), dl0(nc);
  Recorder r{cfg};
  long steps = 0;
  bool converged = false;

  // One data sweep per epoch: predictions phi, reference gradient, loss.
  // Uses the dequantized rows, so the run optimizes the objective actually
  // seen by the integer inner loop.
  auto epoch_stats = [&](double& loss_out) {
    Eigen::Map<const Eigen::MatrixXd> wmat(wt.data(), d, nc);
    Eigen::Map<Eigen::MatrixXd> gmat(gvec.data(), d, nc);
    gmat.setZero();
    double acc = 0.0;
    for (long i = 0; i < n; ++i) {
      to_real(q.rows[static_cast<std::size_t>(i)], mspan(xbuf));
      phirow.noalias() = wmat.transpose() * xbuf;
      phi.row(i) = phirow.transpose();
      acc += obj.link_loss(i, phirow);
      obj.link_derivative(i, phirow, dl);
      gmat.noalias() += xbuf * dl.transpose();
    }
    gmat /= static_cast<double>(n);
    gvec += obj.l2() * wt;
    loss_out = acc / static_cast<double>(n) +
               0.5 * obj.l2() * wt.squaredNorm();
    return gvec.norm();
  };

  for (int k = 0; k < cfg.epochs && !converged; ++k) {
    double loss = 0.0;
    const double gn = epoch_stats(loss);
    double dm = 0.0, di = 0.0, daux = 0.0;
    if (std::isfinite(gn) && gn > 0.0) {
      const double s = std::max(theory::halp_scale(gn, cfg.mu, b), cfg.delta_min);
      const double di0 = std::ldexp(s, -b);
      daux = di0 / delta_d;
      if (!(std::isfinite(daux) && daux > 0.0)) {
        throw InvalidInputError("lm_halp: auxiliary scale left the double range");
      }
      // Nudge the chain so all three scales satisfy their defining
      // relations exactly in double arithmetic: di == daux * delta_d and
      // dm == di * 2^b.  dm may land a couple of ulps from the raw scale.
      di = daux * delta_d;
      dm = std::ldexp(di, b);
    }
    r.boundary(static_cast<double>(steps) / n, wt, loss, gn, dm, di, daux,
               k == 0 || gn == 0.0);
    if (gn == 0.0) {
      r.rec.status = "converged";
      converged = true;
      break;
    }

    const LPRepr repr_m(dm, b), repr_i(di, b), repr_s(daux, b);
    Eigen::Map<const Eigen::MatrixXd> gmat(gvec.data(), d, nc);
    std::vector<LPVector> zcols;
    zcols.reserve(static_cast<std::size_t>(nc));
    zbuf.setZero();
    for (int c = 0; c < nc; ++c) {
      zcols.push_back(quantize_vector(cspan(zbuf), repr_m, rounder));
    }

    if (!cfg.lm_bypass_aux_quant) {
      std::vector<LPVector> h_wide;
      h_wide.reserve(static_cast<std::size_t>(nc));
      for (int c = 0; c < nc; ++c) {
        abuf = cfg.alpha * gmat.col(c);
        instr::count_fp();
        h_wide.push_back(
            widen_range(quantize_vector(cspan(abuf), repr_i, rounder), b));
      }
      const auto before = instr::counters();
      for (long t = 0; t < T; ++t) {
        const long i =
            static_cast<long>(sample.next_index(static_cast<std::size_t>(n)));
        const LPVector& xrow = q.rows[static_cast<std::size_t>(i)];
        for (int c = 0; c < nc; ++c) {
          logits[c] = phi(i, c) + dot_lp(xrow, zcols[static_cast<std::size_t>(c)]);
        }
        phirow = phi.row(i).transpose();
        obj.link_derivative(i, logits, dl);
        obj.link_derivative(i, phirow, dl0);
        for (int c = 0; c < nc; ++c) {
          const double beta = cfg.alpha * (dl[c] - dl0[c]);
          const LPScalar gamma = quantize_scalar(beta, repr_s, rounder);
          LPVector u = sub_same_scale(
              sub_same_scale(widen_shift(zcols[static_cast<std::size_t>(c)], b),
                             mul_scalar(xrow, gamma)),
              h_wide[static_cast<std::size_t>(c)]);
          zcols[static_cast<std::size_t>(c)] = requantize_shift(u, b, b, rounder);
        }
      }
      r.add_inner(before);
    } else {
      // Test hook: same trajectory semantics with the auxiliary
      // quantizations removed, keeping only the iterate rounding.
      Eigen::MatrixXd zreal = Eigen::MatrixXd::Zero(d, nc);
      const auto before = instr::counters();
      for (long t = 0; t < T; ++t) {
        const long i =
            static_cast<long>(sample.next_index(static_cast<std::size_t>(n)));
        to_real(q.rows[static_cast<std::size_t>(i)], mspan(xbuf));
        for (int c = 0; c < nc; ++c) {
          logits[c] = phi(i, c) + xbuf.dot(zreal.col(c));
        }
        phirow = phi.row(i).transpose();
        obj.link_derivative(i, logits, dl);
        obj.link_derivative(i, phirow, dl0);
        for (int c = 0; c < nc; ++c) {
          const double beta = cfg.alpha * (dl[c] - dl0[c]);
          ubuf = zreal.col(c) - beta * xbuf - cfg.alpha * gmat.col(c);
          instr::count_fp();
          if (!ubuf.allFinite()) {
            r.blowup(static_cast<double>(steps + t + 1) / n, ubuf, dm);
          }
          zcols[static_cast<std::size_t>(c)] =
              quantize_vector(cspan(ubuf), repr_m, rounder);
          to_real(zcols[static_cast<std::size_t>(c)], mspan(zbuf));
          zreal.col(c) = zbuf;
        }
      }
      r.add_inner(before);
    }

    Eigen::Map<Eigen::MatrixXd> wmat(wt.data(), d, nc);
    for (int c = 0; c < nc; ++c) {
      to_real(zcols[static_cast<std::size_t>(c)], mspan(zbuf));
      wmat.col(c) += zbuf;
    }
    steps += T;
  }

  if (!converged) {
    double loss = 0.0;
    const double gn = epoch_stats(loss);
    double dm = 0.0, di = 0.0, daux = 0.0;
    if (std::isfinite(gn) && gn > 0.0) {
      const double s = std::max(theory::halp_scale(gn, cfg.mu, b), cfg.delta_min);
      const double di0 = std::ldexp(s, -b);
      daux = di0 / delta_d;
      di = daux * delta_d;
      dm = std::ldexp(di, b);
    }
    r.boundary(static_cast<double>(steps) / n, wt, loss, gn, dm, di, daux, true);
    if (gn == 0.0) r.rec.status = "converged";
  }
  r.rec.final_iterate = wt;
  r.rec.steps_taken = steps;
  return std::move(r.rec);
}

RunRecord run(const Objective& obj, const OptimizerConfig& cfg) {
  switch (cfg.algorithm) {
    case Algorithm::Sgd: return run_sgd(obj, cfg);
    case Algorithm::Svrg: return run_svrg(obj, cfg);
    case Algorithm::LpSgd: return run_lp_sgd(obj, cfg);
    case Algorithm::LpSvrg: return run_lp_svrg(obj, cfg);
    case Algorithm::Halp: return run_halp(obj, cfg);
    case Algorithm::LmHalp: return run_lm_halp(obj, cfg);
  }
  throw InvalidInputError("unknown algorithm enum value");
}

OptimizerConfig clipping_variant_config(const OptimizerConfig& base, ClipMode mode) {
  if (!uses_bit_centering(base.algorithm)) {
    throw InvalidInputError("clipping variant applies to bit-centered runs only");
  }
  if (base.bits >= 16) {
    throw InvalidInputError("clipping variant derives a 16-bit run; base must be narrower");
  }
  OptimizerConfig out = base;
  out.bits = 16;
  if (mode == ClipMode::Scale) {
    const double span_base = std::ldexp(1.0, base.bits - 1) - 1.0;
    const double span16 = std::ldexp(1.0, 15) - 1.0;
    out.mu = base.mu * span_base / span16;
  }
  return out;
}

RunRecord run_clipping_variant(const Objective& obj, const OptimizerConfig& base,
                               ClipMode mode) {
  return run(obj, clipping_variant_config(base, mode));
}

}  // namespace lpopt
