#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "lpopt/objectives.hpp"
#include "lpopt/optimizers.hpp"
#include "lpopt/theory.hpp"

using namespace lpopt;

namespace {

OptimizerConfig base_config(Algorithm a) {
  OptimizerConfig cfg;
  cfg.algorithm = a;
  cfg.alpha = 0.02;
  cfg.epochs = 3;
  cfg.inner_steps = 0;
  cfg.seed = 11;
  return cfg;
}

Objective small_regression(std::uint64_t seed = 5, double l2 = 0.0) {
  return Objective(make_regression(80, 6, 0.2, seed), LossFamily::Squared, l2);
}

// Same rows except wall-clock time.
void check_records_equal(const RunRecord& a, const RunRecord& b) {
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    REQUIRE(a.rows[i].pass == b.rows[i].pass);
    REQUIRE(a.rows[i].loss == b.rows[i].loss);
    REQUIRE(a.rows[i].grad_norm == b.rows[i].grad_norm);
    REQUIRE(a.rows[i].delta == b.rows[i].delta);
    REQUIRE(a.rows[i].delta_inner == b.rows[i].delta_inner);
    REQUIRE(a.rows[i].delta_aux == b.rows[i].delta_aux);
    REQUIRE(a.rows[i].iterate_hash == b.rows[i].iterate_hash);
  }
  REQUIRE(a.final_iterate == b.final_iterate);
  REQUIRE(a.status == b.status);
  REQUIRE(a.steps_taken == b.steps_taken);
}

void check_passes_strictly_increasing(const RunRecord& rec) {
  REQUIRE(!rec.rows.empty());
  for (std::size_t i = 1; i < rec.rows.size(); ++i) {
    REQUIRE(rec.rows[i].pass > rec.rows[i - 1].pass);
  }
}

Dataset dequantized_copy(const Dataset& ds) {
  Dataset out;
  out.X.resize(ds.n(), ds.dim());
  for (long i = 0; i < ds.n(); ++i) {
    const std::vector<double> row =
        to_real(ds.quantized->rows[static_cast<std::size_t>(i)]);
    for (int j = 0; j < ds.dim(); ++j) {
      out.X(i, j) = row[static_cast<std::size_t>(j)];
    }
  }
  out.targets = ds.targets;
  out.labels = ds.labels;
  out.num_classes = ds.num_classes;
  return out;
}

double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({1e-30, std::abs(a), std::abs(b)});
}

}  // namespace

TEST_CASE("sgd matches a hand-rolled reference loop bitwise") {
  const Objective obj = small_regression();
  OptimizerConfig cfg = base_config(Algorithm::Sgd);
  cfg.inner_steps = 37;
  const RunRecord rec = run_sgd(obj, cfg);

  QuantRng sample(cfg.seed, 0);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(obj.dim());
  Eigen::VectorXd g(obj.dim());
  const long n = obj.num_components();
  for (int k = 0; k < cfg.epochs; ++k) {
    for (long t = 0; t < cfg.inner_steps; ++t) {
      const long i = static_cast<long>(sample.next_index(static_cast<std::size_t>(n)));
      obj.component_gradient_into(i, w, g);
      w -= cfg.alpha * g;
    }
  }
  REQUIRE(rec.final_iterate == w);
  REQUIRE(rec.steps_taken == 3 * 37);
  REQUIRE(rec.rows.back().iterate_hash == hash_vector(w));
}

TEST_CASE("svrg matches a hand-rolled reference loop bitwise") {
  const Objective obj = small_regression();
  OptimizerConfig cfg = base_config(Algorithm::Svrg);
  cfg.inner_steps = 53;
  const RunRecord rec = run_svrg(obj, cfg);

  QuantRng sample(cfg.seed, 0);
  Eigen::VectorXd wt = Eigen::VectorXd::Zero(obj.dim());
  Eigen::VectorXd w, gt, g1(obj.dim()), g2(obj.dim());
  const long n = obj.num_components();
  for (int k = 0; k < cfg.epochs; ++k) {
    gt = obj.full_gradient(wt);
    w = wt;
    for (long t = 0; t < cfg.inner_steps; ++t) {
      const long i = static_cast<long>(sample.next_index(static_cast<std::size_t>(n)));
      obj.component_gradient_into(i, w, g1);
      obj.component_gradient_into(i, wt, g2);
      w -= cfg.alpha * (g1 - g2 + gt);
    }
    wt = w;
  }
  REQUIRE(rec.final_iterate == wt);
}

TEST_CASE("zero step size is a fixed point") {
  const Objective obj = small_regression();
  for (Algorithm a : {Algorithm::Sgd, Algorithm::Svrg}) {
    OptimizerConfig cfg = base_config(a);
    cfg.alpha = 0.0;
    const RunRecord rec = run(obj, cfg);
    CHECK(rec.final_iterate == Eigen::VectorXd::Zero(obj.dim()));
    for (const MetricRow& row : rec.rows) {
      CHECK(row.loss == rec.rows.front().loss);
    }
  }
}

TEST_CASE("svrg drives the gradient down many orders of magnitude") {
  const Objective obj(make_regression(1000, 100, 0.0, 42), LossFamily::Squared, 0.0);
  OptimizerConfig cfg = base_config(Algorithm::Svrg);
  cfg.alpha = 5e-3;
  cfg.inner_steps = 2000;
  cfg.epochs = 25;  // 50 data passes of inner steps
  cfg.seed = 2;     // typical seeds land at 0.5-2e6; this one has margin
  const RunRecord rec = run_svrg(obj, cfg);
  REQUIRE(rec.rows.front().grad_norm > 0.0);
  CHECK(rec.rows.back().grad_norm <= 1e-6 * rec.rows.front().grad_norm);
  CHECK(rec.rows.back().pass == doctest::Approx(50.0));
  check_passes_strictly_increasing(rec);
}

TEST_CASE("runs are deterministic in the seed") {
  const Objective obj = small_regression(7);
  Dataset qds = make_regression(80, 6, 0.2, 7);
  quantize_dataset(qds, 8, 21);
  const Objective qobj(std::move(qds), LossFamily::Squared, 0.0);

  for (Algorithm a : {Algorithm::Sgd, Algorithm::Svrg, Algorithm::LpSgd,
                      Algorithm::LpSvrg, Algorithm::Halp, Algorithm::LmHalp}) {
    OptimizerConfig cfg = base_config(a);
    cfg.delta = 0.05;
    cfg.bits = 8;
    cfg.mu = 3.0;
    cfg.inner_steps = 40;
    const Objective& o = a == Algorithm::LmHalp ? qobj : obj;
    const RunRecord r1 = run(o, cfg);
    const RunRecord r2 = run(o, cfg);
    check_records_equal(r1, r2);
    check_passes_strictly_increasing(r1);

    cfg.seed = 12;
    const RunRecord r3 = run(o, cfg);
    REQUIRE(r3.final_iterate != r1.final_iterate);
  }
}

TEST_CASE("sampled-iterate epoch option") {
  const Objective obj = small_regression();

  // with one inner step the sampled iterate is always the epoch's starting
  // point, so the outer iterate never moves
  OptimizerConfig cfg = base_config(Algorithm::Svrg);
  cfg.option = EpochOption::SampledIterate;
  cfg.inner_steps = 1;
  cfg.epochs = 5;
  const RunRecord frozen = run_svrg(obj, cfg);
  CHECK(frozen.final_iterate == Eigen::VectorXd::Zero(obj.dim()));

  // with full-length epochs it still optimizes
  cfg.inner_steps = 0;
  const RunRecord moving = run_svrg(obj, cfg);
  CHECK(moving.rows.back().loss < 0.5 * moving.rows.front().loss);

  // and differs from the last-iterate rule under the same seed
  OptimizerConfig last = cfg;
  last.option = EpochOption::LastIterate;
  CHECK(run_svrg(obj, last).final_iterate != moving.final_iterate);

  // same checks for the bit-centered run
  OptimizerConfig hc = base_config(Algorithm::Halp);
  hc.mu = 3.0;
  hc.option = EpochOption::SampledIterate;
  const RunRecord h = run_halp(obj, hc);
  CHECK(h.rows.back().loss < h.rows.front().loss);
}

TEST_CASE("variance-reduced direction is unbiased and exact at the anchor") {
  const Objective obj = small_regression(9);
  const long n = obj.num_components();
  QuantRng rng(3);
  Eigen::VectorXd w(obj.dim()), anchor(obj.dim());
  for (int j = 0; j < obj.dim(); ++j) {
    w[j] = rng.next_normal();
    anchor[j] = rng.next_normal();
  }
  const Eigen::VectorXd gt = obj.full_gradient(anchor);

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(obj.dim());
  for (long i = 0; i < n; ++i) {
    mean += obj.component_gradient(i, w) - obj.component_gradient(i, anchor) + gt;
  }
  mean /= static_cast<double>(n);
  CHECK((mean - obj.full_gradient(w)).norm() <=
        1e-12 * std::max(1.0, obj.full_gradient(w).norm()));

  // at the anchor every component direction collapses to the full gradient
  for (long i = 0; i < n; ++i) {
    const Eigen::VectorXd v = obj.component_gradient(i, anchor) -
                              obj.component_gradient(i, anchor) + gt;
    REQUIRE(v == gt);
  }
}

TEST_CASE("quantized-iterate runs stay on the lattice") {
  const Objective obj = small_regression();
  for (Algorithm a : {Algorithm::LpSgd, Algorithm::LpSvrg}) {
    OptimizerConfig cfg = base_config(a);
    cfg.delta = 0.25;
    cfg.bits = 8;
    const RunRecord rec = run(obj, cfg);
    REQUIRE(rec.final_iterate.size() == obj.dim());
    for (int j = 0; j < obj.dim(); ++j) {
      const double c = rec.final_iterate[j] / cfg.delta;
      REQUIRE(c == std::nearbyint(c));
      REQUIRE(std::abs(c) <= 127.0);
    }
    for (const MetricRow& row : rec.rows) CHECK(row.delta == cfg.delta);
  }
}

TEST_CASE("wide fine-grained quantization reproduces the full-precision run") {
  const Objective obj(make_regression(100, 10, 0.1, 3), LossFamily::Squared, 0.0);
  OptimizerConfig cfg = base_config(Algorithm::Svrg);
  cfg.alpha = 0.05;
  cfg.epochs = 3;
  const RunRecord exact = run_svrg(obj, cfg);

  OptimizerConfig lp = cfg;
  lp.algorithm = Algorithm::LpSvrg;
  lp.delta = 1e-15;
  lp.bits = 62;
  const RunRecord quantized = run_lp_svrg(obj, lp);

  REQUIRE(exact.rows.size() == quantized.rows.size());
  for (std::size_t i = 0; i < exact.rows.size(); ++i) {
    CHECK(rel_diff(exact.rows[i].loss, quantized.rows[i].loss) <= 1e-6);
    CHECK(rel_diff(exact.rows[i].grad_norm, quantized.rows[i].grad_norm) <= 1e-6);
  }
  CHECK((exact.final_iterate - quantized.final_iterate).norm() <=
        1e-6 * std::max(1.0, exact.final_iterate.norm()));
}

TEST_CASE("divergence raises an error carrying the partial record") {
  const Objective obj = small_regression();

  OptimizerConfig cfg = base_config(Algorithm::Sgd);
  cfg.alpha = 1e6;
  cfg.divergence_limit = 1e8;
  bool thrown = false;
  try {
    run_sgd(obj, cfg);
  } catch (const DivergenceError& e) {
    thrown = true;
    CHECK(e.partial.status == "diverged");
    REQUIRE(!e.partial.rows.empty());
    const MetricRow& last = e.partial.rows.back();
    CHECK((!std::isfinite(last.loss) || last.loss > cfg.divergence_limit ||
           last.grad_norm > cfg.divergence_limit));
    check_passes_strictly_increasing(e.partial);
  }
  REQUIRE(thrown);

  // quantized-iterate path detects non-finite updates mid-epoch; lattice
  // saturation otherwise bounds the iterate, so overflow the update itself
  Dataset one;
  one.X.resize(1, 1);
  one.X(0, 0) = 2.0;
  one.targets.resize(1);
  one.targets[0] = 3.0;
  const Objective tiny(std::move(one), LossFamily::Squared, 0.0);
  OptimizerConfig lp = base_config(Algorithm::LpSgd);
  lp.alpha = 1e308;
  lp.delta = 0.25;
  lp.bits = 8;
  CHECK_THROWS_AS(run_lp_sgd(tiny, lp), DivergenceError);
}

TEST_CASE("bit-centered run reports convergence at an exact optimum") {
  // zero targets make w = 0 the exact minimizer, so the first full gradient
  // vanishes bit-for-bit
  Dataset ds = make_regression(30, 4, 0.0, 8);
  ds.targets.setZero();
  const Objective obj(std::move(ds), LossFamily::Squared, 0.0);

  OptimizerConfig cfg = base_config(Algorithm::Halp);
  cfg.mu = 3.0;
  const RunRecord rec = run_halp(obj, cfg);
  CHECK(rec.status == "converged");
  CHECK(rec.steps_taken == 0);
  REQUIRE(rec.rows.size() == 1);
  CHECK(rec.rows[0].grad_norm == 0.0);
  CHECK(rec.rows[0].delta == 0.0);

  Dataset qds = make_regression(30, 4, 0.0, 8);
  qds.targets.setZero();
  quantize_dataset(qds, 8, 5);
  const Objective qobj(std::move(qds), LossFamily::Squared, 0.0);
  OptimizerConfig lm = base_config(Algorithm::LmHalp);
  lm.mu = 3.0;
  lm.bits = 8;
  const RunRecord lrec = run_lm_halp(qobj, lm);
  CHECK(lrec.status == "converged");
  CHECK(lrec.steps_taken == 0);
}

TEST_CASE("bit-centered scale tracks the gradient norm") {
  // single example in one dimension: f(w) = (w - 2)^2 / 2, gradient at the
  // origin has norm exactly 2
  Dataset ds;
  ds.X.resize(1, 1);
  ds.X(0, 0) = 1.0;
  ds.targets.resize(1);
  ds.targets[0] = 2.0;
  const Objective obj(std::move(ds), LossFamily::Squared, 0.0);

  OptimizerConfig cfg = base_config(Algorithm::Halp);
  cfg.mu = 3.0;
  cfg.bits = 8;
  cfg.alpha = 0.5;
  cfg.epochs = 1;
  cfg.inner_steps = 4;
  const RunRecord rec = run_halp(obj, cfg);
  REQUIRE(rec.rows.size() >= 1);
  CHECK(rec.rows[0].grad_norm == 2.0);
  CHECK(rec.rows[0].delta == theory::halp_scale(2.0, 3.0, 8));

  // the configured floor clamps the derived scale
  cfg.delta_min = 1.0;
  const RunRecord clamped = run_halp(obj, cfg);
  CHECK(clamped.rows[0].delta == 1.0);

  // on a well-conditioned problem the scale shrinks with the gradient
  const Objective reg(make_regression(200, 10, 0.0, 14), LossFamily::Squared, 0.0);
  OptimizerConfig hc = base_config(Algorithm::Halp);
  hc.mu = 3.0;
  hc.alpha = 0.05;
  hc.epochs = 6;
  const RunRecord conv = run_halp(reg, hc);
  const auto& rows = conv.rows;
  REQUIRE(rows.size() >= 3);
  CHECK(rows.back().delta < 0.1 * rows.front().delta);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].delta <= rows[i - 1].delta * 1.5);
  }
}

TEST_CASE("metric gating and degenerate epoch counts") {
  const Objective obj = small_regression();

  OptimizerConfig cfg = base_config(Algorithm::Svrg);
  cfg.inner_steps = obj.num_components();  // one pass per epoch
  cfg.epochs = 3;
  cfg.metric_every_passes = 2.0;
  const RunRecord rec = run_svrg(obj, cfg);
  REQUIRE(rec.rows.size() == 3);
  CHECK(rec.rows[0].pass == 0.0);
  CHECK(rec.rows[1].pass == 2.0);
  CHECK(rec.rows[2].pass == 3.0);  // final row is always recorded

  for (Algorithm a : {Algorithm::Sgd, Algorithm::Svrg, Algorithm::LpSvrg,
                      Algorithm::Halp}) {
    OptimizerConfig zero = base_config(a);
    zero.epochs = 0;
    zero.delta = 0.25;
    zero.mu = 3.0;
    const RunRecord r = run(obj, zero);
    REQUIRE(r.rows.size() == 1);
    CHECK(r.rows[0].pass == 0.0);
    CHECK(r.steps_taken == 0);
    CHECK(r.final_iterate == Eigen::VectorXd::Zero(obj.dim()));
  }
}

TEST_CASE("epoch length derivation") {
  OptimizerConfig cfg;
  cfg.inner_steps = 0;
  cfg.full_grad_period = 2;
  CHECK(resolve_inner_steps(cfg, 50) == 100);
  cfg.inner_steps = 7;
  CHECK(resolve_inner_steps(cfg, 50) == 7);

  const Objective obj = small_regression();
  OptimizerConfig run_cfg = base_config(Algorithm::Sgd);
  run_cfg.epochs = 2;
  const RunRecord rec = run_sgd(obj, run_cfg);
  CHECK(rec.steps_taken == 2 * 2 * obj.num_components());
}

TEST_CASE("config validation") {
  const Objective obj = small_regression();
  OptimizerConfig cfg = base_config(Algorithm::Sgd);

  cfg.alpha = -1.0;
  CHECK_THROWS_AS(run(obj, cfg), InvalidInputError);
  cfg = base_config(Algorithm::Sgd);
  cfg.epochs = -1;
  CHECK_THROWS_AS(run(obj, cfg), InvalidInputError);
  cfg = base_config(Algorithm::LpSgd);
  cfg.delta = 0.0;
  CHECK_THROWS_AS(run(obj, cfg), InvalidInputError);
  cfg = base_config(Algorithm::LpSgd);
  cfg.delta = 0.1;
  cfg.bits = 1;
  CHECK_THROWS_AS(run(obj, cfg), InvalidInputError);
  cfg = base_config(Algorithm::Halp);
  cfg.mu = 0.0;
  CHECK_THROWS_AS(run(obj, cfg), InvalidInputError);
  cfg = base_config(Algorithm::Sgd);
  cfg.init = Eigen::VectorXd::Zero(3);  // wrong length
  CHECK_THROWS_AS(run(obj, cfg), InvalidInputError);

  // linear-model constraints
  OptimizerConfig lm = base_config(Algorithm::LmHalp);
  lm.mu = 3.0;
  lm.bits = 8;
  CHECK_THROWS_AS(run(obj, lm), InvalidInputError);  // no quantized rows

  Dataset qds = make_regression(30, 4, 0.1, 2);
  quantize_dataset(qds, 8, 1);
  const Objective qobj(std::move(qds), LossFamily::Squared, 0.0);
  lm.bits = 16;
  CHECK_THROWS_AS(run(qobj, lm), InvalidInputError);  // width mismatch
  lm.bits = 8;
  lm.option = EpochOption::SampledIterate;
  CHECK_THROWS_AS(run(qobj, lm), InvalidInputError);
  lm.option = EpochOption::LastIterate;
  lm.bits = 40;
  CHECK_THROWS_AS(run(qobj, lm), InvalidInputError);  // too wide even if quantized matched
  CHECK_NOTHROW(run(qobj, [&] {
    OptimizerConfig ok = base_config(Algorithm::LmHalp);
    ok.mu = 3.0;
    ok.bits = 8;
    ok.epochs = 1;
    return ok;
  }()));

  CHECK_THROWS_AS(algorithm_from_string("sag"), InvalidInputError);
  CHECK(algorithm_from_string("lp-svrg") == Algorithm::LpSvrg);
  CHECK(to_string(Algorithm::LmHalp) == "lm-halp");
  CHECK(epoch_option_from_string("II") == EpochOption::SampledIterate);
  CHECK_THROWS_AS(epoch_option_from_string("III"), InvalidInputError);
}

TEST_CASE("linear-model inner loop runs integer-only") {
  Dataset ds = make_classification(60, 5, 3, 2.0, 4);
  quantize_dataset(ds, 8, 9);
  const Objective obj(std::move(ds), LossFamily::Softmax, 0.0);

  OptimizerConfig cfg = base_config(Algorithm::LmHalp);
  cfg.mu = 3.0;
  cfg.bits = 8;
  cfg.alpha = 0.05;
  cfg.epochs = 2;
  const RunRecord rec = run_lm_halp(obj, cfg);
  CHECK(rec.inner_fp_vector_ops == 0);
  CHECK(rec.inner_lp_vector_ops > 0);
  CHECK(rec.rows.back().loss < rec.rows.front().loss);

  // every recorded epoch satisfies the exact scale chain
  const double delta_d = obj.dataset().quantized->repr.delta();
  for (const MetricRow& row : rec.rows) {
    if (row.grad_norm == 0.0) continue;
    REQUIRE(row.delta_aux > 0.0);
    REQUIRE(row.delta_inner == row.delta_aux * delta_d);
    REQUIRE(row.delta == std::ldexp(row.delta_inner, cfg.bits));
    // the iterate scale stays within rounding slack of the target scale
    const double target =
        std::max(theory::halp_scale(row.grad_norm, cfg.mu, cfg.bits),
                 cfg.delta_min);
    CHECK(rel_diff(row.delta, target) < 1e-12);
  }

  // the generic bit-centered run does floating-point inner work
  Dataset plain = make_classification(60, 5, 3, 2.0, 4);
  const Objective pobj(std::move(plain), LossFamily::Softmax, 0.0);
  OptimizerConfig hc = cfg;
  hc.algorithm = Algorithm::Halp;
  const RunRecord href = run_halp(pobj, hc);
  CHECK(href.inner_fp_vector_ops > 0);
}

TEST_CASE("auxiliary-quantization bypass reproduces the generic run") {
  Dataset ds = make_regression(60, 6, 0.1, 12);
  quantize_dataset(ds, 8, 33);
  const Dataset hat = dequantized_copy(ds);
  const Objective qobj(std::move(ds), LossFamily::Squared, 0.0);
  const Objective hobj(hat, LossFamily::Squared, 0.0);

  OptimizerConfig cfg = base_config(Algorithm::LmHalp);
  cfg.mu = 3.0;
  cfg.bits = 8;
  cfg.alpha = 0.02;
  cfg.epochs = 4;
  cfg.lm_bypass_aux_quant = true;
  const RunRecord lm = run_lm_halp(qobj, cfg);

  OptimizerConfig hc = cfg;
  hc.algorithm = Algorithm::Halp;
  const RunRecord generic = run_halp(hobj, hc);

  REQUIRE(lm.rows.size() == generic.rows.size());
  for (std::size_t i = 0; i < lm.rows.size(); ++i) {
    REQUIRE(lm.rows[i].pass == generic.rows[i].pass);
    CHECK(rel_diff(lm.rows[i].loss, generic.rows[i].loss) <= 1e-6);
    CHECK(rel_diff(lm.rows[i].grad_norm, generic.rows[i].grad_norm) <= 1e-6);
  }
  CHECK((lm.final_iterate - generic.final_iterate).norm() <=
        1e-6 * std::max(1.0, generic.final_iterate.norm()));
}

TEST_CASE("widened companion configs") {
  OptimizerConfig base = base_config(Algorithm::Halp);
  base.mu = 3.0;
  base.bits = 8;

  const OptimizerConfig scaled = clipping_variant_config(base, ClipMode::Scale);
  CHECK(scaled.bits == 16);
  CHECK(scaled.mu == doctest::Approx(3.0 * 127.0 / 32767.0).epsilon(1e-15));
  CHECK(scaled.alpha == base.alpha);
  CHECK(scaled.epochs == base.epochs);
  CHECK(scaled.seed == base.seed);

  const OptimizerConfig clipped = clipping_variant_config(base, ClipMode::Clip);
  CHECK(clipped.bits == 16);
  CHECK(clipped.mu == 3.0);

  // per-step lattice spacing: Scale preserves it, Clip refines it
  const double g = 1.7;
  const double spacing8 = theory::halp_scale(g, base.mu, 8);
  CHECK(theory::halp_scale(g, scaled.mu, 16) ==
        doctest::Approx(spacing8).epsilon(1e-12));
  CHECK(theory::halp_scale(g, clipped.mu, 16) < 0.01 * spacing8);

  OptimizerConfig wide = base;
  wide.bits = 16;
  CHECK_THROWS_AS(clipping_variant_config(wide, ClipMode::Scale), InvalidInputError);
  OptimizerConfig notCentered = base_config(Algorithm::Svrg);
  CHECK_THROWS_AS(clipping_variant_config(notCentered, ClipMode::Clip),
                  InvalidInputError);
  CHECK(clip_mode_from_string("scale") == ClipMode::Scale);
  CHECK_THROWS_AS(clip_mode_from_string("truncate"), InvalidInputError);

  const Objective obj = small_regression();
  const RunRecord rec = run_clipping_variant(obj, base, ClipMode::Scale);
  CHECK(rec.rows.back().loss < rec.rows.front().loss);
}
