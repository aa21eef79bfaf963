#include "lpopt/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "lpopt/instr.hpp"

namespace lpopt {

namespace {

constexpr long kBlock = 1024;  // components per reduction block

using MapW = Eigen::Map<const Eigen::MatrixXd>;

void fill_gaussian_rowwise(Eigen::MatrixXd& m, QuantRng& rng) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rng.next_normal();
    }
  }
}

}  // namespace

Dataset make_regression(long n, int d, double noise_sd, std::uint64_t seed) {
  if (n < 1 || d < 1) {
    throw InvalidInputError("make_regression: n and d must be positive");
  }
  if (!(std::isfinite(noise_sd) && noise_sd >= 0.0)) {
    throw InvalidInputError("make_regression: noise_sd must be finite and >= 0");
  }
  QuantRng rng(seed);
  Dataset ds;
  ds.X.resize(n, d);
  fill_gaussian_rowwise(ds.X, rng);
  Eigen::VectorXd w_true(d);
  for (int j = 0; j < d; ++j) w_true[j] = rng.next_normal();
  ds.targets = ds.X * w_true;
  if (noise_sd > 0.0) {
    for (long i = 0; i < n; ++i) ds.targets[i] += noise_sd * rng.next_normal();
  }
  return ds;
}

Dataset make_classification(long n, int d, int num_classes, double separation,
                            std::uint64_t seed) {
  if (n < 1 || d < 1) {
    throw InvalidInputError("make_classification: n and d must be positive");
  }
  if (num_classes < 2) {
    throw InvalidInputError("make_classification: need at least two classes");
  }
  if (!(std::isfinite(separation) && separation >= 0.0)) {
    throw InvalidInputError("make_classification: separation must be finite and >= 0");
  }
  QuantRng rng(seed);
  // Center coordinates are N(0, sep^2 / (2d)); the difference of two centers
  // then has norm concentrating near `separation`.
  const double center_sd = separation / std::sqrt(2.0 * d);
  Eigen::MatrixXd centers(num_classes, d);
  fill_gaussian_rowwise(centers, rng);
  centers *= center_sd;
  Dataset ds;
  ds.X.resize(n, d);
  ds.labels.resize(n);
  ds.num_classes = num_classes;
  for (long i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % num_classes);
    ds.labels[i] = c;
    for (int j = 0; j < d; ++j) {
      ds.X(i, j) = centers(c, j) + rng.next_normal();
    }
  }
  return ds;
}

Dataset make_conditioned_regression(double kappa, std::uint64_t seed) {
  if (!(std::isfinite(kappa) && kappa >= 1.0)) {
    throw InvalidInputError("make_conditioned_regression: kappa must be >= 1");
  }
  constexpr long n = 1000;
  constexpr int d = 64;
  QuantRng rng(seed);
  Eigen::MatrixXd a(n, d), b(d, d);
  fill_gaussian_rowwise(a, rng);
  fill_gaussian_rowwise(b, rng);
  Eigen::MatrixXd u =
      Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ() *
      Eigen::MatrixXd::Identity(n, d);
  Eigen::MatrixXd v =
      Eigen::HouseholderQR<Eigen::MatrixXd>(b).householderQ() *
      Eigen::MatrixXd::Identity(d, d);
  // Hessian X^T X / n gets eigenvalues kappa^(j/(d-1)), hitting 1 and kappa
  // exactly at the ends.
  Eigen::VectorXd sigma(d);
  for (int j = 0; j < d; ++j) {
    const double eig = std::pow(kappa, static_cast<double>(j) / (d - 1));
    sigma[j] = std::sqrt(static_cast<double>(n) * eig);
  }
  Dataset ds;
  ds.X = u * sigma.asDiagonal() * v.transpose();
  Eigen::VectorXd w_true(d);
  for (int j = 0; j < d; ++j) w_true[j] = rng.next_normal();
  ds.targets = ds.X * w_true;
  return ds;
}

double data_scale(const Eigen::MatrixXd& X, int bits) {
  if (bits < 2 || bits > 64) {
    throw InvalidInputError("data_scale: bits must be in [2, 64]");
  }
  const double max_abs = X.size() == 0 ? 0.0 : X.cwiseAbs().maxCoeff();
  if (!std::isfinite(max_abs)) {
    throw InvalidInputError("data_scale: matrix has non-finite entries");
  }
  const double span = std::ldexp(1.0, bits - 1) - 1.0;
  return max_abs == 0.0 ? 1.0 : max_abs / span;
}

void quantize_dataset(Dataset& ds, int bits, std::uint64_t seed) {
  const LPRepr repr(data_scale(ds.X, bits), bits);
  QuantRng rng(seed, /*stream=*/2);
  QuantizedExamples q{repr, {}, seed};
  q.rows.reserve(static_cast<std::size_t>(ds.n()));
  std::vector<double> buf(static_cast<std::size_t>(ds.dim()));
  for (long i = 0; i < ds.n(); ++i) {
    for (int j = 0; j < ds.dim(); ++j) buf[static_cast<std::size_t>(j)] = ds.X(i, j);
    q.rows.push_back(quantize_vector(buf, repr, rng));
  }
  ds.quantized = std::move(q);
}

Objective::Objective(Dataset ds, LossFamily loss, double l2)
    : ds_(std::move(ds)), loss_(loss), l2_(l2) {
  if (!(std::isfinite(l2) && l2 >= 0.0)) {
    throw InvalidInputError("Objective: l2 must be finite and >= 0");
  }
  if (ds_.n() < 1) {
    throw InvalidInputError("Objective: dataset is empty");
  }
  if (loss_ == LossFamily::Squared) {
    if (ds_.targets.size() != ds_.n()) {
      throw InvalidInputError("Objective: squared loss needs one target per row");
    }
    outputs_ = 1;
  } else {
    if (ds_.num_classes < 2 ||
        ds_.labels.size() != static_cast<std::size_t>(ds_.n())) {
      throw InvalidInputError("Objective: softmax loss needs labels and classes");
    }
    for (int y : ds_.labels) {
      if (y < 0 || y >= ds_.num_classes) {
        throw InvalidInputError("Objective: label outside [0, num_classes)");
      }
    }
    outputs_ = ds_.num_classes;
  }
}

void Objective::link_values(long i, const Eigen::VectorXd& w,
                            Eigen::VectorXd& logits) const {
  MapW W(w.data(), feature_dim(), outputs_);
  logits.resize(outputs_);
  logits.noalias() = W.transpose() * ds_.X.row(i).transpose();
  instr::count_fp(static_cast<std::uint64_t>(outputs_));
}

void Objective::link_derivative(long i, const Eigen::VectorXd& logits,
                                Eigen::VectorXd& dl) const {
  dl.resize(outputs_);
  if (loss_ == LossFamily::Squared) {
    dl[0] = logits[0] - ds_.targets[i];
    return;
  }
  const double m = logits.maxCoeff();
  dl = (logits.array() - m).exp().matrix();
  dl /= dl.sum();
  dl[ds_.labels[static_cast<std::size_t>(i)]] -= 1.0;
}

double Objective::link_loss(long i, const Eigen::VectorXd& logits) const {
  if (loss_ == LossFamily::Squared) {
    const double r = logits[0] - ds_.targets[i];
    return 0.5 * r * r;
  }
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return lse - logits[ds_.labels[static_cast<std::size_t>(i)]];
}

double Objective::loss(const Eigen::VectorXd& w) const {
  if (w.size() != dim()) {
    throw InvalidInputError("loss: parameter length mismatch");
  }
  MapW W(w.data(), feature_dim(), outputs_);
  double acc = 0.0;
  const long n = ds_.n();
  // Fixed block split; per-block sums are added in block order so the
  // result never depends on how the work might be carved up.
  for (long r0 = 0; r0 < n; r0 += kBlock) {
    const long m = std::min(kBlock, n - r0);
    Eigen::MatrixXd logits = ds_.X.middleRows(r0, m) * W;
    double blk = 0.0;
    if (loss_ == LossFamily::Squared) {
      for (long r = 0; r < m; ++r) {
        const double e = logits(r, 0) - ds_.targets[r0 + r];
        blk += 0.5 * e * e;
      }
    } else {
      for (long r = 0; r < m; ++r) {
        const auto row = logits.row(r);
        const double mx = row.maxCoeff();
        const double lse = mx + std::log((row.array() - mx).exp().sum());
        blk += lse - row[ds_.labels[static_cast<std::size_t>(r0 + r)]];
      }
    }
    acc += blk;
  }
  instr::count_fp();
  return acc / static_cast<double>(n) + 0.5 * l2_ * w.squaredNorm();
}

void Objective::component_gradient_into(long i, const Eigen::VectorXd& w,
                                        Eigen::VectorXd& out) const {
  if (w.size() != dim()) {
    throw InvalidInputError("component_gradient: parameter length mismatch");
  }
  if (i < 0 || i >= ds_.n()) {
    throw InvalidInputError("component_gradient: index out of range");
  }
  const int d = feature_dim();
  out.resize(dim());
  MapW W(w.data(), d, outputs_);
  Eigen::Map<Eigen::MatrixXd> G(out.data(), d, outputs_);
  if (loss_ == LossFamily::Squared) {
    const double e = ds_.X.row(i).dot(W.col(0)) - ds_.targets[i];
    G.col(0).noalias() = e * ds_.X.row(i).transpose();
  } else {
    Eigen::VectorXd logits = W.transpose() * ds_.X.row(i).transpose();
    const double m = logits.maxCoeff();
    Eigen::VectorXd p = (logits.array() - m).exp().matrix();
    p /= p.sum();
    p[ds_.labels[static_cast<std::size_t>(i)]] -= 1.0;
    G.noalias() = ds_.X.row(i).transpose() * p.transpose();
  }
  out += l2_ * w;
  instr::count_fp(2);
}

Eigen::VectorXd Objective::component_gradient(long i, const Eigen::VectorXd& w) const {
  Eigen::VectorXd out;
  component_gradient_into(i, w, out);
  return out;
}

Eigen::VectorXd Objective::full_gradient(const Eigen::VectorXd& w,
                                         int num_threads) const {
  if (w.size() != dim()) {
    throw InvalidInputError("full_gradient: parameter length mismatch");
  }
  if (num_threads < 1) {
    throw InvalidInputError("full_gradient: num_threads must be >= 1");
  }
  MapW W(w.data(), feature_dim(), outputs_);
  const long n = ds_.n();
  const long nblk = (n + kBlock - 1) / kBlock;
  std::vector<Eigen::MatrixXd> partial(static_cast<std::size_t>(nblk));

  auto do_block = [&](long b) {
    const long r0 = b * kBlock;
    const long m = std::min(kBlock, n - r0);
    Eigen::MatrixXd dl = ds_.X.middleRows(r0, m) * W;  // logits, then in-place dl
    if (loss_ == LossFamily::Squared) {
      for (long r = 0; r < m; ++r) dl(r, 0) -= ds_.targets[r0 + r];
    } else {
      for (long r = 0; r < m; ++r) {
        const double mx = dl.row(r).maxCoeff();
        dl.row(r) = (dl.row(r).array() - mx).exp().matrix();
        dl.row(r) /= dl.row(r).sum();
        dl(r, ds_.labels[static_cast<std::size_t>(r0 + r)]) -= 1.0;
      }
    }
    partial[static_cast<std::size_t>(b)].noalias() =
        ds_.X.middleRows(r0, m).transpose() * dl;
  };

  if (num_threads == 1 || nblk == 1) {
    for (long b = 0; b < nblk; ++b) do_block(b);
  } else {
    const int workers = static_cast<int>(std::min<long>(num_threads, nblk));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        for (long b = t; b < nblk; b += workers) do_block(b);
      });
    }
    for (auto& th : pool) th.join();
  }

  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(feature_dim(), outputs_);
  for (long b = 0; b < nblk; ++b) sum += partial[static_cast<std::size_t>(b)];
  Eigen::VectorXd g(dim());
  Eigen::Map<Eigen::MatrixXd>(g.data(), feature_dim(), outputs_) =
      sum / static_cast<double>(n);
  g += l2_ * w;
  instr::count_fp();
  return g;
}

Eigen::VectorXd least_squares_optimum(const Objective& obj) {
  if (obj.loss_family() != LossFamily::Squared) {
    throw InvalidInputError("least_squares_optimum: squared loss only");
  }
  const Dataset& ds = obj.dataset();
  const double n = static_cast<double>(ds.n());
  Eigen::MatrixXd a = ds.X.transpose() * ds.X / n;
  a.diagonal().array() += obj.l2();
  const Eigen::VectorXd b = ds.X.transpose() * ds.targets / n;
  return a.ldlt().solve(b);
}

SpectrumInfo quadratic_spectrum(const Objective& obj) {
  if (obj.loss_family() != LossFamily::Squared) {
    throw InvalidInputError("quadratic_spectrum: squared loss only");
  }
  const Dataset& ds = obj.dataset();
  Eigen::MatrixXd a = ds.X.transpose() * ds.X / static_cast<double>(ds.n());
  a.diagonal().array() += obj.l2();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  SpectrumInfo info;
  info.hessian_min = es.eigenvalues().minCoeff();
  info.hessian_max = es.eigenvalues().maxCoeff();
  info.component_max = ds.X.rowwise().squaredNorm().maxCoeff() + obj.l2();
  return info;
}

double accuracy(const Objective& obj, const Eigen::VectorXd& w) {
  if (obj.loss_family() != LossFamily::Softmax) {
    throw InvalidInputError("accuracy: classification objectives only");
  }
  const Dataset& ds = obj.dataset();
  MapW W(w.data(), obj.feature_dim(), obj.num_outputs());
  long hits = 0;
  for (long i = 0; i < ds.n(); ++i) {
    Eigen::Index best;
    (ds.X.row(i) * W).maxCoeff(&best);
    if (static_cast<int>(best) == ds.labels[static_cast<std::size_t>(i)]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(ds.n());
}

}  // namespace lpopt
