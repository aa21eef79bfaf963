#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "lpopt/errors.hpp"
#include "lpopt/fixed_point.hpp"
#include "lpopt/rng.hpp"

namespace lpopt {

enum class LossFamily { Squared, Softmax };

// Row-quantized copy of the feature matrix, shared-scale per dataset.
struct QuantizedExamples {
  LPRepr repr;                       // (data scale, bits)
  std::vector<LPVector> rows;
  std::uint64_t seed = 0;
};

struct Dataset {
  Eigen::MatrixXd X;                 // n x d feature matrix
  Eigen::VectorXd targets;           // regression targets (empty otherwise)
  std::vector<int> labels;           // class labels (empty otherwise)
  int num_classes = 0;               // 0 for regression
  std::optional<QuantizedExamples> quantized;

  long n() const { return X.rows(); }
  int dim() const { return static_cast<int>(X.cols()); }
  bool is_classification() const { return num_classes > 0; }
};

// Dense Gaussian design, y = X w + noise_sd * eps, w and eps standard normal.
Dataset make_regression(long n, int d, double noise_sd, std::uint64_t seed);

// Gaussian blobs: class centers drawn so the expected distance between two
// centers is about `separation`; every feature carries class signal.
// Labels are assigned round-robin, so counts differ by at most one.
Dataset make_classification(long n, int d, int num_classes, double separation,
                            std::uint64_t seed);

// Fixed-shape (1000 x 64) regression problem whose Hessian spectrum is
// log-spaced over exactly [1, kappa]; targets are noiseless.
Dataset make_conditioned_regression(double kappa, std::uint64_t seed);

// Shared scale for the whole matrix: max|X| / (2^(bits-1) - 1), so the
// largest entry lands on the top lattice point.  All-zero matrices get 1.
double data_scale(const Eigen::MatrixXd& X, int bits);

// Stochastically round every row of ds.X into a shared (data_scale, bits)
// representation, stored alongside the dataset.
void quantize_dataset(Dataset& ds, int bits, std::uint64_t seed);

// Finite-sum objective f(w) = (1/n) sum_i l_i(x_i^T w) + (l2/2) ||w||^2.
// Squared loss has one output channel; softmax has num_classes channels and
// a parameter vector that stacks the d x C weight matrix column-major.
class Objective {
 public:
  Objective(Dataset ds, LossFamily loss, double l2);

  long num_components() const { return ds_.n(); }
  int feature_dim() const { return ds_.dim(); }
  int num_outputs() const { return outputs_; }
  int dim() const { return ds_.dim() * outputs_; }
  LossFamily loss_family() const { return loss_; }
  double l2() const { return l2_; }
  const Dataset& dataset() const { return ds_; }

  double loss(const Eigen::VectorXd& w) const;
  Eigen::VectorXd component_gradient(long i, const Eigen::VectorXd& w) const;
  void component_gradient_into(long i, const Eigen::VectorXd& w,
                               Eigen::VectorXd& out) const;
  // Deterministic blocked reduction: the result is bitwise independent of
  // num_threads because per-block partials are combined in block order.
  Eigen::VectorXd full_gradient(const Eigen::VectorXd& w, int num_threads = 1) const;

  // Link interface for linear-model optimizers.  Logit vectors have length
  // num_outputs(); these touch only targets/labels, never the feature matrix.
  void link_values(long i, const Eigen::VectorXd& w, Eigen::VectorXd& logits) const;
  void link_derivative(long i, const Eigen::VectorXd& logits,
                       Eigen::VectorXd& dl) const;
  double link_loss(long i, const Eigen::VectorXd& logits) const;

 private:
  Dataset ds_;
  LossFamily loss_;
  double l2_;
  int outputs_;
};

// Exact least-squares minimizer (squared loss only) via normal equations.
Eigen::VectorXd least_squares_optimum(const Objective& obj);

// Curvature constants of a squared-loss objective: extreme eigenvalues of
// X^T X / n + l2 I and the largest per-component smoothness max_i ||x_i||^2 + l2.
struct SpectrumInfo {
  double hessian_max = 0.0;
  double hessian_min = 0.0;
  double component_max = 0.0;
};
SpectrumInfo quadratic_spectrum(const Objective& obj);

// Fraction of examples whose argmax logit matches the label.
double accuracy(const Objective& obj, const Eigen::VectorXd& w);

}  // namespace lpopt
