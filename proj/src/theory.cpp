#include "lpopt/theory.hpp"

#include <cmath>

namespace lpopt::theory {

namespace {

void check_gamma_open(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw InvalidInputError("gamma must lie in (0, 1)");
  }
}

void check_kappa(double kappa) {
  if (!(std::isfinite(kappa) && kappa >= 1.0)) {
    throw InvalidInputError("kappa must be finite and >= 1");
  }
}

void check_dim(double dim) {
  if (!(std::isfinite(dim) && dim >= 1.0)) {
    throw InvalidInputError("dim must be finite and >= 1");
  }
}

void check_bits(int bits) {
  if (bits < 2 || bits > 64) {
    throw InvalidInputError("bits must be in [2, 64]");
  }
}

double code_span(int bits) {
  return std::ldexp(1.0, bits - 1) - 1.0;  // 2^(b-1) - 1
}

}  // namespace

double step_size(double gamma, double L) {
  check_gamma_open(gamma);
  if (!(std::isfinite(L) && L > 0.0)) {
    throw InvalidInputError("L must be positive and finite");
  }
  return gamma / (4.0 * L * (1.0 + gamma));
}

long epoch_length_lpsvrg(double gamma, double kappa) {
  check_gamma_open(gamma);
  check_kappa(kappa);
  return static_cast<long>(std::ceil(8.0 * kappa * (1.0 + gamma) / (gamma * gamma)));
}

int min_bits_halp(double gamma, double kappa, double dim) {
  check_gamma_open(gamma);
  check_kappa(kappa);
  check_dim(dim);
  const double bound =
      1.0 + std::log2(1.0 + std::sqrt(2.0 * kappa * kappa * dim * (1.0 + gamma) /
                                      (gamma * gamma)));
  const int bits = static_cast<int>(std::floor(bound)) + 1;
  if (bits > 64) {
    throw InfeasiblePrecisionError("no width up to 64 bits satisfies the bound");
  }
  return bits;
}

long epoch_length_halp(double gamma, double kappa, double dim, int bits) {
  check_gamma_open(gamma);
  check_kappa(kappa);
  check_dim(dim);
  check_bits(bits);
  const double span = code_span(bits);
  const double denom =
      gamma * gamma - 2.0 * kappa * kappa * dim * (1.0 + gamma) / (span * span);
  if (!(denom > 0.0)) {
    throw InfeasiblePrecisionError("bit width too small for this gamma, kappa, dim");
  }
  return static_cast<long>(std::ceil(8.0 * kappa * (1.0 + gamma) / denom));
}

double accuracy_floor(double dim, double delta, double L, double gamma) {
  check_gamma_open(gamma);
  check_dim(dim);
  if (!(std::isfinite(delta) && delta > 0.0)) {
    throw InvalidInputError("delta must be positive and finite");
  }
  if (!(std::isfinite(L) && L > 0.0)) {
    throw InvalidInputError("L must be positive and finite");
  }
  return 2.0 * dim * delta * delta * L / (gamma * (1.0 - gamma));
}

double halp_scale(double grad_norm, double mu, int bits) {
  if (!(std::isfinite(grad_norm) && grad_norm >= 0.0)) {
    throw InvalidInputError("grad_norm must be finite and nonnegative");
  }
  if (!(std::isfinite(mu) && mu > 0.0)) {
    throw InvalidInputError("mu must be positive and finite");
  }
  check_bits(bits);
  return grad_norm / (mu * code_span(bits));
}

}  // namespace lpopt::theory
