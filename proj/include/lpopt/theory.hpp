#pragma once

#include "lpopt/errors.hpp"

namespace lpopt::theory {

// Closed-form tuning rules for the variance-reduced optimizers.  All take
// the contraction target gamma in (0,1), the condition number kappa =
// L/mu >= 1, and (where precision enters) the parameter dimension d.

// Step size alpha = gamma / (4 L (1 + gamma)).
double step_size(double gamma, double L);

// Smallest epoch length T with 8 kappa (1+gamma) / (gamma^2) <= T.
long epoch_length_lpsvrg(double gamma, double kappa);

// Smallest bit width b making the bit-centered epoch bound finite:
// b > 1 + log2(1 + sqrt(2 kappa^2 d (1+gamma) / gamma^2)).
int min_bits_halp(double gamma, double kappa, double dim);

// Smallest epoch length T with
// 8 kappa (1+gamma) / (gamma^2 - 2 kappa^2 d (1+gamma) (2^(b-1)-1)^-2) <= T.
// Throws InfeasiblePrecisionError when the denominator is not positive.
long epoch_length_halp(double gamma, double kappa, double dim, int bits);

// Suboptimality plateau of a fixed-scale variance-reduced run:
// 2 d delta^2 L / (gamma (1 - gamma)).
double accuracy_floor(double dim, double delta, double L, double gamma);

// Per-epoch scale of a bit-centered run: ||g|| / (mu (2^(b-1) - 1)).
double halp_scale(double grad_norm, double mu, int bits);

}  // namespace lpopt::theory
