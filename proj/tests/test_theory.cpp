#include <cmath>

#include "doctest.h"
#include "lpopt/theory.hpp"

using namespace lpopt;
namespace th = lpopt::theory;

// Numeric expectations below were recomputed independently with 200-bit
// arithmetic before being frozen here.

TEST_CASE("step size formula") {
  CHECK(th::step_size(0.5, 1.0) == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
  CHECK(th::step_size(0.5, 4.0) == doctest::Approx(1.0 / 48.0).epsilon(1e-15));
  // round trip: alpha * 4L(1+gamma) == gamma
  const double a = th::step_size(0.9, 7.0);
  CHECK(a * 4.0 * 7.0 * 1.9 == doctest::Approx(0.9).epsilon(1e-15));
  CHECK_THROWS_AS(th::step_size(0.0, 1.0), InvalidInputError);
  CHECK_THROWS_AS(th::step_size(1.0, 1.0), InvalidInputError);
  CHECK_THROWS_AS(th::step_size(0.5, 0.0), InvalidInputError);
}

TEST_CASE("epoch length for fixed-scale runs") {
  CHECK(th::epoch_length_lpsvrg(0.5, 1.0) == 48);
  CHECK(th::epoch_length_lpsvrg(0.5, 10.0) == 480);
  // monotone in kappa
  long prev = 0;
  for (double k : {1.0, 2.0, 5.0, 17.0, 300.0}) {
    const long t = th::epoch_length_lpsvrg(0.5, k);
    CHECK(t >= prev);
    prev = t;
  }
  CHECK_THROWS_AS(th::epoch_length_lpsvrg(1.0, 2.0), InvalidInputError);
  CHECK_THROWS_AS(th::epoch_length_lpsvrg(0.5, 0.5), InvalidInputError);
}

TEST_CASE("minimum bits for the bit-centered bound") {
  CHECK(th::min_bits_halp(0.5, 1.0, 1.0) == 4);
  CHECK(th::min_bits_halp(0.5, 32.0, 1.0) == 8);
  CHECK(th::min_bits_halp(0.5, 64.0, 1.0) == 9);
  CHECK(th::min_bits_halp(0.5, 4.0, 64.0) == 8);
  // doubling kappa adds about one bit
  for (double k : {2.0, 8.0, 128.0}) {
    const int diff = th::min_bits_halp(0.5, 2 * k, 16.0) - th::min_bits_halp(0.5, k, 16.0);
    CHECK(diff >= 0);
    CHECK(diff <= 2);
  }
}

TEST_CASE("epoch length for bit-centered runs") {
  CHECK(th::epoch_length_halp(0.5, 1.0, 1.0, 8) == 49);
  CHECK(th::epoch_length_halp(0.5, 4.0, 64.0, 8) == 807);
  CHECK(th::epoch_length_halp(0.5, 1.0, 1.0, 4) == 64);
  CHECK_THROWS_AS(th::epoch_length_halp(0.5, 1.0, 1.0, 3), InfeasiblePrecisionError);
  // wide-width limit recovers the fixed-scale length (away from integer
  // boundaries of the uncorrected ratio, where the ceil can differ by one)
  CHECK(th::epoch_length_halp(0.3, 1.0, 1.0, 64) == th::epoch_length_lpsvrg(0.3, 1.0));

  // feasibility agrees with min_bits_halp on both sides of the boundary
  for (double kappa : {1.0, 3.0, 10.0, 100.0}) {
    for (double dim : {1.0, 16.0, 1000.0}) {
      const int bmin = th::min_bits_halp(0.5, kappa, dim);
      CHECK_NOTHROW(th::epoch_length_halp(0.5, kappa, dim, bmin));
      if (bmin > 2) {
        CHECK_THROWS_AS(th::epoch_length_halp(0.5, kappa, dim, bmin - 1),
                        InfeasiblePrecisionError);
      }
    }
  }
}

TEST_CASE("accuracy floor") {
  CHECK(th::accuracy_floor(1.0, 1.0, 1.0, 0.5) == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(th::accuracy_floor(100.0, 0.7, 1.0, 0.5) == doctest::Approx(392.0).epsilon(1e-12));
  // quadratic scaling in delta
  const double f1 = th::accuracy_floor(17.0, 0.3, 2.5, 0.25);
  const double f2 = th::accuracy_floor(17.0, 0.6, 2.5, 0.25);
  CHECK(f2 == doctest::Approx(4.0 * f1).epsilon(1e-12));
  CHECK_THROWS_AS(th::accuracy_floor(1.0, 0.0, 1.0, 0.5), InvalidInputError);
  CHECK_THROWS_AS(th::accuracy_floor(1.0, 1.0, 1.0, 1.0), InvalidInputError);
}

TEST_CASE("bit-centered scale rule") {
  CHECK(th::halp_scale(1.0, 1.0, 8) == doctest::Approx(1.0 / 127.0).epsilon(1e-15));
  CHECK(th::halp_scale(0.0, 3.0, 8) == 0.0);
  // representable max recovers ||g||/mu exactly
  const double delta = th::halp_scale(2.5, 0.7, 8);
  CHECK(delta * 127.0 == doctest::Approx(2.5 / 0.7).epsilon(1e-15));
  CHECK_THROWS_AS(th::halp_scale(-1.0, 1.0, 8), InvalidInputError);
  CHECK_THROWS_AS(th::halp_scale(1.0, 0.0, 8), InvalidInputError);
  CHECK_THROWS_AS(th::halp_scale(1.0, 1.0, 65), InvalidInputError);
}
