#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lpopt/errors.hpp"
#include "lpopt/rng.hpp"

namespace lpopt {

// A fixed-point representation: step size delta > 0 and a signed integer
// width of `bits` binary digits.  Representable values are
//   { delta * c : min_code() <= c <= max_code() },
// a two's-complement style range with one more value below zero than above.
class LPRepr {
 public:
  LPRepr(double delta, int bits);

  double delta() const { return delta_; }
  int bits() const { return bits_; }
  std::int64_t min_code() const;
  std::int64_t max_code() const;
  double min_value() const;
  double max_value() const;

  friend bool operator==(const LPRepr& a, const LPRepr& b) {
    return a.delta_ == b.delta_ && a.bits_ == b.bits_;
  }

 private:
  double delta_;
  int bits_;
};

struct LPScalar {
  std::int64_t code;
  LPRepr repr;

  double value() const { return static_cast<double>(code) * repr.delta(); }
};

// Dense vector of integer codes sharing one representation.
class LPVector {
 public:
  LPVector(std::vector<std::int64_t> codes, const LPRepr& repr);
  static LPVector zeros(std::size_t n, const LPRepr& repr);

  std::size_t size() const { return codes_.size(); }
  const LPRepr& repr() const { return repr_; }
  std::span<const std::int64_t> codes() const { return codes_; }
  std::int64_t code(std::size_t i) const { return codes_[i]; }
  double value(std::size_t i) const {
    return static_cast<double>(codes_[i]) * repr_.delta();
  }

 private:
  struct unchecked_tag {};
  LPVector(std::vector<std::int64_t> codes, const LPRepr& repr, unchecked_tag)
      : codes_(std::move(codes)), repr_(repr) {}

  std::vector<std::int64_t> codes_;
  LPRepr repr_;

  friend LPVector quantize_vector(std::span<const double>, const LPRepr&, QuantRng&);
  friend LPVector add_same_scale(const LPVector&, const LPVector&);
  friend LPVector sub_same_scale(const LPVector&, const LPVector&);
  friend LPVector negate(const LPVector&);
  friend LPVector mul_scalar(const LPVector&, const LPScalar&);
  friend LPVector widen_shift(const LPVector&, int);
  friend LPVector widen_range(const LPVector&, int);
  friend LPVector requantize_shift(const LPVector&, int, int, QuantRng&);
};

// Unbiased stochastic rounding of x onto the lattice of `repr`.
// Inside the representable range, E[result] == x exactly; values already on
// the lattice round deterministically.  Outside the range the nearest
// endpoint is returned deterministically.  Consumes exactly one uniform
// draw per call regardless of branch, so stream positions stay aligned.
LPScalar quantize_scalar(double x, const LPRepr& repr, QuantRng& rng);

// Componentwise quantize_scalar with independent randomness per entry.
LPVector quantize_vector(std::span<const double> x, const LPRepr& repr, QuantRng& rng);

void to_real(const LPVector& a, std::span<double> out);
std::vector<double> to_real(const LPVector& a);

// Exact same-representation arithmetic with saturation at the range ends.
LPVector add_same_scale(const LPVector& a, const LPVector& b);
LPVector sub_same_scale(const LPVector& a, const LPVector& b);
LPVector negate(const LPVector& a);

// Exact product against a fixed-point scalar.  Result representation is
// (delta_a * delta_s, bits_a + bits_s); requires bits_a + bits_s <= 64.
LPVector mul_scalar(const LPVector& a, const LPScalar& s);

// Value-preserving widening: delta / 2^extra_bits, codes shifted left.
// The represented real values are unchanged; requires bits + extra <= 64.
LPVector widen_shift(const LPVector& a, int extra_bits);

// Headroom widening: identical delta and codes, extra range bits only.
LPVector widen_range(const LPVector& a, int extra_bits);

// Stochastic re-rounding onto a coarser dyadic lattice: result has
// representation (delta * 2^shift, out_bits).  The dropped low `shift`
// bits of each code drive the rounding probability exactly, so this is
// the integer-only equivalent of quantize_vector(to_real(a)) onto that
// lattice.  Saturates deterministically; one uniform per entry.
LPVector requantize_shift(const LPVector& a, int shift, int out_bits, QuantRng& rng);

// Dot product accumulated in 128-bit integers; the result is
// sum_i code_a[i]*code_b[i] * delta_a * delta_b as a double.
// Representations may differ; lengths must match.
double dot_lp(const LPVector& a, const LPVector& b);

}  // namespace lpopt
