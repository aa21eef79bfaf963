#include "lpopt/fixed_point.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lpopt/instr.hpp"

namespace lpopt {

namespace {

std::int64_t min_code_for(int bits) {
  return bits == 64 ? std::numeric_limits<std::int64_t>::min()
                    : -(std::int64_t(1) << (bits - 1));
}

std::int64_t max_code_for(int bits) {
  return bits == 64 ? std::numeric_limits<std::int64_t>::max()
                    : (std::int64_t(1) << (bits - 1)) - 1;
}

std::int64_t sat_to_range(std::int64_t c, const LPRepr& r) {
  return std::clamp(c, r.min_code(), r.max_code());
}

// Core rounding rule.  `u` is a uniform draw on [0,1) supplied by the
// caller; it is consumed whether or not the randomized branch is taken.
std::int64_t quantize_code(double x, const LPRepr& r, double u) {
  if (!std::isfinite(x)) {
    throw InvalidInputError("quantize: input must be finite");
  }
  const double t = x / r.delta();
  // Bounds as doubles; for widths above 53 bits these are the rounded
  // images of the integer bounds, which is the best double inputs resolve.
  const double hi = static_cast<double>(r.max_code());
  const double lo = static_cast<double>(r.min_code());
  if (t >= hi) return r.max_code();
  if (t <= lo) return r.min_code();
  const double snapped = std::nearbyint(t);
  if (snapped * r.delta() == x) {
    return static_cast<std::int64_t>(snapped);
  }
  const double fl = std::floor(t);
  const double frac = t - fl;
  std::int64_t code = static_cast<std::int64_t>(fl);
  if (frac > 0.0 && u < frac) ++code;
  return code;
}

void require_same_shape(const LPVector& a, const LPVector& b, const char* what) {
  if (!(a.repr() == b.repr())) {
    throw ScaleMismatchError(std::string(what) + ": representations differ");
  }
  if (a.size() != b.size()) {
    throw ScaleMismatchError(std::string(what) + ": lengths differ");
  }
}

}  // namespace

LPRepr::LPRepr(double delta, int bits) : delta_(delta), bits_(bits) {
  if (!(std::isfinite(delta) && delta > 0.0)) {
    throw InvalidInputError("LPRepr: delta must be positive and finite");
  }
  if (bits < 2 || bits > 64) {
    throw InvalidInputError("LPRepr: bits must be in [2, 64]");
  }
}

std::int64_t LPRepr::min_code() const { return min_code_for(bits_); }
std::int64_t LPRepr::max_code() const { return max_code_for(bits_); }

double LPRepr::min_value() const {
  return delta_ * static_cast<double>(min_code());
}

double LPRepr::max_value() const {
  return delta_ * static_cast<double>(max_code());
}

LPVector::LPVector(std::vector<std::int64_t> codes, const LPRepr& repr)
    : codes_(std::move(codes)), repr_(repr) {
  if (repr_.bits() < 64) {
    const std::int64_t lo = repr_.min_code(), hi = repr_.max_code();
    for (std::int64_t c : codes_) {
      if (c < lo || c > hi) {
        throw InvalidInputError("LPVector: code outside representable range");
      }
    }
  }
}

LPVector LPVector::zeros(std::size_t n, const LPRepr& repr) {
  return LPVector(std::vector<std::int64_t>(n, 0), repr, unchecked_tag{});
}

LPScalar quantize_scalar(double x, const LPRepr& repr, QuantRng& rng) {
  const double u = rng.next_uniform();
  return LPScalar{quantize_code(x, repr, u), repr};
}

LPVector quantize_vector(std::span<const double> x, const LPRepr& repr, QuantRng& rng) {
  std::vector<std::int64_t> codes(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double u = rng.next_uniform();
    codes[i] = quantize_code(x[i], repr, u);
  }
  instr::count_fp();
  return LPVector(std::move(codes), repr, LPVector::unchecked_tag{});
}

void to_real(const LPVector& a, std::span<double> out) {
  if (out.size() != a.size()) {
    throw InvalidInputError("to_real: output length differs");
  }
  const double d = a.repr().delta();
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = static_cast<double>(a.code(i)) * d;
  }
  instr::count_fp();
}

std::vector<double> to_real(const LPVector& a) {
  std::vector<double> out(a.size());
  to_real(a, out);
  return out;
}

LPVector add_same_scale(const LPVector& a, const LPVector& b) {
  require_same_shape(a, b, "add_same_scale");
  const LPRepr& r = a.repr();
  std::vector<std::int64_t> codes(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::int64_t s;
    if (__builtin_add_overflow(a.code(i), b.code(i), &s)) {
      s = a.code(i) > 0 ? std::numeric_limits<std::int64_t>::max()
                        : std::numeric_limits<std::int64_t>::min();
    }
    codes[i] = sat_to_range(s, r);
  }
  instr::count_lp();
  return LPVector(std::move(codes), r, LPVector::unchecked_tag{});
}

LPVector sub_same_scale(const LPVector& a, const LPVector& b) {
  require_same_shape(a, b, "sub_same_scale");
  const LPRepr& r = a.repr();
  std::vector<std::int64_t> codes(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::int64_t s;
    if (__builtin_sub_overflow(a.code(i), b.code(i), &s)) {
      s = a.code(i) > b.code(i) ? std::numeric_limits<std::int64_t>::max()
                                : std::numeric_limits<std::int64_t>::min();
    }
    codes[i] = sat_to_range(s, r);
  }
  instr::count_lp();
  return LPVector(std::move(codes), r, LPVector::unchecked_tag{});
}

LPVector negate(const LPVector& a) {
  const LPRepr& r = a.repr();
  std::vector<std::int64_t> codes(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::int64_t c = a.code(i);
    codes[i] = (c == r.min_code() && r.bits() == 64)
                   ? r.max_code()
                   : sat_to_range(-c, r);
  }
  instr::count_lp();
  return LPVector(std::move(codes), r, LPVector::unchecked_tag{});
}

LPVector mul_scalar(const LPVector& a, const LPScalar& s) {
  const int out_bits = a.repr().bits() + s.repr.bits();
  if (out_bits > 64) {
    throw WidthOverflowError("mul_scalar: combined width exceeds 64 bits");
  }
  // |a| < 2^(ba-1), |s| <= 2^(bs-1), so |product| <= 2^(ba+bs-2) <= 2^62:
  // the multiply below cannot overflow int64.
  const LPRepr out(a.repr().delta() * s.repr.delta(), out_bits);
  std::vector<std::int64_t> codes(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    codes[i] = a.code(i) * s.code;
  }
  instr::count_lp();
  return LPVector(std::move(codes), out, LPVector::unchecked_tag{});
}

LPVector widen_shift(const LPVector& a, int extra_bits) {
  if (extra_bits < 0) {
    throw InvalidInputError("widen_shift: extra_bits must be nonnegative");
  }
  const int out_bits = a.repr().bits() + extra_bits;
  if (out_bits > 64) {
    throw WidthOverflowError("widen_shift: combined width exceeds 64 bits");
  }
  const LPRepr out(std::ldexp(a.repr().delta(), -extra_bits), out_bits);
  std::vector<std::int64_t> codes(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    codes[i] = a.code(i) * (std::int64_t(1) << extra_bits);
  }
  instr::count_lp();
  return LPVector(std::move(codes), out, LPVector::unchecked_tag{});
}

LPVector widen_range(const LPVector& a, int extra_bits) {
  if (extra_bits < 0) {
    throw InvalidInputError("widen_range: extra_bits must be nonnegative");
  }
  const int out_bits = a.repr().bits() + extra_bits;
  if (out_bits > 64) {
    throw WidthOverflowError("widen_range: combined width exceeds 64 bits");
  }
  const LPRepr out(a.repr().delta(), out_bits);
  std::vector<std::int64_t> codes(a.codes().begin(), a.codes().end());
  instr::count_lp();
  return LPVector(std::move(codes), out, LPVector::unchecked_tag{});
}

LPVector requantize_shift(const LPVector& a, int shift, int out_bits, QuantRng& rng) {
  if (shift < 0 || shift > 62) {
    throw InvalidInputError("requantize_shift: shift must be in [0, 62]");
  }
  const LPRepr out(std::ldexp(a.repr().delta(), shift), out_bits);
  std::vector<std::int64_t> codes(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double u = rng.next_uniform();
    const std::int64_t c = a.code(i);
    std::int64_t hi = c >> shift;  // arithmetic shift: floor division
    const std::int64_t low = c - (hi << shift);
    // low / 2^shift is an exact dyadic rational, so the round-up
    // probability matches the real-valued rule with no rounding error.
    if (low != 0 && u < std::ldexp(static_cast<double>(low), -shift)) {
      ++hi;
    }
    codes[i] = sat_to_range(hi, out);
  }
  instr::count_lp();
  return LPVector(std::move(codes), out, LPVector::unchecked_tag{});
}

double dot_lp(const LPVector& a, const LPVector& b) {
  if (a.size() != b.size()) {
    throw ScaleMismatchError("dot_lp: lengths differ");
  }
  using i128 = __int128;
  i128 acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    i128 prod;
    if (__builtin_mul_overflow(i128(a.code(i)), i128(b.code(i)), &prod) ||
        __builtin_add_overflow(acc, prod, &acc)) {
      throw WidthOverflowError("dot_lp: 128-bit accumulator overflow");
    }
  }
  instr::count_lp();
  return static_cast<double>(acc) * (a.repr().delta() * b.repr().delta());
}

}  // namespace lpopt
