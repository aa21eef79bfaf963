#pragma once

#include <cstdint>

namespace lpopt::instr {

// Operation counters for auditing which arithmetic an inner loop touched.
// A "vector op" is one pass over a length-d (or d*C) array; scalar work and
// per-class C-length arithmetic are not counted.
struct Counters {
  std::uint64_t fp_vector_ops = 0;  // full-precision float array traversals
  std::uint64_t lp_vector_ops = 0;  // integer-code array traversals
};

Counters& counters();
void reset();

inline void count_fp(std::uint64_t n = 1) { counters().fp_vector_ops += n; }
inline void count_lp(std::uint64_t n = 1) { counters().lp_vector_ops += n; }

}  // namespace lpopt::instr
