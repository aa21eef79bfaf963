#include "lpopt/instr.hpp"

namespace lpopt::instr {

Counters& counters() {
  thread_local Counters c;
  return c;
}

void reset() { counters() = Counters{}; }

}  // namespace lpopt::instr
