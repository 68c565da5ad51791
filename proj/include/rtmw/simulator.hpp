#pragma once

#include <cstdint>
#include <optional>

#include "rtmw/schedule_table.hpp"
#include "rtmw/sim_model.hpp"
#include "rtmw/trace.hpp"

namespace rtmw {

class Middleware;

struct SimOptions {
  // Releases stop at the horizon; jobs already released are drained. Default:
  // one hyperperiod (on-line) or one table period (off-line).
  std::optional<Nanos> horizon;
  std::uint64_t seed = 0;
};

struct SimResult {
  Trace trace;
  RunReport report;
};

// Discrete-event execution of the on-line scheduler or the off-line
// dispatcher under virtual time. A pure function of its arguments: identical
// inputs give an identical trace. Throws ConfigError when the model fails
// start() validation or no default horizon exists.
SimResult run_simulation(const Middleware& middleware, const SimJobModel& model, const SimOptions& options);

}  // namespace rtmw
