#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rtmw/time.hpp"
#include "rtmw/trace.hpp"

namespace rtmw {

class Middleware;

struct RealtimeOptions {
  // Pin each context to its own processor (warning when the host refuses).
  bool pin_threads = true;
  // mlockall (warning when the host refuses).
  bool lock_memory = true;
  // SCHED_FIFO for scheduler and workers (warning when the host refuses).
  bool realtime_priority = true;
  // Fewer processors than contexts is a ConfigError unless this is set.
  bool allow_oversubscription = false;
  // Arrivals at or after this instant are not released.
  std::optional<Nanos> release_horizon;
};

// Processors usable by this process and shielding checks.
struct HostProbe {
  std::vector<int> cpus;
  std::vector<std::string> warnings;
};

HostProbe probe_host();

// Processors needed by a configuration: workers, plus one for the scheduler
// context under on-line mapping.
unsigned required_processors(unsigned worker_count, bool online);

struct RealtimeResult {
  Trace trace;
  RunReport report;
};

// start(); run for `duration`; stop(); drain; cleanup(). Leaves the
// middleware cleaned.
RealtimeResult run_realtime(Middleware& middleware, Nanos duration, RealtimeOptions options = {});

}  // namespace rtmw
