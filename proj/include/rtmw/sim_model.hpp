#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rtmw/ids.hpp"
#include "rtmw/task_model.hpp"
#include "rtmw/time.hpp"

namespace rtmw {

// Channel operation inside a simulated job body, at an offset from the start
// of the body.
struct SimChannelOp {
  enum class Kind { kPush, kPop };
  Kind kind = Kind::kPush;
  ChannelId channel;
  Nanos at = 0;
  std::uint32_t count = 1;
};

// Execution behaviour of one version. Without overrides the body lasts
// wcet_estimate, pops its required input tokens at offset 0 and pushes its
// production at the end.
struct VersionSimModel {
  std::optional<Nanos> exec;
  // Uniform in [min, max] drawn from the run seed.
  std::optional<std::pair<Nanos, Nanos>> exec_range;
  std::optional<std::vector<SimChannelOp>> channel_ops;
};

struct SimActivation {
  TaskId task;
  Nanos at = 0;
};

struct SimModeChange {
  Nanos at = 0;
  std::optional<ModeMask> execution_mode;
  std::optional<ModeMask> permission_mask;
};

// Synthetic costs charged by the simulator. All zero realises the ideal
// schedule.
struct SimJobModel {
  Nanos get_task_cost = 0;
  Nanos sched_scan_cost_per_task = 0;
  Nanos sort_cost_per_element = 0;
  Nanos context_switch_cost = 0;

  // Indexed by VersionId; missing entries use the defaults.
  std::vector<VersionSimModel> versions;
  std::vector<SimActivation> activations;
  std::vector<SimModeChange> mode_changes;

  const VersionSimModel* version(VersionId id) const {
    return id.index() < versions.size() ? &versions[id.index()] : nullptr;
  }
  VersionSimModel& version_mut(VersionId id) {
    if (id.index() >= versions.size()) versions.resize(id.index() + 1);
    return versions[id.index()];
  }
};

}  // namespace rtmw
