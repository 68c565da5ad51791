#pragma once

#include <any>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rtmw/ids.hpp"
#include "rtmw/time.hpp"

namespace rtmw {

class JobContext;
struct SelectionRequest;

enum class TaskKind { kPeriodic, kSporadic, kAperiodic, kGraphNode };

std::string_view to_string(TaskKind kind);
std::optional<TaskKind> parse_task_kind(std::string_view s);

// Bit set of execution modes or permissions.
using ModeMask = std::uint64_t;

// Abstract energy units, same scale as EnergySelect::energy_budget.
using BatteryProbe = std::function<double()>;

// Per-method selection properties attached to each version. Exactly one
// alternative is populated; all versions of a task use the same one.
struct EnergySelect {
  double energy_budget = 0.0;
  BatteryProbe get_battery_status;
};

struct EnergyTimeSelect {
  double energy_cost = 0.0;
  Nanos exec_time = 0;
};

struct ModeSelect {
  ModeMask mode_mask = 0;
};

struct BitmaskSelect {
  ModeMask permission_mask = 0;
};

using UserSelector = std::function<VersionId(const SelectionRequest&)>;

struct UserSelect {
  UserSelector selector;
};

using VSelect =
    std::variant<std::monostate, EnergySelect, EnergyTimeSelect, ModeSelect, BitmaskSelect, UserSelect>;

using JobBody = std::function<void(JobContext&)>;

struct TaskDescriptor {
  TaskId task_id;
  std::string name;
  TaskKind kind = TaskKind::kPeriodic;
  // Minimum inter-arrival for sporadic tasks; 0 when unset.
  Nanos period = 0;
  Nanos relative_deadline = 0;
  Nanos release_offset = 0;
  std::optional<std::uint32_t> virt_core_id;
  std::optional<std::int64_t> user_priority;
  std::vector<VersionId> versions;

  bool recurring() const { return period > 0 && kind != TaskKind::kAperiodic; }
};

struct VersionDescriptor {
  VersionId version_id;
  TaskId task_id;
  std::string name;
  JobBody entry;
  std::any static_args;
  Nanos wcet_estimate = 0;
  VSelect select_props;
  // Sorted, duplicate-free.
  std::vector<AccelId> accelerators;

  bool uses_accelerators() const { return !accelerators.empty(); }
};

struct AcceleratorDescriptor {
  AccelId accel_id;
  std::string name;
};

struct ChannelDescriptor {
  ChannelId channel_id;
  std::string name;
  std::size_t element_size = 0;
  // 0 declares a precedence-only edge carrying bare tokens.
  std::size_t capacity = 0;
  TaskId src_task;
  TaskId dst_task;
  // Tokens a synthetic producer body pushes per job.
  std::uint32_t produce = 1;
  // Tokens the consumer needs to be released (ActivationRule entry).
  std::uint32_t required_tokens = 1;

  bool connected() const { return src_task.valid(); }
  bool token_only() const { return capacity == 0; }
  // A token-only channel still holds one token at a time.
  std::size_t token_capacity() const { return capacity == 0 ? 1 : capacity; }
};

enum class VersionSelection;

// Index of the VSelect alternative a selection method expects
// (PRESELECTED accepts any and maps to std::monostate).
std::size_t vselect_index(VersionSelection method);

// Task names appear unquoted in trace CSV files.
bool valid_name(std::string_view name);

}  // namespace rtmw
