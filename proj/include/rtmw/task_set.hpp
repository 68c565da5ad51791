#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rtmw/config.hpp"
#include "rtmw/task_model.hpp"

namespace rtmw {

// Non-fatal finding from model validation.
struct Diagnostic {
  enum class Severity { kWarning, kError };
  Severity severity = Severity::kError;
  std::string message;

  bool error() const { return severity == Severity::kError; }
};

// Registries of everything declared on a middleware instance. Indices equal
// ids, so lookups are direct.
struct TaskSet {
  std::vector<TaskDescriptor> tasks;
  std::vector<VersionDescriptor> versions;
  std::vector<AcceleratorDescriptor> accelerators;
  std::vector<ChannelDescriptor> channels;

  const TaskDescriptor& task(TaskId id) const { return tasks.at(id.index()); }
  const VersionDescriptor& version(VersionId id) const { return versions.at(id.index()); }
  const ChannelDescriptor& channel(ChannelId id) const { return channels.at(id.index()); }

  std::optional<TaskId> find_task(std::string_view name) const;
  std::optional<VersionId> find_version(TaskId task, std::string_view name) const;
  std::optional<AccelId> find_accelerator(std::string_view name) const;
  std::optional<ChannelId> find_channel(std::string_view name) const;

  std::vector<ChannelId> inputs(TaskId task) const;
  std::vector<ChannelId> outputs(TaskId task) const;

  // A task whose jobs are released by data arrival rather than by time.
  bool data_activated(TaskId task) const;

  // For data-activated tasks, the lowest-id time-triggered ancestor whose
  // period and deadline the graph inherits. Other tasks map to themselves.
  TaskId graph_root(TaskId task) const;

  // Period used for RM keys and the scheduler tick (root's for graph nodes).
  Nanos effective_period(TaskId task) const;
  Nanos effective_deadline(TaskId task) const;

  // Tasks in a directed cycle through connected channels, empty if acyclic.
  std::vector<TaskId> find_cycle() const;

  // Full start()-time checks against a configuration.
  std::vector<Diagnostic> validate(const PolicyConfig& config) const;
};

}  // namespace rtmw
