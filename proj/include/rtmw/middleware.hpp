#pragma once

#include <any>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rtmw/config.hpp"
#include "rtmw/realtime.hpp"
#include "rtmw/schedule_table.hpp"
#include "rtmw/task_set.hpp"
#include "rtmw/trace.hpp"
#include "rtmw/version_select.hpp"

namespace rtmw {

enum class Phase { kCreated, kInitialized, kRunning, kStopped, kCleaned };

std::string_view to_string(Phase phase);

struct VersionOptions {
  std::string name;
  Nanos wcet_estimate = 0;
};

struct ConnectOptions {
  std::uint32_t produce = 1;
  std::uint32_t required_tokens = 1;
};

class RealtimeEngine;

// Declaration-phase API and life cycle:
//   created -> init -> initialized -> start -> running <-> stopped -> cleanup
// The task set may only change while no schedule is running; a stopped
// schedule may be restarted with a modified task set.
class Middleware {
 public:
  Middleware();
  ~Middleware();
  Middleware(const Middleware&) = delete;
  Middleware& operator=(const Middleware&) = delete;

  // Validates the configuration and resets all registries.
  void init(const PolicyConfig& config);

  TaskId task_decl(TaskDescriptor data);
  VersionId version_decl(TaskId task, JobBody entry, std::any static_args, VSelect props,
                         VersionOptions options = {});
  AccelId hwaccel_decl(std::string name);
  void hwaccel_use(TaskId task, VersionId version, AccelId accel);

  ChannelId channel_decl(std::size_t element_size, std::size_t capacity, std::string name = {});
  void channel_connect(TaskId src, TaskId dst, ChannelId channel, ConnectOptions options = {});
  void set_required_tokens(TaskId task, ChannelId channel, std::uint32_t tokens);

  void set_schedule_table(ScheduleTable table);
  void set_selection_context(SelectionContext ctx);

  // Sporadic/aperiodic release request; callable from any thread while
  // running.
  void task_activate(TaskId task);

  // Runs start()-time validation and launches the real-time backend.
  void start(const RealtimeOptions& options = {});
  // Stops releases; jobs already in ready queues still execute.
  void stop();
  // Waits for workers to drain and joins them.
  void cleanup();

  // Blocks until the stopped schedule has drained, then returns its trace.
  Trace collect_trace();
  // Host degradations and runtime notices of the last schedule.
  std::vector<std::string> runtime_warnings() const;

  Phase phase() const { return phase_; }
  const PolicyConfig& config() const { return config_; }
  const TaskSet& task_set() const { return tasks_; }
  const SelectionContext& selection_context() const { return selection_; }
  const std::optional<ScheduleTable>& schedule_table() const { return table_; }

  // start()-time checks without starting.
  std::vector<Diagnostic> validate() const;
  // Throws ConfigError listing every error found by validate().
  void require_valid() const;

 private:
  void require_declaration_phase(const char* op);
  TaskDescriptor& task_mut(TaskId id);

  Phase phase_ = Phase::kCreated;
  PolicyConfig config_;
  TaskSet tasks_;
  SelectionContext selection_;
  std::optional<ScheduleTable> table_;
  std::unique_ptr<RealtimeEngine> engine_;
};

}  // namespace rtmw
