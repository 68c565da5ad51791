#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rtmw/config.hpp"
#include "rtmw/middleware.hpp"
#include "rtmw/sdf.hpp"
#include "rtmw/sim_model.hpp"
#include "rtmw/task_model.hpp"

namespace rtmw {

// File-driven description of a task set. Durations are nanoseconds; on disk
// they may be integers or strings such as "4ms". Names stand in for ids.

struct SimOpDoc {
  SimChannelOp::Kind kind = SimChannelOp::Kind::kPush;
  std::string channel;
  Nanos at = 0;
  std::uint32_t count = 1;

  friend bool operator==(const SimOpDoc&, const SimOpDoc&) = default;
};

struct VersionSimDoc {
  std::optional<Nanos> exec;
  std::optional<std::pair<Nanos, Nanos>> exec_range;
  std::optional<std::vector<SimOpDoc>> ops;

  bool empty() const { return !exec && !exec_range && !ops; }
  friend bool operator==(const VersionSimDoc&, const VersionSimDoc&) = default;
};

struct VersionDoc {
  std::string name;
  Nanos wcet = 0;
  // Selection properties; the configured method picks the one it needs.
  std::optional<double> energy_budget;
  std::optional<double> energy_cost;
  std::optional<Nanos> exec_time;
  std::optional<ModeMask> mode_mask;
  std::optional<ModeMask> permission_mask;
  // File-mode USER selector: lowest rank among the candidates wins.
  std::optional<std::int64_t> user_rank;
  std::vector<std::string> accelerators;
  VersionSimDoc sim;

  friend bool operator==(const VersionDoc&, const VersionDoc&) = default;
};

struct TaskDoc {
  std::string name;
  TaskKind kind = TaskKind::kPeriodic;
  Nanos period = 0;
  // Defaults to the period when omitted.
  Nanos deadline = 0;
  Nanos offset = 0;
  std::optional<std::uint32_t> virt_core_id;
  std::optional<std::int64_t> user_priority;
  std::vector<VersionDoc> versions;

  friend bool operator==(const TaskDoc&, const TaskDoc&) = default;
};

struct ChannelDoc {
  std::string name;
  std::size_t element_size = 0;
  std::size_t capacity = 0;

  friend bool operator==(const ChannelDoc&, const ChannelDoc&) = default;
};

struct ConnectionDoc {
  std::string channel;
  std::string src;
  std::string dst;
  std::uint32_t produce = 1;
  std::uint32_t required_tokens = 1;

  friend bool operator==(const ConnectionDoc&, const ConnectionDoc&) = default;
};

struct SdfDoc {
  SdfGraph graph;
  // Independent copies of the graph, copy k on virtual core k % workers.
  std::uint32_t instances = 1;

  friend bool operator==(const SdfDoc& a, const SdfDoc& b);
};

struct TableEntryDoc {
  std::string task;
  std::string version;
  Nanos offset = 0;

  friend bool operator==(const TableEntryDoc&, const TableEntryDoc&) = default;
};

struct TableDoc {
  Nanos period = 0;
  std::vector<std::vector<TableEntryDoc>> rows;

  friend bool operator==(const TableDoc&, const TableDoc&) = default;
};

struct SelectionDoc {
  ModeMask execution_mode = 0;
  ModeMask permission_mask = 0;
  // Constant battery level; unlimited when absent.
  std::optional<double> battery;
  double alpha = 0.5;

  friend bool operator==(const SelectionDoc&, const SelectionDoc&) = default;
};

struct ActivationDoc {
  std::string task;
  Nanos at = 0;

  friend bool operator==(const ActivationDoc&, const ActivationDoc&) = default;
};

struct ModeChangeDoc {
  Nanos at = 0;
  std::optional<ModeMask> execution_mode;
  std::optional<ModeMask> permission_mask;

  friend bool operator==(const ModeChangeDoc&, const ModeChangeDoc&) = default;
};

struct SimModelDoc {
  Nanos get_task_cost = 0;
  Nanos sched_scan_cost_per_task = 0;
  Nanos sort_cost_per_element = 0;
  Nanos context_switch_cost = 0;
  std::vector<ActivationDoc> activations;
  std::vector<ModeChangeDoc> mode_changes;

  friend bool operator==(const SimModelDoc&, const SimModelDoc&) = default;
};

struct TaskSetDocument {
  PolicyConfig config;
  SelectionDoc selection;
  std::vector<std::string> accelerators;
  std::vector<TaskDoc> tasks;
  std::vector<ChannelDoc> channels;
  std::vector<ConnectionDoc> connections;
  std::optional<SdfDoc> sdf;
  std::optional<TableDoc> table;
  SimModelDoc sim_model;

  friend bool operator==(const TaskSetDocument&, const TaskSetDocument&) = default;
};

// Throws DocumentError with a JSON-path style location.
TaskSetDocument parse_document(std::string_view json_text);
TaskSetDocument load_document(const std::string& path);
std::string serialize_document(const TaskSetDocument& doc);

// Which versions survive: all, those without accelerators, or those with
// one. Tasks left with no version under a restriction keep all of theirs.
enum class VersionMode { kBoth, kCpu, kGpu };

std::string_view to_string(VersionMode mode);
std::optional<VersionMode> parse_version_mode(std::string_view s);

// Task set obtained by expanding the sdf section; the document's own tasks,
// channels and connections are kept ahead of the expansion.
TaskSetDocument expand_document_sdf(const TaskSetDocument& doc);

struct BuiltModel {
  std::unique_ptr<Middleware> middleware;
  SimJobModel sim_model;
  std::vector<Diagnostic> diagnostics;
};

// Declares everything on a fresh middleware (phase initialized). Synthetic
// bodies pop the required input tokens, busy-wait the version's execution
// time and push their production. Reference errors throw DocumentError;
// model errors are left to validate().
BuiltModel build_model(const TaskSetDocument& doc, VersionMode mode = VersionMode::kBoth);

}  // namespace rtmw
