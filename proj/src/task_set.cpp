#include "rtmw/task_set.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <set>

#include "rtmw/error.hpp"

namespace rtmw {
namespace {

constexpr std::array<std::pair<TaskKind, std::string_view>, 4> kKinds{{
    {TaskKind::kPeriodic, "periodic"},
    {TaskKind::kSporadic, "sporadic"},
    {TaskKind::kAperiodic, "aperiodic"},
    {TaskKind::kGraphNode, "graph_node"},
}};

}  // namespace

std::size_t vselect_index(VersionSelection method) {
  switch (method) {
    case VersionSelection::kEnergy:
      return 1;
    case VersionSelection::kEnergyTime:
      return 2;
    case VersionSelection::kMode:
      return 3;
    case VersionSelection::kBitmask:
      return 4;
    case VersionSelection::kUser:
      return 5;
    case VersionSelection::kPreselected:
      return 0;
  }
  return 0;
}

namespace {

Diagnostic error(std::string msg) { return {Diagnostic::Severity::kError, std::move(msg)}; }
Diagnostic warning(std::string msg) { return {Diagnostic::Severity::kWarning, std::move(msg)}; }

}  // namespace

std::string_view to_string(TaskKind kind) {
  for (const auto& [k, name] : kKinds) {
    if (k == kind) return name;
  }
  return "?";
}

std::optional<TaskKind> parse_task_kind(std::string_view s) {
  for (const auto& [k, name] : kKinds) {
    if (name == s) return k;
  }
  return std::nullopt;
}

bool valid_name(std::string_view name) {
  if (name.empty()) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-' || c == '.' || c == '#' ||
           c == ':';
  });
}

std::optional<TaskId> TaskSet::find_task(std::string_view name) const {
  for (const auto& t : tasks) {
    if (t.name == name) return t.task_id;
  }
  return std::nullopt;
}

std::optional<VersionId> TaskSet::find_version(TaskId task_id, std::string_view name) const {
  for (VersionId v : task(task_id).versions) {
    if (version(v).name == name) return v;
  }
  return std::nullopt;
}

std::optional<AccelId> TaskSet::find_accelerator(std::string_view name) const {
  for (const auto& a : accelerators) {
    if (a.name == name) return a.accel_id;
  }
  return std::nullopt;
}

std::optional<ChannelId> TaskSet::find_channel(std::string_view name) const {
  for (const auto& c : channels) {
    if (c.name == name) return c.channel_id;
  }
  return std::nullopt;
}

std::vector<ChannelId> TaskSet::inputs(TaskId t) const {
  std::vector<ChannelId> out;
  for (const auto& c : channels) {
    if (c.connected() && c.dst_task == t) out.push_back(c.channel_id);
  }
  return out;
}

std::vector<ChannelId> TaskSet::outputs(TaskId t) const {
  std::vector<ChannelId> out;
  for (const auto& c : channels) {
    if (c.connected() && c.src_task == t) out.push_back(c.channel_id);
  }
  return out;
}

bool TaskSet::data_activated(TaskId t) const {
  const auto& d = task(t);
  return d.kind == TaskKind::kGraphNode && d.period == 0 && !inputs(t).empty();
}

TaskId TaskSet::graph_root(TaskId t) const {
  if (!data_activated(t)) return t;
  // Breadth-first over predecessors; the lowest-id time-triggered ancestor
  // wins so the answer does not depend on channel declaration order.
  std::vector<bool> seen(tasks.size(), false);
  std::vector<TaskId> frontier{t};
  seen[t.index()] = true;
  std::optional<TaskId> best;
  while (!frontier.empty()) {
    std::vector<TaskId> next;
    for (TaskId cur : frontier) {
      for (ChannelId c : inputs(cur)) {
        TaskId src = channel(c).src_task;
        if (seen[src.index()]) continue;
        seen[src.index()] = true;
        if (data_activated(src)) {
          next.push_back(src);
        } else if (!best || src < *best) {
          best = src;
        }
      }
    }
    frontier = std::move(next);
  }
  return best.value_or(t);
}

Nanos TaskSet::effective_period(TaskId t) const { return task(graph_root(t)).period; }

Nanos TaskSet::effective_deadline(TaskId t) const { return task(graph_root(t)).relative_deadline; }

std::vector<TaskId> TaskSet::find_cycle() const {
  enum class Mark { kNone, kActive, kDone };
  std::vector<Mark> mark(tasks.size(), Mark::kNone);
  std::vector<TaskId> stack;
  std::vector<TaskId> cycle;
  std::function<bool(TaskId)> visit = [&](TaskId t) {
    mark[t.index()] = Mark::kActive;
    stack.push_back(t);
    for (ChannelId c : outputs(t)) {
      TaskId dst = channel(c).dst_task;
      if (mark[dst.index()] == Mark::kActive) {
        auto it = std::find(stack.begin(), stack.end(), dst);
        cycle.assign(it, stack.end());
        return true;
      }
      if (mark[dst.index()] == Mark::kNone && visit(dst)) return true;
    }
    stack.pop_back();
    mark[t.index()] = Mark::kDone;
    return false;
  };
  for (const auto& t : tasks) {
    if (mark[t.task_id.index()] == Mark::kNone && visit(t.task_id)) return cycle;
  }
  return {};
}

std::vector<Diagnostic> TaskSet::validate(const PolicyConfig& config) const {
  std::vector<Diagnostic> out;
  try {
    config.validate();
  } catch (const ConfigError& e) {
    out.push_back(error(e.what()));
    return out;
  }

  const bool pinned = config.mapping_scheme != MappingScheme::kGlobal;
  bool any_recurring = false;
  for (const auto& t : tasks) {
    const std::string who = "task '" + t.name + "'";
    if (t.versions.empty()) out.push_back(error(who + ": no versions declared"));
    if (t.relative_deadline <= 0) out.push_back(error(who + ": relative deadline must be positive"));
    const bool has_inputs = !inputs(t.task_id).empty();
    switch (t.kind) {
      case TaskKind::kPeriodic:
      case TaskKind::kSporadic:
        if (t.period <= 0) out.push_back(error(who + ": period must be positive for " + std::string(to_string(t.kind))));
        break;
      case TaskKind::kAperiodic:
        if (t.period != 0) out.push_back(error(who + ": aperiodic tasks take no period"));
        break;
      case TaskKind::kGraphNode:
        if (has_inputs && t.period != 0) {
          out.push_back(error(who + ": non-root graph node must not have a period"));
        } else if (!has_inputs && t.period <= 0) {
          out.push_back(warning(who + ": graph node without inputs or period never activates"));
        }
        break;
    }
    if (t.recurring()) any_recurring = true;
    if (pinned) {
      if (!t.virt_core_id) {
        out.push_back(error(who + ": virt_core_id is required under " + std::string(to_string(config.mapping_scheme))));
      } else if (*t.virt_core_id >= config.worker_count) {
        out.push_back(error(who + ": virt_core_id " + std::to_string(*t.virt_core_id) +
                            " >= worker_count " + std::to_string(config.worker_count)));
      }
    }
    if (config.priority_assignment == PriorityAssignment::kUser && config.online()) {
      if (!t.user_priority && !data_activated(t.task_id)) {
        out.push_back(error(who + ": user_priority is required under USER priority assignment"));
      }
    } else if (t.user_priority) {
      out.push_back(warning(who + ": user_priority ignored under " + std::string(to_string(config.priority_assignment))));
    }

    std::optional<std::size_t> first_kind;
    for (VersionId vid : t.versions) {
      const auto& v = version(vid);
      const std::string vwho = who + " version '" + v.name + "'";
      if (v.wcet_estimate <= 0) out.push_back(error(vwho + ": wcet_estimate must be positive"));
      if (config.version_selection != VersionSelection::kPreselected) {
        std::size_t want = vselect_index(config.version_selection);
        if (v.select_props.index() != want) {
          out.push_back(error(vwho + ": selection properties do not match " +
                              std::string(to_string(config.version_selection))));
        }
        if (config.version_selection == VersionSelection::kUser) {
          const auto* u = std::get_if<UserSelect>(&v.select_props);
          if (u && !u->selector) out.push_back(error(vwho + ": USER selection requires a selector"));
        }
      }
      if (!first_kind) {
        first_kind = v.select_props.index();
      } else if (*first_kind != v.select_props.index()) {
        out.push_back(error(who + ": versions carry different selection property kinds"));
      }
    }
  }

  for (const auto& c : channels) {
    const std::string who = "channel '" + c.name + "'";
    if (!c.connected()) {
      out.push_back(warning(who + ": declared but never connected"));
      continue;
    }
    if (c.required_tokens < 1) out.push_back(error(who + ": required tokens must be at least 1"));
    if (c.required_tokens > c.token_capacity()) {
      out.push_back(error(who + ": required tokens " + std::to_string(c.required_tokens) + " exceed capacity " +
                          std::to_string(c.token_capacity())));
    }
    if (c.produce > c.token_capacity()) {
      out.push_back(warning(who + ": producer pushes more tokens than the channel holds and may block"));
    }
  }

  auto cycle = find_cycle();
  if (!cycle.empty()) {
    std::string names;
    for (TaskId t : cycle) names += (names.empty() ? "" : " -> ") + task(t).name;
    out.push_back(error("task graph contains a cycle: " + names));
  }

  if (config.online() && !any_recurring && !tasks.empty()) {
    out.push_back(error("on-line mapping requires at least one recurring task to derive the scheduler tick"));
  }
  return out;
}

}  // namespace rtmw
