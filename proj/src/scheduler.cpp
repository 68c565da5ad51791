#include "rtmw/scheduler.hpp"

#include <algorithm>
#include <numeric>

#include "rtmw/error.hpp"

namespace rtmw {
namespace {

bool time_triggered(const TaskDescriptor& t) {
  return t.period > 0 && (t.kind == TaskKind::kPeriodic || t.kind == TaskKind::kGraphNode);
}

}  // namespace

Nanos scheduler_tick_period(const TaskSet& tasks) {
  Nanos tick = 0;
  for (const auto& t : tasks.tasks) {
    if (t.recurring()) tick = gcd_ns(tick, t.period);
  }
  if (tick == 0) throw ConfigError("no recurring task: the scheduler tick is undefined");
  return tick;
}

std::optional<Nanos> hyperperiod(const TaskSet& tasks) {
  Nanos h = 0;
  for (const auto& t : tasks.tasks) {
    if (!t.recurring()) continue;
    if (h == 0) {
      h = t.period;
    } else if (!lcm_ns(h, t.period, h)) {
      return std::nullopt;
    }
  }
  if (h == 0) return std::nullopt;
  return h;
}

std::size_t route(const PolicyConfig& config, const TaskSet& tasks, TaskId task) {
  if (config.mapping_scheme == MappingScheme::kGlobal) return 0;
  const auto& core = tasks.task(task).virt_core_id;
  if (!core) throw ConfigError("task '" + tasks.task(task).name + "' has no virt_core_id");
  return *core;
}

std::size_t queue_count(const PolicyConfig& config) {
  return config.mapping_scheme == MappingScheme::kGlobal ? 1 : config.worker_count;
}

ReleaseTracker::ReleaseTracker(const TaskSet& tasks, const PolicyConfig&) : tasks_(tasks), state_(tasks.tasks.size()) {
  for (const auto& t : tasks.tasks) state_[t.task_id.index()].next_arrival = t.release_offset;
}

Nanos ReleaseTracker::activate(TaskId task, Nanos now) {
  const auto& t = tasks_.task(task);
  TaskState& st = state_.at(task.index());
  switch (t.kind) {
    case TaskKind::kSporadic: {
      Nanos at = now;
      std::optional<Nanos> last = st.pending.empty() ? st.last_release : std::optional<Nanos>(st.pending.back());
      if (last) at = std::max(at, *last + t.period);
      st.pending.push_back(at);
      return at;
    }
    case TaskKind::kAperiodic:
      st.pending.push_back(now);
      return now;
    default:
      throw UsageError("task '" + t.name + "' is " + std::string(to_string(t.kind)) +
                       "; only sporadic and aperiodic tasks can be activated");
  }
}

Release ReleaseTracker::make_release(TaskId task, Nanos abs_release) {
  TaskState& st = state_[task.index()];
  Release r;
  r.task = task;
  r.seq = st.seq++;
  r.abs_release = abs_release;
  st.last_release = abs_release;
  if (tasks_.data_activated(task)) {
    // Node jobs inherit the deadline of their graph iteration.
    TaskId root = tasks_.graph_root(task);
    const auto& iters = state_[root.index()].iteration_releases;
    Nanos iteration = iters.empty() ? abs_release : iters[std::min<std::size_t>(r.seq, iters.size() - 1)];
    r.abs_deadline = iteration + tasks_.task(root).relative_deadline;
  } else {
    r.abs_deadline = abs_release + tasks_.task(task).relative_deadline;
    st.iteration_releases.push_back(abs_release);
  }
  return r;
}

std::vector<Release> ReleaseTracker::collect_time_releases(Nanos now, std::optional<Nanos> horizon) {
  std::vector<Release> out;
  auto before_horizon = [&](Nanos at) { return !horizon || at < *horizon; };
  for (const auto& t : tasks_.tasks) {
    TaskState& st = state_[t.task_id.index()];
    if (time_triggered(t)) {
      while (st.next_arrival <= now && before_horizon(st.next_arrival)) {
        out.push_back(make_release(t.task_id, st.next_arrival));
        st.next_arrival += t.period;
      }
    }
    while (!st.pending.empty() && st.pending.front() <= now) {
      Nanos at = st.pending.front();
      st.pending.pop_front();
      if (before_horizon(at)) out.push_back(make_release(t.task_id, at));
    }
  }
  return out;
}

std::vector<Release> ReleaseTracker::collect_graph_releases(
    Nanos now, const TokenAvailability& available, const std::function<void(ChannelId, std::size_t)>& reserve) {
  std::vector<Release> out;
  for (const auto& t : tasks_.tasks) {
    if (!tasks_.data_activated(t.task_id)) continue;
    const auto inputs = tasks_.inputs(t.task_id);
    while (check_activation(tasks_, t.task_id, available)) {
      for (ChannelId c : inputs) reserve(c, tasks_.channel(c).required_tokens);
      out.push_back(make_release(t.task_id, now));
    }
  }
  return out;
}

std::optional<Nanos> ReleaseTracker::next_arrival() const {
  std::optional<Nanos> best;
  auto consider = [&](Nanos at) {
    if (!best || at < *best) best = at;
  };
  for (const auto& t : tasks_.tasks) {
    const TaskState& st = state_[t.task_id.index()];
    if (time_triggered(t)) consider(st.next_arrival);
    if (!st.pending.empty()) consider(st.pending.front());
  }
  return best;
}

bool ReleaseTracker::has_pending_activations() const {
  return std::any_of(state_.begin(), state_.end(), [](const TaskState& st) { return !st.pending.empty(); });
}

Job make_job(const Release& release, const PolicyConfig& config, const TaskSet& tasks,
             const SelectionContext& selection, const AcceleratorRegistry* registry) {
  Job job;
  job.task = release.task;
  job.seq = release.seq;
  job.abs_release = release.abs_release;
  job.abs_deadline = release.abs_deadline;
  job.key = assign_priority(config, tasks, job);
  job.version = choose_version(tasks, release.task, selection, config.version_selection, registry);
  return job;
}

std::vector<WorkerIndex> preemption_targets(const PolicyConfig& config, std::span<const ReadyQueue> queues,
                                            std::span<const std::optional<PriorityKey>> running) {
  std::vector<WorkerIndex> out;
  if (!config.preemptive || !config.online()) return out;
  if (config.mapping_scheme == MappingScheme::kPartitioned) {
    for (std::size_t w = 0; w < running.size() && w < queues.size(); ++w) {
      const Job* head = queues[w].head();
      if (head && running[w] && head->effective_key().higher_than(*running[w])) {
        out.push_back(static_cast<WorkerIndex>(w));
      }
    }
    std::sort(out.begin(), out.end(), [&](WorkerIndex a, WorkerIndex b) { return *running[b] < *running[a]; });
    return out;
  }

  // Shared queue: idle workers absorb the first jobs; each remaining job may
  // displace one running job, lowest priority first.
  if (queues.empty()) return out;
  const auto& jobs = queues[0].jobs();
  std::vector<WorkerIndex> busy;
  std::size_t idle = 0;
  for (std::size_t w = 0; w < running.size(); ++w) {
    if (running[w]) {
      busy.push_back(static_cast<WorkerIndex>(w));
    } else {
      ++idle;
    }
  }
  std::sort(busy.begin(), busy.end(), [&](WorkerIndex a, WorkerIndex b) {
    return *running[b] < *running[a] || (*running[b] == *running[a] && a < b);
  });
  for (std::size_t i = idle, j = 0; i < jobs.size() && j < busy.size(); ++i, ++j) {
    if (!jobs[i]->effective_key().higher_than(*running[busy[j]])) break;
    out.push_back(busy[j]);
  }
  return out;
}

Job* best_preempted(const std::vector<Job*>& preempted) {
  Job* best = nullptr;
  for (Job* j : preempted) {
    if (!best || j->effective_key().higher_than(best->effective_key())) best = j;
  }
  return best;
}

}  // namespace rtmw
