#include "rtmw/version_select.hpp"

#include <algorithm>
#include <limits>

#include "rtmw/error.hpp"
#include "rtmw/job.hpp"
#include "rtmw/task_set.hpp"

namespace rtmw {
namespace {

double battery_for(const SelectionContext& ctx, const EnergySelect& props) {
  if (ctx.battery_probe) return ctx.battery_probe();
  if (props.get_battery_status) return props.get_battery_status();
  return std::numeric_limits<double>::infinity();
}

template <typename Props>
const Props& props_of(const TaskSet& tasks, VersionId v) {
  const auto* p = std::get_if<Props>(&tasks.version(v).select_props);
  if (!p) {
    throw SelectionError("version '" + tasks.version(v).name + "' lacks the properties of the configured method");
  }
  return *p;
}

VersionId select_energy(const TaskSet& tasks, const SelectionContext& ctx, std::span<const VersionId> candidates) {
  std::optional<VersionId> fastest;
  for (VersionId v : candidates) {
    const auto& p = props_of<EnergySelect>(tasks, v);
    if (p.energy_budget <= battery_for(ctx, p)) {
      if (!fastest || tasks.version(v).wcet_estimate < tasks.version(*fastest).wcet_estimate) fastest = v;
    }
  }
  if (fastest) return *fastest;
  VersionId cheapest = candidates.front();
  for (VersionId v : candidates) {
    if (props_of<EnergySelect>(tasks, v).energy_budget < props_of<EnergySelect>(tasks, cheapest).energy_budget) {
      cheapest = v;
    }
  }
  return cheapest;
}

VersionId select_energy_time(const TaskSet& tasks, TaskId task, const SelectionContext& ctx,
                             std::span<const VersionId> candidates) {
  if (ctx.alpha < 0.0 || ctx.alpha > 1.0) throw SelectionError("ENERGY_TIME alpha must lie in [0, 1]");
  double max_t = 0.0;
  double max_e = 0.0;
  for (VersionId v : tasks.task(task).versions) {
    const auto& p = props_of<EnergyTimeSelect>(tasks, v);
    max_t = std::max(max_t, static_cast<double>(p.exec_time));
    max_e = std::max(max_e, p.energy_cost);
  }
  auto score = [&](VersionId v) {
    const auto& p = props_of<EnergyTimeSelect>(tasks, v);
    double t = max_t > 0.0 ? static_cast<double>(p.exec_time) / max_t : 0.0;
    double e = max_e > 0.0 ? p.energy_cost / max_e : 0.0;
    return ctx.alpha * t + (1.0 - ctx.alpha) * e;
  };
  VersionId best = candidates.front();
  double best_score = score(best);
  for (VersionId v : candidates.subspan(1)) {
    double s = score(v);
    if (s < best_score) {
      best = v;
      best_score = s;
    }
  }
  return best;
}

}  // namespace

std::vector<VersionId> eligible_versions(const TaskSet& tasks, TaskId task, const AcceleratorRegistry& registry) {
  std::vector<VersionId> out;
  for (VersionId v : tasks.task(task).versions) {
    const auto& accels = tasks.version(v).accelerators;
    if (std::none_of(accels.begin(), accels.end(), [&](AccelId a) { return registry.busy(a); })) out.push_back(v);
  }
  return out;
}

VersionId select_version(const TaskSet& tasks, TaskId task, const SelectionContext& ctx, VersionSelection method,
                         std::span<const VersionId> candidates) {
  if (candidates.empty()) throw SelectionError("task '" + tasks.task(task).name + "' has no candidate version");
  switch (method) {
    case VersionSelection::kEnergy:
      return select_energy(tasks, ctx, candidates);
    case VersionSelection::kEnergyTime:
      return select_energy_time(tasks, task, ctx, candidates);
    case VersionSelection::kMode:
      for (VersionId v : candidates) {
        if ((props_of<ModeSelect>(tasks, v).mode_mask & ctx.execution_mode) != 0) return v;
      }
      throw SelectionError("task '" + tasks.task(task).name + "': no version matches the current execution mode");
    case VersionSelection::kBitmask:
      for (VersionId v : candidates) {
        if ((props_of<BitmaskSelect>(tasks, v).permission_mask & ctx.permission_mask) != 0) return v;
      }
      throw SelectionError("task '" + tasks.task(task).name + "': no version matches the permission mask");
    case VersionSelection::kUser: {
      const auto& user = props_of<UserSelect>(tasks, tasks.task(task).versions.front());
      if (!user.selector) throw SelectionError("task '" + tasks.task(task).name + "' has no user selector");
      SelectionRequest request{&tasks, task, candidates, &ctx};
      VersionId chosen = user.selector(request);
      if (std::find(candidates.begin(), candidates.end(), chosen) == candidates.end()) {
        throw SelectionError("task '" + tasks.task(task).name + "': user selector returned an ineligible version");
      }
      return chosen;
    }
    case VersionSelection::kPreselected:
      return candidates.front();
  }
  throw SelectionError("unknown selection method");
}

VersionId choose_version(const TaskSet& tasks, TaskId task, const SelectionContext& ctx, VersionSelection method,
                         const AcceleratorRegistry* registry) {
  const auto& all = tasks.task(task).versions;
  if (!registry) return select_version(tasks, task, ctx, method, all);
  auto eligible = eligible_versions(tasks, task, *registry);
  if (eligible.empty()) return select_version(tasks, task, ctx, method, all);
  if (method == VersionSelection::kMode || method == VersionSelection::kBitmask) {
    try {
      return select_version(tasks, task, ctx, method, eligible);
    } catch (const SelectionError&) {
      return select_version(tasks, task, ctx, method, all);
    }
  }
  return select_version(tasks, task, ctx, method, eligible);
}

AcceleratorRegistry::AcceleratorRegistry(std::size_t count) : slots_(count) {}

bool AcceleratorRegistry::busy(AccelId id) const { return slots_.at(id.index()).holder != nullptr; }

Job* AcceleratorRegistry::holder(AccelId id) const { return slots_.at(id.index()).holder; }

bool AcceleratorRegistry::holds_any(const Job& job) const {
  return std::any_of(slots_.begin(), slots_.end(), [&](const Slot& s) { return s.holder == &job; });
}

AcceleratorRegistry::Outcome AcceleratorRegistry::acquire(Job& job, std::span<const AccelId> accels, bool inherit) {
  if (holds_any(job)) throw UsageError("job already holds an accelerator");
  Outcome out;
  for (AccelId a : accels) {
    Slot& slot = slots_.at(a.index());
    if (slot.holder) {
      out.holder = slot.holder;
      slot.waiters.push_back(&job);
      const PriorityKey requester = job.effective_key();
      if (inherit && requester.higher_than(slot.holder->effective_key())) {
        slot.holder->inherited = requester;
        out.inherited = true;
      }
      return out;
    }
  }
  for (AccelId a : accels) slots_.at(a.index()).holder = &job;
  out.acquired = true;
  return out;
}

std::vector<Job*> AcceleratorRegistry::release(Job& job) {
  std::vector<Job*> woken;
  for (Slot& slot : slots_) {
    if (slot.holder != &job) continue;
    slot.holder = nullptr;
    woken.insert(woken.end(), slot.waiters.begin(), slot.waiters.end());
    slot.waiters.clear();
  }
  job.inherited.reset();
  return woken;
}

}  // namespace rtmw
