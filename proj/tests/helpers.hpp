#pragma once

#include <optional>
#include <string>

#include "rtmw/config.hpp"
#include "rtmw/middleware.hpp"

namespace th {

inline rtmw::PolicyConfig config(rtmw::MappingScheme mapping, rtmw::PriorityAssignment prio, std::uint32_t workers,
                                 bool preemptive = true) {
  rtmw::PolicyConfig c;
  c.mapping_scheme = mapping;
  c.priority_assignment = prio;
  c.worker_count = workers;
  c.preemptive = preemptive;
  c.version_selection = rtmw::VersionSelection::kEnergy;
  return c;
}

inline rtmw::PolicyConfig global_edf(std::uint32_t workers = 1, bool preemptive = true) {
  return config(rtmw::MappingScheme::kGlobal, rtmw::PriorityAssignment::kEDF, workers, preemptive);
}

struct TaskSpec {
  std::string name;
  rtmw::Nanos period = 0;
  rtmw::Nanos wcet = 0;
  rtmw::Nanos deadline = 0;  // 0: implicit
  rtmw::Nanos offset = 0;
  std::optional<std::uint32_t> core;
  rtmw::TaskKind kind = rtmw::TaskKind::kPeriodic;
};

// One task with a single ENERGY version; returns its id.
inline rtmw::TaskId add_task(rtmw::Middleware& mw, const TaskSpec& s, rtmw::JobBody body = {}) {
  rtmw::TaskDescriptor d;
  d.name = s.name;
  d.kind = s.kind;
  d.period = s.period;
  d.relative_deadline = s.deadline ? s.deadline : s.period;
  d.release_offset = s.offset;
  d.virt_core_id = s.core;
  rtmw::TaskId id = mw.task_decl(d);
  if (!body) body = [](rtmw::JobContext&) {};
  mw.version_decl(id, std::move(body), {}, rtmw::EnergySelect{}, {"v1", s.wcet});
  return id;
}

}  // namespace th
