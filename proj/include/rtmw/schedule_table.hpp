#pragma once

#include <vector>

#include "rtmw/ids.hpp"
#include "rtmw/task_set.hpp"
#include "rtmw/time.hpp"

namespace rtmw {

struct TableEntry {
  TaskId task;
  VersionId version;
  Nanos release_offset = 0;
};

// Pre-computed time table, one row per worker, repeated every table_period.
struct ScheduleTable {
  Nanos table_period = 0;
  std::vector<std::vector<TableEntry>> rows;

  std::size_t entry_count() const;
};

// Ordering, reference integrity and bounds are errors; overlaps computed from
// wcet_estimate are warnings.
std::vector<Diagnostic> validate_table(const TaskSet& tasks, const PolicyConfig& config,
                                       const ScheduleTable& table);

}  // namespace rtmw
