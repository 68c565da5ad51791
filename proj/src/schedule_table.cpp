#include "rtmw/schedule_table.hpp"

#include <algorithm>

namespace rtmw {

std::size_t ScheduleTable::entry_count() const {
  std::size_t n = 0;
  for (const auto& row : rows) n += row.size();
  return n;
}

std::vector<Diagnostic> validate_table(const TaskSet& tasks, const PolicyConfig& config, const ScheduleTable& table) {
  std::vector<Diagnostic> out;
  auto error = [&](std::string msg) { out.push_back({Diagnostic::Severity::kError, std::move(msg)}); };
  auto warning = [&](std::string msg) { out.push_back({Diagnostic::Severity::kWarning, std::move(msg)}); };

  if (table.table_period <= 0) error("table: table_period must be positive");
  if (table.rows.size() > config.worker_count) {
    error("table: " + std::to_string(table.rows.size()) + " rows for " + std::to_string(config.worker_count) +
          " workers");
  }
  if (table.entry_count() == 0) error("table: no entries");

  for (std::size_t core = 0; core < table.rows.size(); ++core) {
    const auto& row = table.rows[core];
    const std::string where = "table core " + std::to_string(core);
    for (std::size_t i = 0; i < row.size(); ++i) {
      const TableEntry& e = row[i];
      const std::string at = where + " entry " + std::to_string(i);
      if (!e.task.valid() || e.task.index() >= tasks.tasks.size()) {
        error(at + ": unknown task");
        continue;
      }
      const auto& t = tasks.task(e.task);
      const auto& vs = t.versions;
      if (std::find(vs.begin(), vs.end(), e.version) == vs.end()) {
        error(at + ": version is not declared on task '" + t.name + "'");
        continue;
      }
      if (tasks.data_activated(e.task)) error(at + ": task '" + t.name + "' is a data-activated graph node");
      if (e.release_offset < 0 || (table.table_period > 0 && e.release_offset >= table.table_period)) {
        error(at + ": release offset " + format_duration(e.release_offset) + " outside [0, table_period)");
      }
      if (i > 0 && e.release_offset < row[i - 1].release_offset) {
        error(at + ": entries must be ordered by increasing release offset");
      }
      if (i > 0 && row[i - 1].task.valid() && row[i - 1].task.index() < tasks.tasks.size()) {
        const TableEntry& prev = row[i - 1];
        if (std::find(tasks.task(prev.task).versions.begin(), tasks.task(prev.task).versions.end(), prev.version) !=
            tasks.task(prev.task).versions.end()) {
          Nanos end = prev.release_offset + tasks.version(prev.version).wcet_estimate;
          if (end > e.release_offset) {
            warning(at + ": overlaps the previous entry by " + format_duration(end - e.release_offset));
          }
        }
      }
    }
    if (!row.empty() && table.table_period > 0) {
      const TableEntry& last = row.back();
      if (last.version.valid() && last.version.index() < tasks.versions.size()) {
        Nanos end = last.release_offset + tasks.version(last.version).wcet_estimate;
        if (end > table.table_period) {
          warning(where + ": last entry overlaps the next table period by " +
                  format_duration(end - table.table_period));
        }
      }
    }
  }
  return out;
}

}  // namespace rtmw
