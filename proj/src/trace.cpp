#include "rtmw/trace.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "rtmw/error.hpp"

namespace rtmw {
namespace {

constexpr std::array<std::string_view, 18> kKindNames{
    "release_theoretical", "release_effective", "job_start", "preempt",      "resume",      "job_complete",
    "deadline_miss",       "lock_wait",         "tick_begin", "tick_end",    "accel_acquire", "accel_release",
    "overrun",             "get_task",          "channel_push", "channel_pop", "accel_blocked", "inherit",
};

constexpr std::string_view kHeader = "timestamp_ns,kind,task,job_seq,worker,payload";

template <typename T>
T parse_int(std::string_view field, std::size_t line) {
  T v{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw TraceIntegrityError("trace line " + std::to_string(line) + ": bad integer '" + std::string(field) + "'");
  }
  return v;
}

std::string job_label(const Trace& trace, const TraceEvent& e) {
  std::string name = e.task >= 0 && static_cast<std::size_t>(e.task) < trace.task_names.size()
                         ? trace.task_names[e.task]
                         : std::to_string(e.task);
  return name + "/" + std::to_string(e.job_seq);
}

}  // namespace

std::string_view to_string(TraceKind kind) { return kKindNames.at(static_cast<std::size_t>(kind)); }

std::optional<TraceKind> parse_trace_kind(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == s) return static_cast<TraceKind>(i);
  }
  return std::nullopt;
}

void Trace::finalize() {
  std::stable_sort(events.begin(), events.end(),
                   [](const TraceEvent& a, const TraceEvent& b) { return a.timestamp < b.timestamp; });
  if (!events.empty()) end_time = std::max(end_time, events.back().timestamp);
}

std::vector<TraceEvent> Trace::of_kind(TraceKind kind) const {
  std::vector<TraceEvent> out;
  std::copy_if(events.begin(), events.end(), std::back_inserter(out), [&](const TraceEvent& e) { return e.kind == kind; });
  return out;
}

std::vector<TraceEvent> Trace::of_task(std::int32_t task) const {
  std::vector<TraceEvent> out;
  std::copy_if(events.begin(), events.end(), std::back_inserter(out), [&](const TraceEvent& e) { return e.task == task; });
  return out;
}

void write_trace_csv(const Trace& trace, std::ostream& out) {
  out << kHeader << '\n';
  for (const auto& e : trace.events) {
    out << e.timestamp << ',' << to_string(e.kind) << ',';
    if (e.task >= 0) out << trace.task_names.at(static_cast<std::size_t>(e.task));
    out << ',' << e.job_seq << ',' << e.worker << ',' << e.payload << '\n';
  }
}

Trace read_trace_csv(std::istream& in) {
  Trace trace;
  std::map<std::string, std::int32_t, std::less<>> ids;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line) || line != kHeader) throw TraceIntegrityError("trace: missing or unexpected header");
  ++lineno;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::array<std::string_view, 6> f;
    std::string_view rest = line;
    for (std::size_t i = 0; i < f.size(); ++i) {
      auto comma = rest.find(',');
      if ((comma == std::string_view::npos) != (i == f.size() - 1)) {
        throw TraceIntegrityError("trace line " + std::to_string(lineno) + ": expected 6 fields");
      }
      f[i] = rest.substr(0, comma);
      if (comma != std::string_view::npos) rest.remove_prefix(comma + 1);
    }
    TraceEvent e;
    e.timestamp = parse_int<Nanos>(f[0], lineno);
    auto kind = parse_trace_kind(f[1]);
    if (!kind) throw TraceIntegrityError("trace line " + std::to_string(lineno) + ": unknown kind '" + std::string(f[1]) + "'");
    e.kind = *kind;
    if (!f[2].empty()) {
      auto it = ids.find(f[2]);
      if (it == ids.end()) {
        it = ids.emplace(std::string(f[2]), static_cast<std::int32_t>(trace.task_names.size())).first;
        trace.task_names.emplace_back(f[2]);
      }
      e.task = it->second;
    }
    e.job_seq = parse_int<std::int64_t>(f[3], lineno);
    e.worker = parse_int<WorkerIndex>(f[4], lineno);
    e.payload = parse_int<std::int64_t>(f[5], lineno);
    trace.events.push_back(e);
  }
  if (!trace.events.empty()) trace.end_time = trace.events.back().timestamp;
  return trace;
}

void Stats::add(Nanos v) {
  if (count == 0) {
    min = max = v;
  } else {
    min = std::min(min, v);
    max = std::max(max, v);
  }
  ++count;
  total += v;
}

Stats RunReport::response() const {
  Stats s;
  for (const auto& t : tasks) {
    if (t.response.count == 0) continue;
    if (s.count == 0) {
      s = t.response;
      continue;
    }
    s.min = std::min(s.min, t.response.min);
    s.max = std::max(s.max, t.response.max);
    s.count += t.response.count;
    s.total += t.response.total;
  }
  return s;
}

OverheadReport compute_overheads(const Trace& trace) {
  enum class State { kReleased, kRunning, kPreempted, kDone };
  std::map<std::pair<std::int32_t, std::int64_t>, State> jobs;
  OverheadReport r;
  for (const auto& e : trace.events) {
    const auto id = std::make_pair(e.task, e.job_seq);
    auto unmatched = [&](const char* what) {
      throw TraceIntegrityError("trace: " + std::string(what) + " for job " + job_label(trace, e) + " at " +
                                std::to_string(e.timestamp));
    };
    switch (e.kind) {
      case TraceKind::kReleaseTheoretical:
        jobs[id] = State::kReleased;
        break;
      case TraceKind::kReleaseEffective:
        if (!jobs.contains(id)) unmatched("effective release without theoretical release");
        r.release_overhead.add(e.payload);
        break;
      case TraceKind::kJobStart: {
        auto it = jobs.find(id);
        if (it == jobs.end() || it->second != State::kReleased) unmatched("start without release");
        it->second = State::kRunning;
        break;
      }
      case TraceKind::kPreempt: {
        auto it = jobs.find(id);
        if (it == jobs.end() || it->second != State::kRunning) unmatched("preemption of a job that is not running");
        it->second = State::kPreempted;
        ++r.preemptions;
        ++r.context_switches;
        r.preemption_overhead += e.payload;
        break;
      }
      case TraceKind::kResume: {
        auto it = jobs.find(id);
        if (it == jobs.end() || it->second != State::kPreempted) unmatched("resume without preemption");
        it->second = State::kRunning;
        ++r.context_switches;
        r.preemption_overhead += e.payload;
        break;
      }
      case TraceKind::kJobComplete: {
        auto it = jobs.find(id);
        if (it == jobs.end() || it->second != State::kRunning) unmatched("completion without start");
        it->second = State::kDone;
        break;
      }
      case TraceKind::kLockWait:
        (e.worker == kSchedulerContext ? r.scheduler_lock_wait : r.worker_lock_wait).add(e.payload);
        break;
      case TraceKind::kTickEnd:
        r.scheduling.add(e.payload);
        break;
      case TraceKind::kGetTask:
        r.get_task.add(e.payload);
        break;
      case TraceKind::kOverrun:
        ++r.overruns;
        break;
      default:
        break;
    }
  }
  return r;
}

RunReport build_report(const Trace& trace) {
  RunReport report;
  report.tasks.resize(trace.task_names.size());
  for (std::size_t i = 0; i < trace.task_names.size(); ++i) report.tasks[i].name = trace.task_names[i];
  auto task_of = [&](const TraceEvent& e) -> TaskReport* {
    if (e.task < 0 || static_cast<std::size_t>(e.task) >= report.tasks.size()) return nullptr;
    return &report.tasks[static_cast<std::size_t>(e.task)];
  };
  for (const auto& e : trace.events) {
    TaskReport* t = task_of(e);
    if (!t) continue;
    switch (e.kind) {
      case TraceKind::kReleaseTheoretical:
        ++t->released;
        break;
      case TraceKind::kJobComplete:
        ++t->completed;
        t->response.add(e.payload);
        break;
      case TraceKind::kDeadlineMiss:
        ++t->misses;
        break;
      default:
        break;
    }
  }
  for (const auto& t : report.tasks) {
    report.released += t.released;
    report.completed += t.completed;
    report.misses += t.misses;
  }
  report.truncated = report.released - report.completed;
  report.horizon = trace.end_time;
  report.overheads = compute_overheads(trace);
  return report;
}

}  // namespace rtmw
