#include <gtest/gtest.h>

#include <sstream>

#include "rtmw/error.hpp"
#include "rtmw/trace.hpp"

using namespace rtmw;

namespace {

Trace sample() {
  Trace t;
  t.task_names = {"a", "b"};
  t.add({0, TraceKind::kReleaseTheoretical, 0, 0, kSchedulerContext, 10});
  t.add({0, TraceKind::kReleaseEffective, 0, 0, kSchedulerContext, 0});
  t.add({100, TraceKind::kGetTask, 0, 0, 0, 20});
  t.add({120, TraceKind::kJobStart, 0, 0, 0, 0});
  t.add({300, TraceKind::kPreempt, 0, 0, 0, 5});
  t.add({500, TraceKind::kResume, 0, 0, 0, 5});
  t.add({700, TraceKind::kJobComplete, 0, 0, 0, 700});
  t.add({700, TraceKind::kDeadlineMiss, 0, 0, 0, 690});
  t.add({50, TraceKind::kLockWait, -1, -1, 1, 30});
  t.add({60, TraceKind::kLockWait, -1, -1, kSchedulerContext, 40});
  t.add({0, TraceKind::kTickBegin, -1, -1, kSchedulerContext, 0});
  t.add({15, TraceKind::kTickEnd, -1, -1, kSchedulerContext, 15});
  t.end_time = 1000;
  t.finalize();
  return t;
}

}  // namespace

TEST(Trace, KindNamesRoundTrip) {
  for (int k = 0; k <= static_cast<int>(TraceKind::kInherit); ++k) {
    auto kind = static_cast<TraceKind>(k);
    EXPECT_EQ(parse_trace_kind(to_string(kind)), kind);
  }
  EXPECT_EQ(to_string(TraceKind::kJobStart), "job_start");
  EXPECT_FALSE(parse_trace_kind("nope"));
}

TEST(Trace, FinalizeIsStableByTime) {
  Trace t = sample();
  for (std::size_t i = 1; i < t.events.size(); ++i) EXPECT_LE(t.events[i - 1].timestamp, t.events[i].timestamp);
  // Same-timestamp events keep emission order.
  EXPECT_EQ(t.events[0].kind, TraceKind::kReleaseTheoretical);
  EXPECT_EQ(t.events[1].kind, TraceKind::kReleaseEffective);
}

TEST(Trace, CsvRoundTrip) {
  Trace t = sample();
  std::stringstream s;
  write_trace_csv(t, s);
  std::string text = s.str();
  EXPECT_EQ(text.rfind("timestamp_ns,kind,task,job_seq,worker,payload\n", 0), 0u);
  EXPECT_NE(text.find("120,job_start,a,0,0,0"), std::string::npos);
  Trace back = read_trace_csv(s);
  EXPECT_EQ(back.events, t.events);
  // Only names that occur in events survive the text form.
  EXPECT_EQ(back.task_names, std::vector<std::string>{"a"});
}

TEST(Trace, MalformedCsvRejected) {
  std::istringstream no_header("1,job_start,a,0,0,0\n");
  EXPECT_THROW(read_trace_csv(no_header), TraceIntegrityError);
  std::istringstream bad_kind("timestamp_ns,kind,task,job_seq,worker,payload\n1,warp,a,0,0,0\n");
  EXPECT_THROW(read_trace_csv(bad_kind), TraceIntegrityError);
  std::istringstream short_line("timestamp_ns,kind,task,job_seq,worker,payload\n1,job_start,a\n");
  EXPECT_THROW(read_trace_csv(short_line), TraceIntegrityError);
}

TEST(Overheads, SummedFromTrace) {
  OverheadReport r = compute_overheads(sample());
  EXPECT_EQ(r.get_task.total, 20);
  EXPECT_EQ(r.scheduling.max, 15);
  EXPECT_EQ(r.worker_lock_wait.max, 30);
  EXPECT_EQ(r.scheduler_lock_wait.max, 40);
  EXPECT_EQ(r.preemptions, 1u);
  EXPECT_EQ(r.context_switches, 2u);
  EXPECT_EQ(r.preemption_overhead, 10);
}

TEST(Overheads, TenPullsAtTwoMicros) {
  Trace t;
  t.task_names = {"a"};
  for (int i = 0; i < 10; ++i) t.add({i * 1000, TraceKind::kGetTask, 0, i, 0, 2000});
  t.finalize();
  EXPECT_EQ(compute_overheads(t).get_task.total, 20 * kMicro);
}

TEST(Overheads, UnmatchedEventsAreIntegrityErrors) {
  Trace start_only;
  start_only.task_names = {"a"};
  start_only.add({5, TraceKind::kJobStart, 0, 0, 0, 0});
  EXPECT_THROW(compute_overheads(start_only), TraceIntegrityError);

  Trace resume_only;
  resume_only.task_names = {"a"};
  resume_only.add({0, TraceKind::kReleaseTheoretical, 0, 0, -1, 0});
  resume_only.add({1, TraceKind::kJobStart, 0, 0, 0, 0});
  resume_only.add({2, TraceKind::kResume, 0, 0, 0, 0});
  EXPECT_THROW(compute_overheads(resume_only), TraceIntegrityError);
}

TEST(Report, PerTaskMetrics) {
  RunReport r = build_report(sample());
  ASSERT_EQ(r.tasks.size(), 2u);
  EXPECT_EQ(r.tasks[0].name, "a");
  EXPECT_EQ(r.tasks[0].released, 1u);
  EXPECT_EQ(r.tasks[0].completed, 1u);
  EXPECT_EQ(r.tasks[0].misses, 1u);
  EXPECT_EQ(r.tasks[0].response.max, 700);
  EXPECT_EQ(r.misses, 1u);
  EXPECT_DOUBLE_EQ(r.miss_ratio(), 1.0);
  EXPECT_EQ(r.tasks[1].released, 0u);
}

TEST(Report, StartedButUnfinishedIsTruncated) {
  Trace t;
  t.task_names = {"a"};
  t.add({0, TraceKind::kReleaseTheoretical, 0, 0, -1, 10});
  t.add({1, TraceKind::kJobStart, 0, 0, 0, 0});
  t.finalize();
  EXPECT_EQ(build_report(t).truncated, 1u);
}

TEST(StatsTest, MinMaxMean) {
  Stats s;
  EXPECT_EQ(s.mean(), 0.0);
  for (Nanos v : {5, 1, 9}) s.add(v);
  EXPECT_EQ(s.min, 1);
  EXPECT_EQ(s.max, 9);
  EXPECT_DOUBLE_EQ(s.mean(), 5.0);
}
