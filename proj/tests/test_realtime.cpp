#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <map>
#include <mutex>
#include <thread>

#include "helpers.hpp"
#include "rtmw/error.hpp"
#include "rtmw/job_context.hpp"
#include "rtmw/realtime.hpp"
#include "rtmw/simulator.hpp"

using namespace rtmw;

namespace {

RealtimeOptions relaxed() {
  RealtimeOptions o;
  o.pin_threads = false;
  o.lock_memory = false;
  o.realtime_priority = false;
  o.allow_oversubscription = true;
  return o;
}

}  // namespace

TEST(Realtime, RequiredProcessors) {
  EXPECT_EQ(required_processors(2, true), 3u);
  EXPECT_EQ(required_processors(2, false), 2u);
  EXPECT_FALSE(probe_host().cpus.empty());
}

TEST(Realtime, InsufficientProcessorsIsConfigError) {
  Middleware mw;
  auto cpus = static_cast<std::uint32_t>(probe_host().cpus.size());
  mw.init(th::global_edf(cpus));
  th::add_task(mw, {"a", 10 * kMilli, kMicro});
  RealtimeOptions o = relaxed();
  o.allow_oversubscription = false;
  EXPECT_THROW(mw.start(o), ConfigError);
  EXPECT_EQ(mw.phase(), Phase::kInitialized);
}

TEST(Realtime, PeriodicTaskRunsAndDrains) {
  Middleware mw;
  mw.init(th::global_edf(1));
  std::atomic<int> runs{0};
  th::add_task(mw, {"a", 10 * kMilli, 100 * kMicro}, [&](JobContext& ctx) {
    ctx.busy_wait(100 * kMicro);
    ++runs;
  });
  RealtimeResult r = run_realtime(mw, 100 * kMilli, relaxed());
  EXPECT_EQ(mw.phase(), Phase::kCleaned);
  EXPECT_GE(r.report.released, 5u);
  EXPECT_LE(r.report.released, 12u);
  EXPECT_EQ(r.report.completed, r.report.released);
  EXPECT_EQ(r.report.truncated, 0u);
  EXPECT_EQ(static_cast<std::uint64_t>(runs.load()), r.report.completed);
  EXPECT_NO_THROW(compute_overheads(r.trace));
}

TEST(Realtime, TraceEventsPerJobAreOrdered) {
  Middleware mw;
  mw.init(th::global_edf(2));
  th::add_task(mw, {"a", 5 * kMilli, 50 * kMicro});
  th::add_task(mw, {"b", 10 * kMilli, 50 * kMicro});
  RealtimeResult r = run_realtime(mw, 60 * kMilli, relaxed());
  std::map<std::pair<std::int32_t, std::int64_t>, std::vector<Nanos>> per_job;
  for (const auto& e : r.trace.events) {
    if (e.kind == TraceKind::kReleaseTheoretical || e.kind == TraceKind::kReleaseEffective ||
        e.kind == TraceKind::kJobStart || e.kind == TraceKind::kJobComplete) {
      per_job[{e.task, e.job_seq}].push_back(e.timestamp);
    }
  }
  ASSERT_FALSE(per_job.empty());
  for (const auto& [id, ts] : per_job) {
    ASSERT_EQ(ts.size(), 4u);
    EXPECT_TRUE(std::is_sorted(ts.begin(), ts.end()));
  }
}

TEST(Realtime, ChannelCarriesValuesAlongGraph) {
  Middleware mw;
  mw.init(th::global_edf(2));
  ChannelId ch = mw.channel_decl(sizeof(int), 1, "data");
  std::atomic<int> next{0};
  std::vector<int> got;
  std::mutex mu;
  TaskId src = th::add_task(mw, {"src", 10 * kMilli, 10 * kMicro},
                            [&](JobContext& ctx) { ctx.push_value(ch, next.fetch_add(1)); });
  TaskId dst = th::add_task(mw, {"dst", 0, 10 * kMicro, 10 * kMilli, 0, {}, TaskKind::kGraphNode}, [&](JobContext&) {
    int v = 0;
    channel_pop(ch, &v);
    std::lock_guard<std::mutex> lk(mu);
    got.push_back(v);
  });
  mw.channel_connect(src, dst, ch);
  RealtimeResult r = run_realtime(mw, 55 * kMilli, relaxed());
  ASSERT_FALSE(got.empty());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_EQ(got[i], static_cast<int>(i));
  EXPECT_EQ(static_cast<int>(got.size()), next.load());
}

TEST(Realtime, AperiodicActivationWhileRunning) {
  Middleware mw;
  mw.init(th::global_edf(1));
  th::add_task(mw, {"tick", 5 * kMilli, 10 * kMicro});
  std::atomic<int> hits{0};
  TaskId ap = th::add_task(mw, {"ap", 0, 10 * kMicro, 20 * kMilli, 0, {}, TaskKind::kAperiodic},
                           [&](JobContext&) { ++hits; });
  mw.start(relaxed());
  mw.task_activate(ap);
  std::this_thread::sleep_for(std::chrono::milliseconds(30));
  mw.stop();
  mw.collect_trace();
  mw.cleanup();
  EXPECT_EQ(hits.load(), 1);
}

TEST(Realtime, ChannelOpsOutsideJobAreUsageErrors) {
  EXPECT_EQ(current_job(), nullptr);
  int v = 1;
  EXPECT_THROW(channel_push(ChannelId(0), v), UsageError);
  EXPECT_THROW(channel_pop(ChannelId(0), &v), UsageError);
}

TEST(Realtime, NonPreemptiveSingleWorkerOrderMatchesSimulator) {
  // Long periods relative to host noise: only the job order is compared.
  auto build = [](Middleware& mw) {
    mw.init(th::global_edf(1, false));
    th::add_task(mw, {"a", 20 * kMilli, 2 * kMilli}, [](JobContext& c) { c.busy_wait(2 * kMilli); });
    th::add_task(mw, {"b", 40 * kMilli, 3 * kMilli}, [](JobContext& c) { c.busy_wait(3 * kMilli); });
  };
  Middleware sim_mw;
  build(sim_mw);
  Trace sim = run_simulation(sim_mw, {}, {80 * kMilli, 0}).trace;
  Middleware rt_mw;
  build(rt_mw);
  RealtimeOptions o = relaxed();
  o.release_horizon = 80 * kMilli;
  Trace real = run_realtime(rt_mw, 100 * kMilli, o).trace;
  auto order = [](const Trace& t) {
    std::vector<std::pair<std::int32_t, std::int64_t>> out;
    for (const auto& e : t.events) {
      if (e.kind == TraceKind::kJobStart) out.emplace_back(e.task, e.job_seq);
    }
    return out;
  };
  EXPECT_EQ(order(real), order(sim));
}
