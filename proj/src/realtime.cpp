#include "rtmw/realtime.hpp"

#include <pthread.h>
#include <sched.h>
#include <sys/mman.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "realtime_engine.hpp"
#include "rtmw/channel.hpp"
#include "rtmw/clock.hpp"
#include "rtmw/error.hpp"
#include "rtmw/fifo_lock.hpp"
#include "rtmw/job_context.hpp"
#include "rtmw/middleware.hpp"
#include "rtmw/scheduler.hpp"

namespace rtmw {
namespace {

thread_local JobContext* tls_job = nullptr;

constexpr Nanos kBusyChunk = 20 * kMicro;
constexpr Nanos kPollSlice = 10 * kMilli;

std::string read_first_line(const char* path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  return line;
}

}  // namespace

JobContext* current_job() { return tls_job; }

void channel_push(ChannelId channel, std::span<const std::byte> element) {
  if (!tls_job) throw UsageError("channel_push called outside a running job");
  tls_job->push(channel, element);
}

void channel_pop(ChannelId channel, std::span<std::byte> out) {
  if (!tls_job) throw UsageError("channel_pop called outside a running job");
  tls_job->pop(channel, out);
}

HostProbe probe_host() {
  HostProbe probe;
  cpu_set_t set;
  CPU_ZERO(&set);
  if (sched_getaffinity(0, sizeof(set), &set) == 0) {
    for (int c = 0; c < CPU_SETSIZE; ++c) {
      if (CPU_ISSET(c, &set)) probe.cpus.push_back(c);
    }
  } else {
    long n = sysconf(_SC_NPROCESSORS_ONLN);
    for (long c = 0; c < n; ++c) probe.cpus.push_back(static_cast<int>(c));
  }
  const std::string runtime = read_first_line("/proc/sys/kernel/sched_rt_runtime_us");
  if (!runtime.empty() && runtime != "-1") {
    probe.warnings.push_back("real-time throttling is active (sched_rt_runtime_us=" + runtime + ")");
  }
  if (read_first_line("/sys/devices/system/cpu/isolated").empty()) {
    probe.warnings.push_back("no isolated processors (boot with isolcpus= to shield worker cores)");
  }
  return probe;
}

unsigned required_processors(unsigned worker_count, bool online) { return worker_count + (online ? 1U : 0U); }

struct RealtimeEngine::Impl {
  struct WorkerState {
    std::optional<PriorityKey> running;  // guarded by meta
    std::atomic<bool> notified{false};
    std::atomic<bool> preempt{false};
    std::mutex m;
    std::condition_variable cv;
    std::thread thread;
    std::vector<TraceEvent> trace;
  };

  struct Chan {
    explicit Chan(const ChannelDescriptor& d) : buf(d.element_size, d.capacity) {}
    std::mutex m;
    std::condition_variable cv;
    ChannelBuffer buf;
    std::size_t reserved = 0;
  };

  class Context;

  Impl(const Middleware& mw, const RealtimeOptions& opts)
      : config(mw.config()),
        tasks(mw.task_set()),
        selection(mw.selection_context()),
        table(mw.schedule_table()),
        options(opts),
        clock(mw.config().waiting_strategy),
        registry(tasks.accelerators.size()),
        task_seq(tasks.tasks.size()) {
    for (std::size_t i = 0; i < queue_count(config); ++i) {
      queues.emplace_back();
      locks.push_back(std::make_unique<FifoLock>(config.locking_strategy));
    }
    for (std::uint32_t w = 0; w < config.worker_count; ++w) workers.push_back(std::make_unique<WorkerState>());
    for (const auto& c : tasks.channels) channels.push_back(std::make_unique<Chan>(c));
  }

  PolicyConfig config;
  TaskSet tasks;
  SelectionContext selection;  // guarded by meta
  std::optional<ScheduleTable> table;
  RealtimeOptions options;
  MonotonicClock clock;

  mutable std::mutex warn_m;
  std::vector<std::string> warns;

  std::vector<ReadyQueue> queues;
  std::vector<std::unique_ptr<FifoLock>> locks;
  std::mutex meta;
  AcceleratorRegistry registry;
  std::deque<Job> jobs;
  std::vector<std::unique_ptr<WorkerState>> workers;
  std::vector<std::unique_ptr<Chan>> channels;
  std::vector<std::uint64_t> task_seq;  // off-line, guarded by meta

  std::mutex tracker_m;
  std::optional<ReleaseTracker> tracker;

  std::thread sched_thread;
  std::vector<TraceEvent> sched_trace;
  std::mutex sched_m;
  std::condition_variable sched_cv;
  std::atomic<bool> graph_pending{false};
  std::atomic<bool> stopping{false};
  std::atomic<bool> shutdown{false};
  std::atomic<std::int64_t> outstanding{0};
  std::atomic<Nanos> stop_time{0};
  bool locked_memory = false;
  bool started = false;
  bool joined = false;
  Trace merged;

  void warn(std::string msg) {
    std::lock_guard lk(warn_m);
    if (std::find(warns.begin(), warns.end(), msg) == warns.end()) warns.push_back(std::move(msg));
  }

  static void record(std::vector<TraceEvent>& buf, TraceKind kind, const Job* job, WorkerIndex w, std::int64_t payload,
                     Nanos when) {
    TraceEvent e;
    e.timestamp = when;
    e.kind = kind;
    if (job) {
      e.task = static_cast<std::int32_t>(job->task.value);
      e.job_seq = static_cast<std::int64_t>(job->seq);
    }
    e.worker = w;
    e.payload = payload;
    buf.push_back(e);
  }

  std::vector<TraceEvent>& buffer(WorkerIndex w) {
    return w == kSchedulerContext ? sched_trace : workers[static_cast<std::size_t>(w)]->trace;
  }
  void emit(WorkerIndex w, TraceKind kind, const Job* job, std::int64_t payload) {
    record(buffer(w), kind, job, w, payload, clock.now());
  }

  std::size_t queue_of(WorkerIndex w) const {
    return config.mapping_scheme == MappingScheme::kGlobal ? 0 : static_cast<std::size_t>(w);
  }

  void setup_thread(int slot, bool scheduler) {
    if (options.pin_threads && !cpus.empty()) {
      cpu_set_t set;
      CPU_ZERO(&set);
      CPU_SET(cpus[static_cast<std::size_t>(slot) % cpus.size()], &set);
      if (pthread_setaffinity_np(pthread_self(), sizeof(set), &set) != 0) warn("processor pinning denied by the host");
    }
    if (realtime_priority) {
      sched_param p{};
      p.sched_priority = sched_get_priority_max(SCHED_FIFO) - (scheduler ? 1 : 2);
      if (pthread_setschedparam(pthread_self(), SCHED_FIFO, &p) != 0) warn("SCHED_FIFO denied by the host");
    }
  }

  std::vector<int> cpus;
  bool realtime_priority = false;

  // --- notification ---
  void notify_worker(std::size_t w) {
    WorkerState& ws = *workers[w];
    ws.notified.store(true);
    if (config.waiting_strategy == WaitingStrategy::kSleep) {
      std::lock_guard lk(ws.m);
      ws.cv.notify_one();
    }
  }

  // Caller holds the lock of queue q.
  void notify_queue(std::size_t q) {
    std::vector<std::size_t> idle_notify;
    std::vector<std::size_t> preempt_notify;
    {
      std::lock_guard lk(meta);
      std::vector<std::optional<PriorityKey>> running(workers.size());
      for (std::size_t w = 0; w < workers.size(); ++w) running[w] = workers[w]->running;
      if (config.mapping_scheme == MappingScheme::kGlobal) {
        std::size_t available = queues[0].size();
        for (std::size_t w = 0; w < workers.size() && available > 0; ++w) {
          if (!running[w]) {
            idle_notify.push_back(w);
            --available;
          }
        }
        for (WorkerIndex w : preemption_targets(config, std::span<const ReadyQueue>(queues.data(), 1), running)) {
          preempt_notify.push_back(static_cast<std::size_t>(w));
        }
      } else {
        const Job* head = queues[q].head();
        if (head && !running[q]) {
          idle_notify.push_back(q);
        } else if (head && config.preemptive && head->effective_key().higher_than(*running[q])) {
          preempt_notify.push_back(q);
        }
      }
    }
    for (std::size_t w : preempt_notify) workers[w]->preempt.store(true);
    for (std::size_t w : idle_notify) notify_worker(w);
  }

  // --- queue access ---
  // Pops the best dispatchable job that outranks `current` (any job when
  // null), acquiring its accelerators.
  Job* pick(WorkerIndex w, const Job* current, Nanos* cs_out) {
    const std::size_t q = queue_of(w);
    FifoLock& lock = *locks[q];
    const Nanos waited = lock.lock();
    const Nanos t0 = clock.now();
    emit(w, TraceKind::kLockWait, nullptr, waited);
    Job* chosen = nullptr;
    {
      std::lock_guard lk(meta);
      while (Job* head = queues[q].head()) {
        if (current && !head->effective_key().higher_than(current->effective_key())) break;
        queues[q].pop_head();
        const auto& accels = tasks.version(head->version).accelerators;
        if (std::any_of(accels.begin(), accels.end(), [&](AccelId a) { return registry.busy(a); })) {
          selection.now = t0;
          head->version = choose_version(tasks, head->task, selection, config.version_selection, &registry);
        }
        const auto& chosen_accels = tasks.version(head->version).accelerators;
        auto outcome = registry.acquire(*head, chosen_accels, config.priority_inheritance);
        if (outcome.acquired) {
          chosen = head;
          chosen->worker = w;
          chosen->state = JobState::kRunning;
          break;
        }
        for (AccelId a : chosen_accels) {
          if (registry.holder(a) == outcome.holder) {
            emit(w, TraceKind::kAccelBlocked, head, a.value);
            break;
          }
        }
        if (outcome.inherited) emit(w, TraceKind::kInherit, outcome.holder, head->task.value);
      }
    }
    const Nanos t1 = clock.now();
    lock.unlock();
    record(buffer(w), TraceKind::kGetTask, nullptr, w, t1 - t0, t0);
    if (cs_out) *cs_out = t1 - t0;
    return chosen;
  }

  void set_running(WorkerIndex w, const Job* job) {
    std::lock_guard lk(meta);
    workers[static_cast<std::size_t>(w)]->running =
        job ? std::optional<PriorityKey>(job->effective_key()) : std::nullopt;
  }

  void execute(WorkerIndex w, Job* job);
  void safe_point(WorkerIndex w, Job* job);
  void complete(WorkerIndex w, Job* job);

  void worker_main(WorkerIndex w);
  void offline_main(WorkerIndex w);
  void scheduler_main();
  void publish(std::vector<Job*> created);
  std::vector<Job*> create(const std::vector<Release>& releases, Nanos now);
  void graph_step();
  void wait_worker(WorkerState& ws);
  void request_graph() {
    graph_pending.store(true);
    std::lock_guard lk(sched_m);
    sched_cv.notify_all();
  }
};

class RealtimeEngine::Impl::Context final : public JobContext {
 public:
  Context(Impl& e, WorkerIndex w, Job* job) : e_(e), w_(w), job_(job) {}

  TaskId task() const override { return job_->task; }
  std::uint64_t seq() const override { return job_->seq; }
  VersionId version() const override { return job_->version; }
  const std::any& static_args() const override { return e_.tasks.version(job_->version).static_args; }
  Nanos now() const override { return e_.clock.now(); }
  Nanos abs_deadline() const override { return job_->abs_deadline; }

  void push(ChannelId channel, std::span<const std::byte> element) override {
    Chan& ch = channel_for(channel, true);
    yield_point();
    {
      std::unique_lock lk(ch.m);
      ch.cv.wait(lk, [&] { return !ch.buf.full(); });
      if (!ch.buf.try_push(element)) throw UsageError("channel push failed");
      e_.emit(w_, TraceKind::kChannelPush, job_, channel.value);
    }
    ch.cv.notify_all();
    if (e_.tasks.data_activated(e_.tasks.channel(channel).dst_task)) e_.request_graph();
    yield_point();
  }

  void pop(ChannelId channel, std::span<std::byte> out) override {
    Chan& ch = channel_for(channel, false);
    yield_point();
    {
      std::unique_lock lk(ch.m);
      ch.cv.wait(lk, [&] { return !ch.buf.empty(); });
      if (!ch.buf.try_pop(out)) throw UsageError("channel pop failed");
      if (ch.reserved > 0 && e_.tasks.data_activated(job_->task)) --ch.reserved;
      e_.emit(w_, TraceKind::kChannelPop, job_, channel.value);
    }
    ch.cv.notify_all();
    yield_point();
  }

  void yield_point() override { e_.safe_point(w_, job_); }

  void busy_wait(Nanos duration) override {
    Nanos remaining = duration;
    while (remaining > 0) {
      const Nanos chunk = std::min(remaining, kBusyChunk);
      const Nanos until = MonotonicClock::host_now() + chunk;
      while (MonotonicClock::host_now() < until) {
      }
      remaining -= chunk;
      yield_point();
    }
  }

  void set_execution_mode(ModeMask mode) override {
    std::lock_guard lk(e_.meta);
    e_.selection.execution_mode = mode;
  }
  void set_permission_mask(ModeMask mask) override {
    std::lock_guard lk(e_.meta);
    e_.selection.permission_mask = mask;
  }

 private:
  Chan& channel_for(ChannelId c, bool push) {
    if (!c.valid() || c.index() >= e_.channels.size()) throw UsageError("unknown channel id " + std::to_string(c.value));
    const auto& d = e_.tasks.channel(c);
    if ((push ? d.src_task : d.dst_task) != job_->task) {
      throw UsageError("task '" + e_.tasks.task(job_->task).name + "' is not the " + (push ? "producer" : "consumer") +
                       " of channel '" + d.name + "'");
    }
    return *e_.channels[c.index()];
  }

  Impl& e_;
  WorkerIndex w_;
  Job* job_;
};

void RealtimeEngine::Impl::execute(WorkerIndex w, Job* job) {
  set_running(w, job);
  for (AccelId a : tasks.version(job->version).accelerators) emit(w, TraceKind::kAccelAcquire, job, a.value);
  emit(w, TraceKind::kJobStart, job, job->version.value);
  Context ctx(*this, w, job);
  JobContext* prev = tls_job;
  tls_job = &ctx;
  const VersionDescriptor& v = tasks.version(job->version);
  try {
    if (v.entry) {
      v.entry(ctx);
    } else {
      ctx.busy_wait(v.wcet_estimate);
    }
  } catch (const std::exception& ex) {
    warn("job body of task '" + tasks.task(job->task).name + "' threw: " + ex.what());
  }
  tls_job = prev;
  complete(w, job);
}

void RealtimeEngine::Impl::safe_point(WorkerIndex w, Job* job) {
  if (!config.preemptive || !config.online()) return;
  WorkerState& ws = *workers[static_cast<std::size_t>(w)];
  if (!ws.preempt.exchange(false)) return;
  // Run every higher-priority job on top of this one, then resume it.
  for (;;) {
    Nanos cs = 0;
    Job* next = pick(w, job, &cs);
    if (!next) return;
    job->state = JobState::kPreempted;
    emit(w, TraceKind::kPreempt, job, cs);
    execute(w, next);
    job->state = JobState::kRunning;
    set_running(w, job);
    emit(w, TraceKind::kResume, job, 0);
  }
}

void RealtimeEngine::Impl::complete(WorkerIndex w, Job* job) {
  const Nanos now = clock.now();
  std::vector<Job*> woken;
  {
    std::lock_guard lk(meta);
    if (registry.holds_any(*job)) {
      for (AccelId a : tasks.version(job->version).accelerators) {
        record(buffer(w), TraceKind::kAccelRelease, job, w, a.value, now);
      }
    }
    woken = registry.release(*job);
    job->state = JobState::kCompleted;
  }
  record(buffer(w), TraceKind::kJobComplete, job, w, now - job->abs_release, now);
  if (now > job->abs_deadline) record(buffer(w), TraceKind::kDeadlineMiss, job, w, now - job->abs_deadline, now);
  set_running(w, nullptr);

  std::map<std::size_t, std::vector<Job*>> by_queue;
  for (Job* j : woken) by_queue[route(config, tasks, j->task)].push_back(j);
  for (auto& [q, list] : by_queue) {
    emit(w, TraceKind::kLockWait, nullptr, locks[q]->lock());
    {
      std::lock_guard lk(meta);
      for (Job* j : list) queues[q].insert(j);
      queues[q].sort();
    }
    notify_queue(q);
    locks[q]->unlock();
  }
  if (config.online()) outstanding.fetch_sub(1);
}

void RealtimeEngine::Impl::wait_worker(WorkerState& ws) {
  if (config.waiting_strategy == WaitingStrategy::kSpin) {
    while (!ws.notified.load() && !shutdown.load()) std::this_thread::yield();
  } else {
    std::unique_lock lk(ws.m);
    ws.cv.wait(lk, [&] { return ws.notified.load() || shutdown.load(); });
  }
  ws.notified.store(false);
}

void RealtimeEngine::Impl::worker_main(WorkerIndex w) {
  setup_thread(static_cast<int>(w) + 1, false);
  WorkerState& ws = *workers[static_cast<std::size_t>(w)];
  for (;;) {
    ws.preempt.store(false);
    if (Job* job = pick(w, nullptr, nullptr)) {
      execute(w, job);
      continue;
    }
    if (shutdown.load()) return;
    wait_worker(ws);
  }
}

void RealtimeEngine::Impl::offline_main(WorkerIndex w) {
  setup_thread(static_cast<int>(w), false);
  if (static_cast<std::size_t>(w) >= table->rows.size() || table->rows[w].empty()) return;
  const auto& row = table->rows[static_cast<std::size_t>(w)];
  Nanos prev_end = 0;
  for (std::uint64_t m = 0;; ++m) {
    for (const TableEntry& e : row) {
      const Nanos instant = static_cast<Nanos>(m) * table->table_period + e.release_offset;
      if (options.release_horizon && instant >= *options.release_horizon) return;
      // Delay slot; stop() ends the loop before the next entry.
      for (;;) {
        if (stopping.load() && instant >= stop_time.load()) return;
        const Nanos now = clock.now();
        if (now >= instant) break;
        clock.wait_until(std::min(instant, now + kPollSlice));
      }
      Job* job = nullptr;
      {
        std::lock_guard lk(meta);
        Job& j = jobs.emplace_back();
        j.task = e.task;
        j.seq = task_seq[e.task.index()]++;
        j.version = e.version;
        j.abs_release = instant;
        j.abs_deadline = instant + tasks.task(e.task).relative_deadline;
        job = &j;
      }
      const Nanos start = clock.now();
      auto& buf = buffer(w);
      record(buf, TraceKind::kReleaseTheoretical, job, w, job->abs_deadline, instant);
      record(buf, TraceKind::kReleaseEffective, job, w, start - instant, start);
      if (prev_end > instant) record(buf, TraceKind::kOverrun, job, w, start - instant, start);
      job->worker = w;
      job->state = JobState::kRunning;
      execute(w, job);
      prev_end = clock.now();
    }
  }
}

std::vector<Job*> RealtimeEngine::Impl::create(const std::vector<Release>& releases, Nanos now) {
  std::vector<Job*> out;
  std::lock_guard lk(meta);
  selection.now = now;
  for (const Release& r : releases) {
    Job& j = jobs.emplace_back(make_job(r, config, tasks, selection, &registry));
    record(sched_trace, TraceKind::kReleaseTheoretical, &j, kSchedulerContext, j.abs_deadline, j.abs_release);
    out.push_back(&j);
  }
  outstanding.fetch_add(static_cast<std::int64_t>(out.size()));
  return out;
}

void RealtimeEngine::Impl::publish(std::vector<Job*> created) {
  std::map<std::size_t, std::vector<Job*>> by_queue;
  for (Job* j : created) by_queue[route(config, tasks, j->task)].push_back(j);
  for (auto& [q, list] : by_queue) {
    emit(kSchedulerContext, TraceKind::kLockWait, nullptr, locks[q]->lock());
    {
      std::lock_guard lk(meta);
      for (Job* j : list) queues[q].insert(j);
      queues[q].sort();
    }
    const Nanos now = clock.now();
    for (Job* j : list) record(sched_trace, TraceKind::kReleaseEffective, j, kSchedulerContext, now - j->abs_release, now);
    notify_queue(q);
    locks[q]->unlock();
  }
}

void RealtimeEngine::Impl::graph_step() {
  graph_pending.store(false);
  const Nanos now = clock.now();
  std::vector<Release> releases;
  {
    std::lock_guard lk(tracker_m);
    releases = tracker->collect_graph_releases(
        now,
        [this](ChannelId c) {
          Chan& ch = *channels[c.index()];
          std::lock_guard cl(ch.m);
          return ch.buf.occupancy() > ch.reserved ? ch.buf.occupancy() - ch.reserved : std::size_t{0};
        },
        [this](ChannelId c, std::size_t n) {
          Chan& ch = *channels[c.index()];
          std::lock_guard cl(ch.m);
          ch.reserved += n;
        });
  }
  if (!releases.empty()) publish(create(releases, now));
}

void RealtimeEngine::Impl::scheduler_main() {
  setup_thread(0, true);
  const Nanos tick = scheduler_tick_period(tasks);
  std::uint64_t k = 0;
  auto wait_event = [&](Nanos until) {
    // Returns when `until` is reached, a graph activation is pending or
    // stop() was called.
    for (;;) {
      if (graph_pending.load() || stopping.load()) return;
      const Nanos now = clock.now();
      if (now >= until) return;
      if (config.waiting_strategy == WaitingStrategy::kSpin) {
        std::this_thread::yield();
        continue;
      }
      std::unique_lock lk(sched_m);
      sched_cv.wait_for(lk, std::chrono::nanoseconds(std::min(until - now, kPollSlice)),
                        [&] { return graph_pending.load() || stopping.load(); });
    }
  };

  while (!stopping.load()) {
    const Nanos planned = static_cast<Nanos>(k) * tick;
    wait_event(planned);
    if (stopping.load()) break;
    if (graph_pending.load() && clock.now() < planned) {
      graph_step();
      continue;
    }
    const Nanos begin = clock.now();
    record(sched_trace, TraceKind::kTickBegin, nullptr, kSchedulerContext, static_cast<std::int64_t>(k), begin);
    std::vector<Release> releases;
    {
      std::lock_guard lk(tracker_m);
      releases = tracker->collect_time_releases(begin, options.release_horizon);
    }
    publish(create(releases, begin));
    graph_step();
    const Nanos end = clock.now();
    record(sched_trace, TraceKind::kTickEnd, nullptr, kSchedulerContext, end - begin, end);
    if (end - planned > tick) {
      record(sched_trace, TraceKind::kOverrun, nullptr, kSchedulerContext, end - planned - tick, end);
      k = static_cast<std::uint64_t>(end / tick);
    }
    ++k;
  }

  // Drain: keep serving data activations until every released job is done.
  for (;;) {
    if (graph_pending.load()) {
      graph_step();
      continue;
    }
    if (outstanding.load() == 0 && !graph_pending.load()) break;
    std::unique_lock lk(sched_m);
    sched_cv.wait_for(lk, std::chrono::milliseconds(1), [&] { return graph_pending.load(); });
  }
  shutdown.store(true);
  for (std::size_t w = 0; w < workers.size(); ++w) notify_worker(w);
}

RealtimeEngine::RealtimeEngine(const Middleware& middleware, const RealtimeOptions& options)
    : impl_(std::make_unique<Impl>(middleware, options)) {}

RealtimeEngine::~RealtimeEngine() {
  try {
    stop();
    join();
  } catch (...) {
  }
}

void RealtimeEngine::start() {
  Impl& e = *impl_;
  HostProbe probe = probe_host();
  e.cpus = probe.cpus;
  for (auto& w : probe.warnings) e.warn(std::move(w));
  const unsigned need = required_processors(e.config.worker_count, e.config.online());
  const bool oversubscribed = e.cpus.size() < need;
  if (oversubscribed && !e.options.allow_oversubscription) {
    throw ConfigError("host offers " + std::to_string(e.cpus.size()) + " processors; " + std::to_string(need) +
                      " required (" + std::to_string(e.config.worker_count) + " workers" +
                      (e.config.online() ? " + scheduler)" : ")"));
  }
  if (oversubscribed) e.warn("oversubscribed host: contexts share processors and run without real-time priority");
  e.realtime_priority = e.options.realtime_priority && !oversubscribed;
  if (e.options.lock_memory) {
    if (mlockall(MCL_CURRENT | MCL_FUTURE) == 0) {
      e.locked_memory = true;
    } else {
      e.warn("memory locking denied by the host");
    }
  }
  e.clock.restart();
  e.tracker.emplace(e.tasks, e.config);
  e.started = true;
  for (std::uint32_t w = 0; w < e.config.worker_count; ++w) {
    const auto idx = static_cast<WorkerIndex>(w);
    e.workers[w]->thread = e.config.online() ? std::thread([&e, idx] { e.worker_main(idx); })
                                             : std::thread([&e, idx] { e.offline_main(idx); });
  }
  if (e.config.online()) e.sched_thread = std::thread([&e] { e.scheduler_main(); });
}

void RealtimeEngine::activate(TaskId task) {
  Impl& e = *impl_;
  if (e.stopping.load()) throw PhaseError("task_activate() after stop()");
  const Nanos now = e.clock.now();
  Nanos at = 0;
  {
    std::lock_guard lk(e.tracker_m);
    at = e.tracker->activate(task, now);
  }
  if (at > now) {
    e.warn("sporadic task '" + e.tasks.task(task).name + "' activated early; release delayed to " + format_duration(at));
  }
}

void RealtimeEngine::stop() {
  Impl& e = *impl_;
  if (!e.started || e.stopping.load()) return;
  e.stop_time.store(e.clock.now());
  e.stopping.store(true);
  std::lock_guard lk(e.sched_m);
  e.sched_cv.notify_all();
}

bool RealtimeEngine::joined() const { return impl_->joined || !impl_->started; }

void RealtimeEngine::join() {
  Impl& e = *impl_;
  if (!e.started || e.joined) return;
  stop();
  if (e.sched_thread.joinable()) e.sched_thread.join();
  if (!e.config.online()) e.shutdown.store(true);
  for (auto& w : e.workers) {
    if (w->thread.joinable()) w->thread.join();
  }
  if (e.locked_memory) munlockall();
  Trace t;
  t.task_names.reserve(e.tasks.tasks.size());
  for (const auto& task : e.tasks.tasks) t.task_names.push_back(task.name);
  t.events = std::move(e.sched_trace);
  for (auto& w : e.workers) t.events.insert(t.events.end(), w->trace.begin(), w->trace.end());
  t.end_time = e.clock.now();
  t.finalize();
  e.merged = std::move(t);
  e.joined = true;
}

const Trace& RealtimeEngine::trace() const {
  if (!impl_->joined) throw PhaseError("trace requested before the schedule drained");
  return impl_->merged;
}

std::vector<std::string> RealtimeEngine::warnings() const {
  std::lock_guard lk(impl_->warn_m);
  return impl_->warns;
}

RealtimeResult run_realtime(Middleware& middleware, Nanos duration, RealtimeOptions options) {
  if (duration <= 0) throw UsageError("run duration must be positive");
  MonotonicClock wait(middleware.config().waiting_strategy);
  middleware.start(options);
  wait.restart();
  wait.wait_until(duration);
  middleware.stop();
  RealtimeResult result;
  result.trace = middleware.collect_trace();
  middleware.cleanup();
  result.report = build_report(result.trace);
  result.report.policy = policy_label(middleware.config());
  result.report.horizon = duration;
  result.report.warnings = middleware.runtime_warnings();
  return result;
}

}  // namespace rtmw
