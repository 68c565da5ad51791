#include "rtmw/simulator.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <queue>
#include <random>
#include <unordered_map>

#include "rtmw/error.hpp"
#include "rtmw/middleware.hpp"
#include "rtmw/scheduler.hpp"

namespace rtmw {
namespace {

// Equal-time events run internal (job, worker, lock) first, then external
// inputs, then scheduler ticks; FIFO within a class.
enum EventClass : int { kInternal = 0, kExternal = 1, kTickClass = 2 };

struct Event {
  Nanos t;
  int cls;
  std::uint64_t seq;
  std::function<void()> fn;
};

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    return std::tie(a.t, a.cls, a.seq) > std::tie(b.t, b.cls, b.seq);
  }
};

Nanos draw_exec(const VersionDescriptor& v, const SimJobModel& model, std::mt19937_64& rng) {
  if (const auto* m = model.version(v.version_id)) {
    if (m->exec) return *m->exec;
    if (m->exec_range) {
      auto [lo, hi] = *m->exec_range;
      return lo + static_cast<Nanos>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
    }
  }
  return v.wcet_estimate;
}

void validate_model(const TaskSet& tasks, const SimJobModel& model) {
  auto fail = [](const std::string& msg) { throw ConfigError("sim model: " + msg); };
  if (model.get_task_cost < 0 || model.sched_scan_cost_per_task < 0 || model.sort_cost_per_element < 0 ||
      model.context_switch_cost < 0) {
    fail("costs must be non-negative");
  }
  if (model.versions.size() > tasks.versions.size()) fail("entries for undeclared versions");
  for (std::size_t i = 0; i < model.versions.size(); ++i) {
    const auto& m = model.versions[i];
    const auto& v = tasks.versions[i];
    const std::string who = "version '" + tasks.task(v.task_id).name + "/" + v.name + "'";
    if (m.exec && *m.exec <= 0) fail(who + ": exec must be positive");
    if (m.exec_range && (m.exec_range->first <= 0 || m.exec_range->first > m.exec_range->second)) {
      fail(who + ": exec range must satisfy 0 < min <= max");
    }
    if (m.channel_ops) {
      for (const auto& op : *m.channel_ops) {
        if (!op.channel.valid() || op.channel.index() >= tasks.channels.size()) fail(who + ": unknown channel");
        const auto& c = tasks.channel(op.channel);
        if (!c.connected()) fail(who + ": channel '" + c.name + "' is not connected");
        const TaskId owner = op.kind == SimChannelOp::Kind::kPush ? c.src_task : c.dst_task;
        if (owner != v.task_id) {
          fail(who + ": cannot " + (op.kind == SimChannelOp::Kind::kPush ? "push to" : "pop from") + " channel '" +
               c.name + "'");
        }
        if (op.at < 0 || op.count < 1) fail(who + ": channel op needs at >= 0 and count >= 1");
      }
    }
  }
  for (const auto& a : model.activations) {
    if (!a.task.valid() || a.task.index() >= tasks.tasks.size()) fail("activation of an unknown task");
    const auto kind = tasks.task(a.task).kind;
    if (kind != TaskKind::kSporadic && kind != TaskKind::kAperiodic) {
      fail("task '" + tasks.task(a.task).name + "' is not sporadic or aperiodic and cannot be activated");
    }
    if (a.at < 0) fail("activation before time 0");
  }
  for (const auto& m : model.mode_changes) {
    if (m.at < 0) fail("mode change before time 0");
  }
}

struct SimJob {
  Job job;
  bool started = false;
  bool completed = false;
  Nanos exec_total = 0;
  Nanos progress = 0;
  Nanos exec_begin = 0;
  bool executing = false;
  bool paused = false;
  std::uint64_t gen = 0;
  std::vector<SimChannelOp> ops;
  std::size_t next_op = 0;
  std::uint32_t op_done = 0;
  std::optional<ChannelId> blocked_on;
  WorkerIndex worker = kSchedulerContext;
};

struct SimChannel {
  std::size_t occupancy = 0;
  std::size_t capacity = 1;
  std::size_t reserved = 0;
  std::vector<SimJob*> blocked;
};

struct Worker {
  SimJob* current = nullptr;
  std::vector<SimJob*> preempted;
  bool in_lock = false;
};

struct VirtualLock {
  struct Request {
    WorkerIndex actor;
    Nanos at;
    std::function<void()> on_grant;
  };
  bool held = false;
  std::deque<Request> waiting;
};

class Engine {
 public:
  Engine(const Middleware& mw, const SimJobModel& model, const SimOptions& options, Nanos horizon)
      : config_(mw.config()),
        tasks_(mw.task_set()),
        model_(model),
        horizon_(horizon),
        rng_(options.seed),
        selection_(mw.selection_context()) {
    trace_.task_names.reserve(tasks_.tasks.size());
    for (const auto& t : tasks_.tasks) trace_.task_names.push_back(t.name);
  }

  Trace run_online();
  Trace run_offline(const ScheduleTable& table);
  std::vector<std::string> warnings;

 private:
  // --- infrastructure ---
  void at(Nanos t, int cls, std::function<void()> fn) { events_.push({t, cls, seq_++, std::move(fn)}); }
  void emit(TraceKind kind, const Job* job, WorkerIndex worker, std::int64_t payload, std::optional<Nanos> when = {}) {
    TraceEvent e;
    e.timestamp = when.value_or(now_);
    e.kind = kind;
    if (job) {
      e.task = static_cast<std::int32_t>(job->task.value);
      e.job_seq = static_cast<std::int64_t>(job->seq);
    }
    e.worker = worker;
    e.payload = payload;
    trace_.add(e);
  }
  void acquire(std::size_t q, WorkerIndex actor, std::function<void()> on_grant);
  void release(std::size_t q);
  std::size_t queue_of(WorkerIndex w) const {
    return config_.mapping_scheme == MappingScheme::kGlobal ? 0 : static_cast<std::size_t>(w);
  }
  SimJob* sim_of(Job* j) { return by_job_.at(j); }

  // --- scheduler context ---
  struct Step {
    enum class Kind { kTick, kGraph } kind;
    Nanos planned;
  };
  void on_tick(std::uint64_t k);
  void schedule_tick_after(Nanos t);
  void request_graph_step();
  void pump_scheduler();
  void run_step(const Step& step);
  using Groups = std::map<std::size_t, std::vector<SimJob*>>;
  void insert_and_publish(std::vector<SimJob*> jobs, std::function<void()> done);
  void publish_from(std::shared_ptr<Groups> groups, Groups::iterator it, std::function<void()> done);
  void step_done();
  std::vector<SimJob*> create_jobs(const std::vector<Release>& releases);
  std::vector<Release> collect_graph(Nanos at);
  void notify_all();

  // --- workers ---
  struct Decision {
    enum class Kind { kIdle, kKeep, kNew, kResume } kind = Kind::kIdle;
    SimJob* next = nullptr;
  };
  void notify_preempt(WorkerIndex w);
  void get_task(WorkerIndex w);
  Decision decide(WorkerIndex w);
  void apply(WorkerIndex w, Decision d);
  void first_start(SimJob* sj, WorkerIndex w);

  // --- job bodies ---
  void run_job(SimJob* sj, Nanos when);
  void pause(SimJob* sj);
  void process_point(SimJob* sj);
  bool perform(SimJob* sj, const SimChannelOp& op);
  void wake_blocked(ChannelId c);
  void complete(SimJob* sj);

  const PolicyConfig& config_;
  const TaskSet& tasks_;
  const SimJobModel& model_;
  Nanos horizon_;
  std::mt19937_64 rng_;
  SelectionContext selection_;

  Trace trace_;
  Nanos now_ = 0;
  std::uint64_t seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, EventAfter> events_;

  std::optional<ReleaseTracker> tracker_;
  AcceleratorRegistry registry_;
  std::vector<ReadyQueue> queues_;
  std::vector<VirtualLock> locks_;
  std::vector<Worker> workers_;
  std::vector<SimChannel> channels_;
  std::deque<SimJob> jobs_;
  std::unordered_map<const Job*, SimJob*> by_job_;

  Nanos tick_ = 0;
  std::optional<std::uint64_t> next_tick_;
  std::deque<Step> steps_;
  bool sched_busy_ = false;
  bool graph_step_queued_ = false;
  Nanos step_begin_ = 0;
};

void Engine::acquire(std::size_t q, WorkerIndex actor, std::function<void()> on_grant) {
  VirtualLock& l = locks_[q];
  if (!l.held) {
    l.held = true;
    emit(TraceKind::kLockWait, nullptr, actor, 0);
    on_grant();
    return;
  }
  l.waiting.push_back({actor, now_, std::move(on_grant)});
}

void Engine::release(std::size_t q) {
  VirtualLock& l = locks_[q];
  if (l.waiting.empty()) {
    l.held = false;
    return;
  }
  auto r = std::move(l.waiting.front());
  l.waiting.pop_front();
  emit(TraceKind::kLockWait, nullptr, r.actor, now_ - r.at);
  r.on_grant();
}

Trace Engine::run_online() {
  tracker_.emplace(tasks_, config_);
  registry_ = AcceleratorRegistry(tasks_.accelerators.size());
  queues_.assign(queue_count(config_), ReadyQueue{});
  locks_.assign(queues_.size(), VirtualLock{});
  workers_.assign(config_.worker_count, Worker{});
  channels_.resize(tasks_.channels.size());
  for (const auto& c : tasks_.channels) channels_[c.channel_id.index()].capacity = c.token_capacity();
  tick_ = scheduler_tick_period(tasks_);

  for (const auto& m : model_.mode_changes) {
    at(m.at, kExternal, [this, m] {
      if (m.execution_mode) selection_.execution_mode = *m.execution_mode;
      if (m.permission_mask) selection_.permission_mask = *m.permission_mask;
    });
  }
  for (const auto& a : model_.activations) {
    at(a.at, kExternal, [this, a] {
      Nanos release = tracker_->activate(a.task, now_);
      if (release > now_) {
        warnings.push_back("sporadic task '" + tasks_.task(a.task).name + "' activated at " + format_duration(now_) +
                           " released at " + format_duration(release) + " (minimum inter-arrival)");
      }
      schedule_tick_after(now_);
    });
  }
  next_tick_ = 0;
  at(0, kTickClass, [this] { on_tick(0); });

  while (!events_.empty()) {
    Event e = events_.top();
    events_.pop();
    now_ = e.t;
    e.fn();
  }

  Nanos end = std::max(horizon_, now_);
  for (auto& sj : jobs_) {
    if (sj.completed) continue;
    Nanos when = std::max(end, sj.job.abs_deadline);
    emit(TraceKind::kDeadlineMiss, &sj.job, sj.worker, when - sj.job.abs_deadline, when);
    end = std::max(end, when);
  }
  trace_.end_time = end;
  trace_.finalize();
  return std::move(trace_);
}

void Engine::schedule_tick_after(Nanos t) {
  if (next_tick_) return;
  std::uint64_t k = static_cast<std::uint64_t>((t + tick_ - 1) / tick_);
  next_tick_ = k;
  at(static_cast<Nanos>(k) * tick_, kTickClass, [this, k] { on_tick(k); });
}

void Engine::on_tick(std::uint64_t k) {
  next_tick_.reset();
  const Nanos next = static_cast<Nanos>(k + 1) * tick_;
  if (next < horizon_ || tracker_->has_pending_activations()) {
    next_tick_ = k + 1;
    at(next, kTickClass, [this, k] { on_tick(k + 1); });
  }
  steps_.push_back({Step::Kind::kTick, now_});
  pump_scheduler();
}

void Engine::request_graph_step() {
  if (graph_step_queued_) return;
  graph_step_queued_ = true;
  steps_.push_back({Step::Kind::kGraph, now_});
  pump_scheduler();
}

void Engine::pump_scheduler() {
  if (sched_busy_ || steps_.empty()) return;
  Step step = steps_.front();
  steps_.pop_front();
  sched_busy_ = true;
  run_step(step);
}

void Engine::step_done() {
  sched_busy_ = false;
  pump_scheduler();
}

std::vector<Release> Engine::collect_graph(Nanos when) {
  return tracker_->collect_graph_releases(
      when,
      [this](ChannelId c) {
        const SimChannel& ch = channels_[c.index()];
        return ch.occupancy > ch.reserved ? ch.occupancy - ch.reserved : std::size_t{0};
      },
      [this](ChannelId c, std::size_t n) { channels_[c.index()].reserved += n; });
}

std::vector<SimJob*> Engine::create_jobs(const std::vector<Release>& releases) {
  std::vector<SimJob*> out;
  selection_.now = now_;
  for (const Release& r : releases) {
    SimJob& sj = jobs_.emplace_back();
    sj.job = make_job(r, config_, tasks_, selection_, &registry_);
    by_job_[&sj.job] = &sj;
    emit(TraceKind::kReleaseTheoretical, &sj.job, kSchedulerContext, sj.job.abs_deadline, sj.job.abs_release);
    out.push_back(&sj);
  }
  return out;
}

void Engine::run_step(const Step& step) {
  if (step.kind == Step::Kind::kGraph) {
    graph_step_queued_ = false;
    auto jobs = create_jobs(collect_graph(step.planned));
    if (jobs.empty()) {
      step_done();
      return;
    }
    insert_and_publish(std::move(jobs), [this] { step_done(); });
    return;
  }

  step_begin_ = now_;
  emit(TraceKind::kTickBegin, nullptr, kSchedulerContext, step.planned / tick_);
  auto releases = tracker_->collect_time_releases(now_, horizon_);
  auto graph = collect_graph(now_);
  releases.insert(releases.end(), graph.begin(), graph.end());
  auto jobs = create_jobs(releases);
  const Nanos planned = step.planned;
  auto finish = [this, planned] {
    emit(TraceKind::kTickEnd, nullptr, kSchedulerContext, now_ - step_begin_);
    if (now_ - planned > tick_) emit(TraceKind::kOverrun, nullptr, kSchedulerContext, now_ - planned - tick_);
    step_done();
  };
  const Nanos scan = model_.sched_scan_cost_per_task * static_cast<Nanos>(tasks_.tasks.size());

  if (config_.mapping_scheme == MappingScheme::kGlobal) {
    // Scan, insertion and sort all happen under the shared queue lock.
    acquire(0, kSchedulerContext, [this, jobs, scan, finish] {
      for (SimJob* sj : jobs) queues_[0].insert(&sj->job);
      queues_[0].sort();
      const Nanos cs = scan + model_.sort_cost_per_element * static_cast<Nanos>(queues_[0].size());
      at(now_ + cs, kInternal, [this, jobs, finish] {
        for (SimJob* sj : jobs) emit(TraceKind::kReleaseEffective, &sj->job, kSchedulerContext, now_ - sj->job.abs_release);
        release(0);
        notify_all();
        finish();
      });
    });
    return;
  }

  // Partitioned: the task scan needs no lock; each touched queue is locked,
  // filled and sorted in index order.
  at(now_ + scan, kInternal, [this, jobs, finish] { insert_and_publish(jobs, finish); });
}

void Engine::insert_and_publish(std::vector<SimJob*> jobs, std::function<void()> done) {
  auto groups = std::make_shared<Groups>();
  for (SimJob* sj : jobs) (*groups)[route(config_, tasks_, sj->job.task)].push_back(sj);
  publish_from(groups, groups->begin(), std::move(done));
}

void Engine::publish_from(std::shared_ptr<Groups> groups, Groups::iterator it, std::function<void()> done) {
  if (it == groups->end()) {
    done();
    return;
  }
  const std::size_t q = it->first;
  acquire(q, kSchedulerContext, [this, groups, it, q, done] {
    for (SimJob* sj : it->second) queues_[q].insert(&sj->job);
    queues_[q].sort();
    const Nanos cs = model_.sort_cost_per_element * static_cast<Nanos>(queues_[q].size());
    at(now_ + cs, kInternal, [this, groups, it, q, done] {
      for (SimJob* sj : it->second) {
        emit(TraceKind::kReleaseEffective, &sj->job, kSchedulerContext, now_ - sj->job.abs_release);
      }
      release(q);
      notify_all();
      publish_from(groups, std::next(it), done);
    });
  });
}

void Engine::notify_all() {
  std::vector<std::size_t> available(queues_.size());
  for (std::size_t q = 0; q < queues_.size(); ++q) available[q] = queues_[q].size();
  for (std::size_t w = 0; w < workers_.size(); ++w) {
    Worker& wk = workers_[w];
    if (wk.current || wk.in_lock) continue;
    std::size_t q = queue_of(static_cast<WorkerIndex>(w));
    if (available[q] == 0) continue;
    --available[q];
    get_task(static_cast<WorkerIndex>(w));
  }
  if (!config_.preemptive) return;
  std::vector<std::optional<PriorityKey>> running(workers_.size());
  for (std::size_t w = 0; w < workers_.size(); ++w) {
    const Worker& wk = workers_[w];
    if (wk.current && !wk.in_lock) running[w] = wk.current->job.effective_key();
  }
  for (WorkerIndex w : preemption_targets(config_, queues_, running)) notify_preempt(w);
}

void Engine::notify_preempt(WorkerIndex w) {
  Worker& wk = workers_[static_cast<std::size_t>(w)];
  if (wk.in_lock) return;
  if (wk.current) pause(wk.current);
  get_task(w);
}

void Engine::get_task(WorkerIndex w) {
  Worker& wk = workers_[static_cast<std::size_t>(w)];
  wk.in_lock = true;
  const std::size_t q = queue_of(w);
  acquire(q, w, [this, w, q] {
    Decision d = decide(w);
    emit(TraceKind::kGetTask, nullptr, w, model_.get_task_cost);
    at(now_ + model_.get_task_cost, kInternal, [this, w, q, d] {
      workers_[static_cast<std::size_t>(w)].in_lock = false;
      apply(w, d);
      release(q);
    });
  });
}

Engine::Decision Engine::decide(WorkerIndex w) {
  Worker& wk = workers_[static_cast<std::size_t>(w)];
  ReadyQueue& queue = queues_[queue_of(w)];
  for (;;) {
    Job* head = queue.head();
    Job* pbest_job = nullptr;
    {
      std::vector<Job*> pj;
      for (SimJob* p : wk.preempted) pj.push_back(&p->job);
      pbest_job = best_preempted(pj);
    }
    const Job* cur = wk.current ? &wk.current->job : nullptr;
    const Job* best = cur;
    for (const Job* cand : {static_cast<const Job*>(pbest_job), static_cast<const Job*>(head)}) {
      if (cand && (!best || cand->effective_key().higher_than(best->effective_key()))) best = cand;
    }
    if (!best) return {};
    if (best == cur) return {Decision::Kind::kKeep, wk.current};
    if (best == pbest_job) return {Decision::Kind::kResume, sim_of(pbest_job)};

    SimJob* sj = sim_of(queue.pop_head());
    const auto& accels = tasks_.version(sj->job.version).accelerators;
    if (std::any_of(accels.begin(), accels.end(), [&](AccelId a) { return registry_.busy(a); })) {
      selection_.now = now_;
      sj->job.version =
          choose_version(tasks_, sj->job.task, selection_, config_.version_selection, &registry_);
    }
    const auto& chosen = tasks_.version(sj->job.version).accelerators;
    auto outcome = registry_.acquire(sj->job, chosen, config_.priority_inheritance);
    if (outcome.acquired) return {Decision::Kind::kNew, sj};

    AccelId busy = *std::find_if(chosen.begin(), chosen.end(), [&](AccelId a) { return registry_.holder(a) == outcome.holder; });
    emit(TraceKind::kAccelBlocked, &sj->job, w, busy.value);
    if (outcome.inherited) {
      SimJob* holder = sim_of(outcome.holder);
      emit(TraceKind::kInherit, &holder->job, holder->worker, sj->job.task.value);
      if (holder->worker != w && holder->worker != kSchedulerContext && config_.preemptive) {
        Worker& hw = workers_[static_cast<std::size_t>(holder->worker)];
        if (std::find(hw.preempted.begin(), hw.preempted.end(), holder) != hw.preempted.end()) {
          notify_preempt(holder->worker);
        }
      }
    }
  }
}

void Engine::apply(WorkerIndex w, Decision d) {
  Worker& wk = workers_[static_cast<std::size_t>(w)];
  switch (d.kind) {
    case Decision::Kind::kIdle:
      return;
    case Decision::Kind::kKeep:
      run_job(wk.current, now_);
      return;
    case Decision::Kind::kNew:
    case Decision::Kind::kResume:
      break;
  }
  Nanos begin = now_;
  if (wk.current) {
    SimJob* old = wk.current;
    old->job.state = JobState::kPreempted;
    wk.preempted.push_back(old);
    emit(TraceKind::kPreempt, &old->job, w, model_.context_switch_cost);
    begin += model_.context_switch_cost;
    wk.current = nullptr;
  }
  SimJob* next = d.next;
  if (d.kind == Decision::Kind::kResume) {
    wk.preempted.erase(std::find(wk.preempted.begin(), wk.preempted.end(), next));
    emit(TraceKind::kResume, &next->job, w, model_.context_switch_cost);
    begin += model_.context_switch_cost;
  } else {
    first_start(next, w);
  }
  next->job.state = JobState::kRunning;
  wk.current = next;
  run_job(next, begin);
}

void Engine::first_start(SimJob* sj, WorkerIndex w) {
  sj->started = true;
  sj->worker = w;
  sj->job.worker = w;
  const VersionDescriptor& v = tasks_.version(sj->job.version);
  for (AccelId a : v.accelerators) emit(TraceKind::kAccelAcquire, &sj->job, w, a.value);
  emit(TraceKind::kJobStart, &sj->job, w, sj->job.version.value);
  sj->exec_total = draw_exec(v, model_, rng_);
  const VersionSimModel* m = model_.version(v.version_id);
  if (m && m->channel_ops) {
    sj->ops = *m->channel_ops;
  } else {
    for (ChannelId c : tasks_.inputs(sj->job.task)) {
      sj->ops.push_back({SimChannelOp::Kind::kPop, c, 0, tasks_.channel(c).required_tokens});
    }
    for (ChannelId c : tasks_.outputs(sj->job.task)) {
      sj->ops.push_back({SimChannelOp::Kind::kPush, c, sj->exec_total, tasks_.channel(c).produce});
    }
  }
  for (auto& op : sj->ops) op.at = std::min(op.at, sj->exec_total);
  std::stable_sort(sj->ops.begin(), sj->ops.end(), [](const SimChannelOp& a, const SimChannelOp& b) { return a.at < b.at; });
}

void Engine::run_job(SimJob* sj, Nanos when) {
  sj->paused = false;
  const std::uint64_t g = ++sj->gen;
  at(when, kInternal, [this, sj, g] {
    if (g != sj->gen) return;
    sj->executing = true;
    sj->exec_begin = now_;
    process_point(sj);
  });
}

void Engine::pause(SimJob* sj) {
  if (sj->executing) {
    sj->progress += std::max<Nanos>(0, now_ - sj->exec_begin);
    sj->executing = false;
  }
  sj->paused = true;
  ++sj->gen;
}

void Engine::process_point(SimJob* sj) {
  while (sj->next_op < sj->ops.size() && sj->ops[sj->next_op].at <= sj->progress) {
    if (!perform(sj, sj->ops[sj->next_op])) {
      sj->executing = false;
      return;
    }
    ++sj->next_op;
    sj->op_done = 0;
  }
  if (sj->progress >= sj->exec_total) {
    complete(sj);
    return;
  }
  const Nanos point = sj->next_op < sj->ops.size() ? sj->ops[sj->next_op].at : sj->exec_total;
  const std::uint64_t g = sj->gen;
  at(now_ + (point - sj->progress), kInternal, [this, sj, g, point] {
    if (g != sj->gen) return;
    sj->progress = point;
    sj->exec_begin = now_;
    process_point(sj);
  });
}

bool Engine::perform(SimJob* sj, const SimChannelOp& op) {
  SimChannel& ch = channels_[op.channel.index()];
  const ChannelDescriptor& desc = tasks_.channel(op.channel);
  while (sj->op_done < op.count) {
    if (op.kind == SimChannelOp::Kind::kPush) {
      if (ch.occupancy >= ch.capacity) break;
      ++ch.occupancy;
      emit(TraceKind::kChannelPush, &sj->job, sj->worker, op.channel.value);
      ++sj->op_done;
      wake_blocked(op.channel);
      if (tasks_.data_activated(desc.dst_task)) request_graph_step();
    } else {
      if (ch.occupancy == 0) break;
      --ch.occupancy;
      if (ch.reserved > 0 && tasks_.data_activated(desc.dst_task)) --ch.reserved;
      emit(TraceKind::kChannelPop, &sj->job, sj->worker, op.channel.value);
      ++sj->op_done;
      wake_blocked(op.channel);
    }
  }
  if (sj->op_done < op.count) {
    sj->blocked_on = op.channel;
    if (std::find(ch.blocked.begin(), ch.blocked.end(), sj) == ch.blocked.end()) ch.blocked.push_back(sj);
    return false;
  }
  sj->blocked_on.reset();
  return true;
}

void Engine::wake_blocked(ChannelId c) {
  auto& blocked = channels_[c.index()].blocked;
  for (auto it = blocked.begin(); it != blocked.end();) {
    SimJob* sj = *it;
    if (sj->blocked_on != c) {
      it = blocked.erase(it);
      continue;
    }
    if (sj->paused || sj->executing) {
      ++it;
      continue;
    }
    it = blocked.erase(it);
    run_job(sj, now_);
  }
}

void Engine::complete(SimJob* sj) {
  sj->executing = false;
  sj->completed = true;
  sj->job.state = JobState::kCompleted;
  const WorkerIndex w = sj->worker;
  if (registry_.holds_any(sj->job)) {
    for (AccelId a : tasks_.version(sj->job.version).accelerators) emit(TraceKind::kAccelRelease, &sj->job, w, a.value);
  }
  std::vector<Job*> woken = registry_.release(sj->job);
  emit(TraceKind::kJobComplete, &sj->job, w, now_ - sj->job.abs_release);
  if (now_ > sj->job.abs_deadline) emit(TraceKind::kDeadlineMiss, &sj->job, w, now_ - sj->job.abs_deadline);

  for (Job* j : woken) {
    auto& q = queues_[route(config_, tasks_, j->task)];
    q.insert(j);
    q.sort();
  }
  workers_[static_cast<std::size_t>(w)].current = nullptr;
  get_task(w);
  if (!woken.empty()) notify_all();
}

Trace Engine::run_offline(const ScheduleTable& table) {
  std::vector<std::uint64_t> seqs(tasks_.tasks.size(), 0);
  bool channels_used = std::any_of(tasks_.channels.begin(), tasks_.channels.end(),
                                   [](const ChannelDescriptor& c) { return c.connected(); });
  if (channels_used) warnings.push_back("channel operations are not simulated under OFFLINE mapping");
  if (!model_.activations.empty()) warnings.push_back("activations are ignored under OFFLINE mapping");

  Nanos end = horizon_;
  for (std::size_t core = 0; core < table.rows.size(); ++core) {
    const auto& row = table.rows[core];
    if (row.empty()) continue;
    const WorkerIndex w = static_cast<WorkerIndex>(core);
    Nanos free_at = 0;
    for (std::uint64_t m = 0;; ++m) {
      bool stopped = false;
      for (const TableEntry& e : row) {
        const Nanos instant = static_cast<Nanos>(m) * table.table_period + e.release_offset;
        if (instant >= horizon_) {
          stopped = true;
          break;
        }
        Job job;
        job.task = e.task;
        job.seq = seqs[e.task.index()]++;
        job.version = e.version;
        job.abs_release = instant;
        job.abs_deadline = instant + tasks_.task(e.task).relative_deadline;
        const Nanos start = std::max(instant, free_at);
        emit(TraceKind::kReleaseTheoretical, &job, w, job.abs_deadline, instant);
        emit(TraceKind::kReleaseEffective, &job, w, 0, instant);
        if (start > instant) emit(TraceKind::kOverrun, &job, w, start - instant, start);
        emit(TraceKind::kJobStart, &job, w, job.version.value, start);
        const Nanos done = start + draw_exec(tasks_.version(e.version), model_, rng_);
        emit(TraceKind::kJobComplete, &job, w, done - instant, done);
        if (done > job.abs_deadline) emit(TraceKind::kDeadlineMiss, &job, w, done - job.abs_deadline, done);
        free_at = done;
        end = std::max(end, done);
      }
      if (stopped) break;
    }
  }
  trace_.end_time = end;
  trace_.finalize();
  return std::move(trace_);
}

}  // namespace

SimResult run_simulation(const Middleware& middleware, const SimJobModel& model, const SimOptions& options) {
  middleware.require_valid();
  const TaskSet& tasks = middleware.task_set();
  const PolicyConfig& config = middleware.config();
  validate_model(tasks, model);

  Nanos horizon = 0;
  if (options.horizon) {
    horizon = *options.horizon;
  } else if (!config.online()) {
    horizon = middleware.schedule_table()->table_period;
  } else if (auto h = hyperperiod(tasks)) {
    horizon = *h;
  } else {
    throw ConfigError("hyperperiod overflows; an explicit horizon is required");
  }
  if (horizon <= 0) throw ConfigError("horizon must be positive");

  Engine engine(middleware, model, options, horizon);
  SimResult result;
  result.trace = config.online() ? engine.run_online() : engine.run_offline(*middleware.schedule_table());
  result.report = build_report(result.trace);
  result.report.policy = policy_label(config);
  result.report.horizon = horizon;
  result.report.seed = options.seed;
  result.report.warnings = std::move(engine.warnings);
  for (const auto& d : middleware.validate()) {
    if (!d.error()) result.report.warnings.push_back(d.message);
  }
  return result;
}

}  // namespace rtmw
