#include "rtmw/middleware.hpp"

#include <algorithm>

#include "realtime_engine.hpp"
#include "rtmw/error.hpp"

namespace rtmw {
namespace {

constexpr std::string_view kVariantNames[] = {"none", "energy", "energy_time", "mode", "bitmask", "user"};

}  // namespace

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::kCreated:
      return "created";
    case Phase::kInitialized:
      return "initialized";
    case Phase::kRunning:
      return "running";
    case Phase::kStopped:
      return "stopped";
    case Phase::kCleaned:
      return "cleaned";
  }
  return "?";
}

Middleware::Middleware() = default;

Middleware::~Middleware() {
  if (engine_) {
    try {
      engine_->stop();
      engine_->join();
    } catch (...) {
    }
  }
}

void Middleware::init(const PolicyConfig& config) {
  if (phase_ != Phase::kCreated) throw PhaseError("init() requires phase created, not " + std::string(to_string(phase_)));
  config.validate();
  config_ = config;
  tasks_ = TaskSet{};
  selection_ = SelectionContext{};
  table_.reset();
  phase_ = Phase::kInitialized;
}

void Middleware::require_declaration_phase(const char* op) {
  if (phase_ != Phase::kInitialized && phase_ != Phase::kStopped) {
    throw PhaseError(std::string(op) + "() is only legal while initialized or stopped, not " +
                     std::string(to_string(phase_)));
  }
  // A stopped schedule drains before the task set may change.
  if (engine_) engine_->join();
}

TaskDescriptor& Middleware::task_mut(TaskId id) {
  if (!id.valid() || id.index() >= tasks_.tasks.size()) throw UsageError("unknown task id " + std::to_string(id.value));
  return tasks_.tasks[id.index()];
}

TaskId Middleware::task_decl(TaskDescriptor data) {
  require_declaration_phase("task_decl");
  if (!valid_name(data.name)) throw UsageError("invalid task name '" + data.name + "'");
  if (tasks_.find_task(data.name)) throw UsageError("duplicate task name '" + data.name + "'");
  const std::string who = "task '" + data.name + "'";
  if (config_.mapping_scheme != MappingScheme::kGlobal && !data.virt_core_id) {
    throw ConfigError(who + ": virt_core_id is required under " + std::string(to_string(config_.mapping_scheme)));
  }
  if ((data.kind == TaskKind::kPeriodic || data.kind == TaskKind::kSporadic) && data.period <= 0) {
    throw ConfigError(who + ": period is required for " + std::string(to_string(data.kind)) + " tasks");
  }
  TaskId id(static_cast<std::uint32_t>(tasks_.tasks.size()));
  data.task_id = id;
  data.versions.clear();
  tasks_.tasks.push_back(std::move(data));
  return id;
}

VersionId Middleware::version_decl(TaskId task, JobBody entry, std::any static_args, VSelect props,
                                   VersionOptions options) {
  require_declaration_phase("version_decl");
  TaskDescriptor& t = task_mut(task);
  if (config_.version_selection != VersionSelection::kPreselected) {
    std::size_t want = vselect_index(config_.version_selection);
    if (props.index() != want) {
      throw ConfigError("task '" + t.name + "': " + std::string(to_string(config_.version_selection)) +
                        " selection expects '" + std::string(kVariantNames[want]) + "' properties, got '" +
                        std::string(kVariantNames[props.index()]) + "'");
    }
  }
  if (options.name.empty()) options.name = "v" + std::to_string(t.versions.size() + 1);
  if (!valid_name(options.name)) throw UsageError("invalid version name '" + options.name + "'");
  if (tasks_.find_version(task, options.name)) throw UsageError("duplicate version name '" + options.name + "'");
  VersionId id(static_cast<std::uint32_t>(tasks_.versions.size()));
  VersionDescriptor v;
  v.version_id = id;
  v.task_id = task;
  v.name = std::move(options.name);
  v.entry = std::move(entry);
  v.static_args = std::move(static_args);
  v.wcet_estimate = options.wcet_estimate;
  v.select_props = std::move(props);
  tasks_.versions.push_back(std::move(v));
  t.versions.push_back(id);
  return id;
}

AccelId Middleware::hwaccel_decl(std::string name) {
  require_declaration_phase("hwaccel_decl");
  if (!valid_name(name)) throw UsageError("invalid accelerator name '" + name + "'");
  if (tasks_.find_accelerator(name)) throw UsageError("duplicate accelerator name '" + name + "'");
  AccelId id(static_cast<std::uint32_t>(tasks_.accelerators.size()));
  tasks_.accelerators.push_back({id, std::move(name)});
  return id;
}

void Middleware::hwaccel_use(TaskId task, VersionId version, AccelId accel) {
  require_declaration_phase("hwaccel_use");
  const TaskDescriptor& t = task_mut(task);
  if (std::find(t.versions.begin(), t.versions.end(), version) == t.versions.end()) {
    throw UsageError("version " + std::to_string(version.value) + " does not belong to task '" + t.name + "'");
  }
  if (!accel.valid() || accel.index() >= tasks_.accelerators.size()) {
    throw UsageError("unknown accelerator id " + std::to_string(accel.value));
  }
  auto& set = tasks_.versions[version.index()].accelerators;
  auto it = std::lower_bound(set.begin(), set.end(), accel);
  if (it == set.end() || *it != accel) set.insert(it, accel);
}

ChannelId Middleware::channel_decl(std::size_t element_size, std::size_t capacity, std::string name) {
  require_declaration_phase("channel_decl");
  ChannelId id(static_cast<std::uint32_t>(tasks_.channels.size()));
  if (name.empty()) name = "ch" + std::to_string(id.value);
  if (!valid_name(name)) throw UsageError("invalid channel name '" + name + "'");
  if (tasks_.find_channel(name)) throw UsageError("duplicate channel name '" + name + "'");
  ChannelDescriptor c;
  c.channel_id = id;
  c.name = std::move(name);
  c.element_size = capacity == 0 ? 0 : element_size;
  c.capacity = capacity;
  tasks_.channels.push_back(std::move(c));
  return id;
}

void Middleware::channel_connect(TaskId src, TaskId dst, ChannelId channel, ConnectOptions options) {
  require_declaration_phase("channel_connect");
  task_mut(src);
  task_mut(dst);
  if (!channel.valid() || channel.index() >= tasks_.channels.size()) {
    throw UsageError("unknown channel id " + std::to_string(channel.value));
  }
  ChannelDescriptor& c = tasks_.channels[channel.index()];
  if (c.connected()) throw UsageError("channel '" + c.name + "' is already connected");
  if (src == dst) throw UsageError("channel '" + c.name + "' cannot connect a task to itself");
  if (options.produce < 1 || options.required_tokens < 1) {
    throw UsageError("channel '" + c.name + "': produce and required tokens must be at least 1");
  }
  c.src_task = src;
  c.dst_task = dst;
  c.produce = options.produce;
  c.required_tokens = options.required_tokens;
}

void Middleware::set_required_tokens(TaskId task, ChannelId channel, std::uint32_t tokens) {
  require_declaration_phase("set_required_tokens");
  task_mut(task);
  if (!channel.valid() || channel.index() >= tasks_.channels.size()) {
    throw UsageError("unknown channel id " + std::to_string(channel.value));
  }
  ChannelDescriptor& c = tasks_.channels[channel.index()];
  if (!c.connected() || c.dst_task != task) {
    throw UsageError("channel '" + c.name + "' is not an input of task " + std::to_string(task.value));
  }
  if (tokens < 1) throw UsageError("required tokens must be at least 1");
  c.required_tokens = tokens;
}

void Middleware::set_schedule_table(ScheduleTable table) {
  require_declaration_phase("set_schedule_table");
  table_ = std::move(table);
}

void Middleware::set_selection_context(SelectionContext ctx) {
  require_declaration_phase("set_selection_context");
  selection_ = std::move(ctx);
}

void Middleware::task_activate(TaskId task) {
  if (phase_ != Phase::kRunning) throw PhaseError("task_activate() requires phase running, not " + std::string(to_string(phase_)));
  if (!task.valid() || task.index() >= tasks_.tasks.size()) throw UsageError("unknown task id " + std::to_string(task.value));
  const TaskDescriptor& t = tasks_.task(task);
  if (t.kind != TaskKind::kSporadic && t.kind != TaskKind::kAperiodic) {
    throw UsageError("task '" + t.name + "' is " + std::string(to_string(t.kind)) +
                     "; only sporadic and aperiodic tasks can be activated");
  }
  engine_->activate(task);
}

std::vector<Diagnostic> Middleware::validate() const {
  if (phase_ == Phase::kCreated) throw PhaseError("validate() requires init()");
  auto out = tasks_.validate(config_);
  if (!config_.online()) {
    if (!table_) {
      out.push_back({Diagnostic::Severity::kError, "OFFLINE mapping requires a schedule table"});
    } else {
      auto more = validate_table(tasks_, config_, *table_);
      out.insert(out.end(), more.begin(), more.end());
    }
  } else if (table_) {
    out.push_back({Diagnostic::Severity::kWarning, "schedule table ignored under on-line mapping"});
  }
  return out;
}

void Middleware::require_valid() const {
  std::string msg;
  for (const auto& d : validate()) {
    if (d.error()) msg += (msg.empty() ? "" : "; ") + d.message;
  }
  if (!msg.empty()) throw ConfigError(msg);
}

void Middleware::start(const RealtimeOptions& options) {
  if (phase_ != Phase::kInitialized && phase_ != Phase::kStopped) {
    throw PhaseError("start() requires phase initialized or stopped, not " + std::string(to_string(phase_)));
  }
  if (engine_) {
    engine_->join();
    engine_.reset();
  }
  require_valid();
  auto engine = std::make_unique<RealtimeEngine>(*this, options);
  engine->start();
  engine_ = std::move(engine);
  phase_ = Phase::kRunning;
}

void Middleware::stop() {
  if (phase_ != Phase::kRunning) throw PhaseError("stop() requires phase running, not " + std::string(to_string(phase_)));
  engine_->stop();
  phase_ = Phase::kStopped;
}

void Middleware::cleanup() {
  if (phase_ != Phase::kStopped) throw PhaseError("cleanup() requires phase stopped, not " + std::string(to_string(phase_)));
  if (engine_) engine_->join();
  phase_ = Phase::kCleaned;
}

Trace Middleware::collect_trace() {
  if (phase_ != Phase::kStopped && phase_ != Phase::kCleaned) {
    throw PhaseError("collect_trace() requires a stopped schedule, not " + std::string(to_string(phase_)));
  }
  if (!engine_) throw PhaseError("collect_trace(): no schedule has run");
  engine_->join();
  return engine_->trace();
}

std::vector<std::string> Middleware::runtime_warnings() const {
  if (!engine_) return {};
  return engine_->warnings();
}

}  // namespace rtmw
