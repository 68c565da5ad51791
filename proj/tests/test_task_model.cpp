#include <gtest/gtest.h>

#include <algorithm>

#include "helpers.hpp"
#include "rtmw/error.hpp"
#include "rtmw/middleware.hpp"

using namespace rtmw;

namespace {

RealtimeOptions quiet_host() {
  RealtimeOptions o;
  o.pin_threads = false;
  o.lock_memory = false;
  o.realtime_priority = false;
  o.allow_oversubscription = true;
  return o;
}

bool has_message(const std::vector<Diagnostic>& diags, const std::string& part, bool error) {
  return std::any_of(diags.begin(), diags.end(),
                     [&](const Diagnostic& d) { return d.error() == error && d.message.find(part) != std::string::npos; });
}

}  // namespace

TEST(Middleware, InitGivesEmptyState) {
  Middleware mw;
  EXPECT_EQ(mw.phase(), Phase::kCreated);
  mw.init(th::global_edf(2));
  EXPECT_EQ(mw.phase(), Phase::kInitialized);
  EXPECT_TRUE(mw.task_set().tasks.empty());
  EXPECT_EQ(mw.config().worker_count, 2u);
}

TEST(Middleware, InitRejectsInconsistentConfig) {
  Middleware mw;
  PolicyConfig c;
  c.mapping_scheme = MappingScheme::kOffline;
  c.version_selection = VersionSelection::kPreselected;
  c.preemptive = true;
  EXPECT_THROW(mw.init(c), ConfigError);
  EXPECT_EQ(mw.phase(), Phase::kCreated);
}

TEST(Middleware, ListingOneShapeAccepted) {
  // GLOBAL, EDF, two workers; one periodic task, three data-driven ones,
  // four channels, at most two versions.
  Middleware mw;
  mw.init(th::global_edf(2));
  TaskId f = th::add_task(mw, {"fork", 250 * kMilli, kMilli});
  std::vector<TaskId> others;
  for (const char* n : {"left", "right", "join"}) {
    others.push_back(th::add_task(mw, {n, 0, kMilli, 250 * kMilli, 0, {}, TaskKind::kGraphNode}));
  }
  mw.version_decl(others[0], {}, {}, EnergySelect{12.0, {}}, {"v2", kMilli});
  ChannelId fl = mw.channel_decl(1, 0, "fl");
  ChannelId fr = mw.channel_decl(4, 1, "fr");
  ChannelId rj = mw.channel_decl(4, 2, "rj");
  ChannelId lj = mw.channel_decl(4, 1, "lj");
  mw.channel_connect(f, others[0], fl);
  mw.channel_connect(f, others[1], fr);
  mw.channel_connect(others[1], others[2], rj, {2, 2});
  mw.channel_connect(others[0], others[2], lj);
  EXPECT_NO_THROW(mw.require_valid());
  EXPECT_EQ(mw.task_set().channel(fl).capacity, 0u);
  EXPECT_TRUE(mw.task_set().channel(fl).token_only());
}

TEST(Middleware, IdsIncreaseInDeclarationOrder) {
  Middleware mw;
  mw.init(th::global_edf());
  TaskId prev;
  for (int i = 0; i < 5; ++i) {
    TaskId t = th::add_task(mw, {"t" + std::to_string(i), 10 * kMilli, kMilli});
    if (prev.valid()) {
      EXPECT_GT(t.value, prev.value);
    }
    prev = t;
  }
  const auto& v = mw.task_set().versions;
  for (std::size_t i = 1; i < v.size(); ++i) EXPECT_GT(v[i].version_id.value, v[i - 1].version_id.value);
}

TEST(Middleware, PartitionedRequiresVirtCore) {
  Middleware mw;
  mw.init(th::config(MappingScheme::kPartitioned, PriorityAssignment::kEDF, 2));
  TaskDescriptor d;
  d.name = "a";
  d.period = 10 * kMilli;
  d.relative_deadline = 10 * kMilli;
  try {
    mw.task_decl(d);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("virt_core_id"), std::string::npos);
  }
  d.virt_core_id = 1;
  EXPECT_NO_THROW(mw.task_decl(d));
}

TEST(Middleware, PeriodicNeedsPeriodGraphNodeDoesNot) {
  Middleware mw;
  mw.init(th::global_edf());
  TaskDescriptor d;
  d.name = "p";
  d.relative_deadline = kMilli;
  EXPECT_THROW(mw.task_decl(d), ConfigError);
  d.kind = TaskKind::kGraphNode;
  EXPECT_NO_THROW(mw.task_decl(d));
}

TEST(Middleware, NamesMustBeValidAndUnique) {
  Middleware mw;
  mw.init(th::global_edf());
  th::add_task(mw, {"a", kMilli, 1});
  EXPECT_THROW(th::add_task(mw, {"a", kMilli, 1}), UsageError);
  EXPECT_THROW(th::add_task(mw, {"has space", kMilli, 1}), UsageError);
  EXPECT_THROW(th::add_task(mw, {"", kMilli, 1}), UsageError);
}

TEST(Middleware, VersionVariantMustMatchMethod) {
  Middleware mw;
  mw.init(th::global_edf());
  TaskId t = th::add_task(mw, {"a", kMilli, 1});
  try {
    mw.version_decl(t, {}, {}, ModeSelect{1}, {});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("expects 'energy'"), std::string::npos);
  }
  EXPECT_THROW(mw.version_decl(TaskId(42), {}, {}, EnergySelect{}, {}), UsageError);
}

TEST(Middleware, ModeConfigAcceptsModeMask) {
  Middleware mw;
  PolicyConfig c = th::global_edf();
  c.version_selection = VersionSelection::kMode;
  mw.init(c);
  TaskDescriptor d;
  d.name = "encode";
  d.period = 500 * kMilli;
  d.relative_deadline = 500 * kMilli;
  TaskId t = mw.task_decl(d);
  constexpr ModeMask kSecure = 1u << 1;
  EXPECT_NO_THROW(mw.version_decl(t, {}, {}, ModeSelect{kSecure}, {"aes", kMilli}));
}

TEST(Middleware, ListingTwoEnergyVersions) {
  Middleware mw;
  mw.init(th::global_edf(2));
  TaskDescriptor d;
  d.name = "left";
  d.kind = TaskKind::kGraphNode;
  d.relative_deadline = 250;
  TaskId l = mw.task_decl(d);
  BatteryProbe battery = [] { return 8.0; };
  VersionId v1 = mw.version_decl(l, {}, {}, EnergySelect{5, battery}, {"", 1});
  VersionId v2 = mw.version_decl(l, {}, {}, EnergySelect{12, battery}, {"", 1});
  AccelId a = mw.hwaccel_decl("quantum_rand_num_generator");
  mw.hwaccel_use(l, v2, a);
  mw.hwaccel_use(l, v2, a);
  const auto& ts = mw.task_set();
  EXPECT_EQ(ts.task(l).versions, (std::vector<VersionId>{v1, v2}));
  EXPECT_EQ(ts.version(v1).name, "v1");
  EXPECT_EQ(ts.version(v2).accelerators, std::vector<AccelId>{a});
  EXPECT_TRUE(ts.version(v1).accelerators.empty());
}

TEST(Middleware, SharedAcceleratorRecordedOnBothTasks) {
  Middleware mw;
  mw.init(th::global_edf(2));
  TaskId a = th::add_task(mw, {"a", 100 * kMilli, kMilli});
  TaskId b = th::add_task(mw, {"b", 100 * kMilli, kMilli});
  AccelId gpu = mw.hwaccel_decl("gpu");
  mw.hwaccel_use(a, mw.task_set().task(a).versions[0], gpu);
  mw.hwaccel_use(b, mw.task_set().task(b).versions[0], gpu);
  EXPECT_EQ(mw.task_set().version(mw.task_set().task(a).versions[0]).accelerators.size(), 1u);
  EXPECT_EQ(mw.task_set().version(mw.task_set().task(b).versions[0]).accelerators.size(), 1u);
}

TEST(Middleware, HwaccelUseRejectsUnknownIds) {
  Middleware mw;
  mw.init(th::global_edf());
  TaskId a = th::add_task(mw, {"a", kMilli, 1});
  TaskId b = th::add_task(mw, {"b", kMilli, 1});
  AccelId gpu = mw.hwaccel_decl("gpu");
  VersionId vb = mw.task_set().task(b).versions[0];
  EXPECT_THROW(mw.hwaccel_use(a, vb, gpu), UsageError);
  EXPECT_THROW(mw.hwaccel_use(a, mw.task_set().task(a).versions[0], AccelId(7)), UsageError);
}

TEST(Middleware, ChannelConnectErrors) {
  Middleware mw;
  mw.init(th::global_edf());
  TaskId a = th::add_task(mw, {"a", kMilli, 1});
  TaskId b = th::add_task(mw, {"b", 0, 1, kMilli, 0, {}, TaskKind::kGraphNode});
  ChannelId c = mw.channel_decl(4, 1);
  EXPECT_EQ(mw.task_set().channel(c).name, "ch0");
  EXPECT_THROW(mw.channel_connect(a, TaskId(9), c), UsageError);
  EXPECT_THROW(mw.channel_connect(a, a, c), UsageError);
  mw.channel_connect(a, b, c);
  EXPECT_THROW(mw.channel_connect(a, b, c), UsageError);
  EXPECT_EQ(mw.task_set().channel(c).required_tokens, 1u);
  mw.set_required_tokens(b, c, 1);
  EXPECT_THROW(mw.set_required_tokens(a, c, 1), UsageError);
}

TEST(Middleware, ValidateReportsModelErrors) {
  Middleware mw;
  mw.init(th::global_edf());
  TaskDescriptor d;
  d.name = "empty";
  d.period = kMilli;
  d.relative_deadline = kMilli;
  mw.task_decl(d);
  auto diags = mw.validate();
  EXPECT_TRUE(has_message(diags, "no versions declared", true));
  EXPECT_THROW(mw.require_valid(), ConfigError);
}

TEST(Middleware, UserPriorityIgnoredUnderEdfIsWarning) {
  Middleware mw;
  mw.init(th::global_edf());
  TaskDescriptor d;
  d.name = "a";
  d.period = kMilli;
  d.relative_deadline = kMilli;
  d.user_priority = 3;
  TaskId t = mw.task_decl(d);
  mw.version_decl(t, {}, {}, EnergySelect{}, {"v1", 1});
  auto diags = mw.validate();
  EXPECT_TRUE(has_message(diags, "user_priority ignored", false));
  EXPECT_NO_THROW(mw.require_valid());
}

TEST(Middleware, UserAssignmentNeedsUserPriority) {
  Middleware mw;
  mw.init(th::config(MappingScheme::kGlobal, PriorityAssignment::kUser, 1));
  th::add_task(mw, {"a", kMilli, 1});
  EXPECT_TRUE(has_message(mw.validate(), "user_priority is required", true));
}

TEST(Middleware, CycleRejected) {
  Middleware mw;
  mw.init(th::global_edf());
  TaskId r = th::add_task(mw, {"root", kMilli, 1});
  TaskId a = th::add_task(mw, {"a", 0, 1, kMilli, 0, {}, TaskKind::kGraphNode});
  TaskId b = th::add_task(mw, {"b", 0, 1, kMilli, 0, {}, TaskKind::kGraphNode});
  mw.channel_connect(r, a, mw.channel_decl(4, 1));
  mw.channel_connect(a, b, mw.channel_decl(4, 1));
  mw.channel_connect(b, a, mw.channel_decl(4, 1));
  EXPECT_TRUE(has_message(mw.validate(), "cycle", true));
}

TEST(Middleware, RequiredTokensBeyondCapacityRejected) {
  Middleware mw;
  mw.init(th::global_edf());
  TaskId r = th::add_task(mw, {"root", kMilli, 1});
  TaskId a = th::add_task(mw, {"a", 0, 1, kMilli, 0, {}, TaskKind::kGraphNode});
  mw.channel_connect(r, a, mw.channel_decl(4, 1), {1, 2});
  EXPECT_TRUE(has_message(mw.validate(), "exceed capacity", true));
}

TEST(Middleware, OnlineNeedsRecurringTask) {
  Middleware mw;
  mw.init(th::global_edf());
  th::add_task(mw, {"a", 0, 1, kMilli, 0, {}, TaskKind::kAperiodic});
  EXPECT_TRUE(has_message(mw.validate(), "recurring", true));
}

TEST(Middleware, PhaseMachineRejectsIllegalTransitions) {
  Middleware mw;
  EXPECT_THROW(mw.start(quiet_host()), PhaseError);
  EXPECT_THROW(mw.stop(), PhaseError);
  EXPECT_THROW(mw.cleanup(), PhaseError);
  EXPECT_THROW(mw.validate(), PhaseError);
  EXPECT_THROW(th::add_task(mw, {"a", kMilli, 1}), PhaseError);

  mw.init(th::global_edf());
  EXPECT_THROW(mw.init(th::global_edf()), PhaseError);
  EXPECT_THROW(mw.stop(), PhaseError);
  EXPECT_THROW(mw.cleanup(), PhaseError);
  TaskId t = th::add_task(mw, {"a", 10 * kMilli, kMicro});

  mw.start(quiet_host());
  EXPECT_EQ(mw.phase(), Phase::kRunning);
  EXPECT_THROW(mw.start(quiet_host()), PhaseError);
  EXPECT_THROW(mw.cleanup(), PhaseError);
  EXPECT_THROW(th::add_task(mw, {"b", kMilli, 1}), PhaseError);
  EXPECT_THROW(mw.init(th::global_edf()), PhaseError);
  EXPECT_THROW(mw.task_activate(t), UsageError);

  mw.stop();
  EXPECT_EQ(mw.phase(), Phase::kStopped);
  EXPECT_THROW(mw.stop(), PhaseError);
  EXPECT_THROW(mw.task_activate(t), PhaseError);
  mw.cleanup();
  EXPECT_EQ(mw.phase(), Phase::kCleaned);
  EXPECT_THROW(mw.start(quiet_host()), PhaseError);
  EXPECT_THROW(mw.stop(), PhaseError);
  EXPECT_THROW(mw.cleanup(), PhaseError);
  EXPECT_THROW(th::add_task(mw, {"c", kMilli, 1}), PhaseError);
}

TEST(Middleware, RestartAfterStopWithModifiedTaskSet) {
  Middleware mw;
  mw.init(th::global_edf());
  th::add_task(mw, {"a", 10 * kMilli, kMicro});
  mw.start(quiet_host());
  mw.stop();
  TaskId b = th::add_task(mw, {"b", 20 * kMilli, kMicro});
  EXPECT_EQ(mw.task_set().tasks.size(), 2u);
  mw.start(quiet_host());
  EXPECT_EQ(mw.phase(), Phase::kRunning);
  mw.stop();
  Trace tr = mw.collect_trace();
  mw.cleanup();
  EXPECT_EQ(tr.task_names.size(), 2u);
  EXPECT_EQ(tr.task_names[b.index()], "b");
}
