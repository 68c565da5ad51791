#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "helpers.hpp"
#include "rtmw/error.hpp"
#include "rtmw/job.hpp"
#include "rtmw/priority.hpp"

using namespace rtmw;

namespace {

Job make_job(const Middleware& mw, TaskId t, std::uint64_t seq, Nanos release) {
  Job j;
  j.task = t;
  j.seq = seq;
  j.abs_release = release;
  j.abs_deadline = release + mw.task_set().effective_deadline(t);
  j.key = assign_priority(mw.config(), mw.task_set(), j);
  return j;
}

}  // namespace

class PriorityTie : public ::testing::TestWithParam<PriorityAssignment> {};

TEST_P(PriorityTie, EqualOrdinalGoesToLowerTaskId) {
  Middleware mw;
  mw.init(th::config(MappingScheme::kGlobal, GetParam(), 1));
  for (int i = 0; i < 6; ++i) {
    TaskDescriptor d;
    d.name = "t" + std::to_string(i);
    d.period = (i == 2 || i == 5) ? 10 * kMilli : (20 + i) * kMilli;
    d.relative_deadline = d.period;
    d.user_priority = (i == 2 || i == 5) ? 1 : 10 + i;
    TaskId id = mw.task_decl(d);
    mw.version_decl(id, {}, {}, EnergySelect{}, {"v1", 1});
  }
  Job a = make_job(mw, TaskId(5), 0, 0);
  Job b = make_job(mw, TaskId(2), 0, 0);
  EXPECT_TRUE(b.key.higher_than(a.key));
  EXPECT_FALSE(a.key.higher_than(b.key));
}

INSTANTIATE_TEST_SUITE_P(AllAssignments, PriorityTie,
                         ::testing::Values(PriorityAssignment::kRM, PriorityAssignment::kDM,
                                           PriorityAssignment::kEDF, PriorityAssignment::kUser));

TEST(Priority, RmPrefersShorterPeriod) {
  Middleware mw;
  mw.init(th::config(MappingScheme::kGlobal, PriorityAssignment::kRM, 1));
  TaskId slow = th::add_task(mw, {"slow", 100 * kMilli, 1, 10 * kMilli});
  TaskId fast = th::add_task(mw, {"fast", 50 * kMilli, 1});
  EXPECT_TRUE(make_job(mw, fast, 0, 0).key.higher_than(make_job(mw, slow, 0, 0).key));
}

TEST(Priority, DmPrefersShorterDeadline) {
  Middleware mw;
  mw.init(th::config(MappingScheme::kGlobal, PriorityAssignment::kDM, 1));
  TaskId slow = th::add_task(mw, {"slow", 100 * kMilli, 1, 10 * kMilli});
  TaskId fast = th::add_task(mw, {"fast", 50 * kMilli, 1});
  EXPECT_TRUE(make_job(mw, slow, 0, 0).key.higher_than(make_job(mw, fast, 0, 0).key));
}

TEST(Priority, EdfUsesAbsoluteDeadline) {
  Middleware mw;
  mw.init(th::global_edf());
  TaskId a = th::add_task(mw, {"a", 10 * kMilli, 1});
  TaskId b = th::add_task(mw, {"b", 25 * kMilli, 1});
  // a released at 20ms has deadline 30ms, b released at 0 has 25ms.
  EXPECT_TRUE(make_job(mw, b, 0, 0).key.higher_than(make_job(mw, a, 2, 20 * kMilli).key));
  EXPECT_TRUE(make_job(mw, a, 0, 0).key.higher_than(make_job(mw, b, 0, 0).key));
}

TEST(Priority, UserLowerValueIsHigher) {
  Middleware mw;
  mw.init(th::config(MappingScheme::kGlobal, PriorityAssignment::kUser, 1));
  TaskDescriptor d;
  d.name = "a";
  d.period = kMilli;
  d.relative_deadline = kMilli;
  d.user_priority = 7;
  TaskId a = mw.task_decl(d);
  mw.version_decl(a, {}, {}, EnergySelect{}, {"v1", 1});
  d.name = "b";
  d.user_priority = 3;
  TaskId b = mw.task_decl(d);
  mw.version_decl(b, {}, {}, EnergySelect{}, {"v1", 1});
  EXPECT_TRUE(make_job(mw, b, 0, 0).key.higher_than(make_job(mw, a, 0, 0).key));
}

TEST(Priority, UserWithoutValueThrows) {
  Middleware mw;
  mw.init(th::config(MappingScheme::kGlobal, PriorityAssignment::kUser, 1));
  TaskId a = th::add_task(mw, {"a", kMilli, 1});
  Job j;
  j.task = a;
  EXPECT_THROW(assign_priority(mw.config(), mw.task_set(), j), ConfigError);
}

TEST(Priority, AperiodicSortsBelowRecurring) {
  Middleware mw;
  mw.init(th::global_edf());
  TaskId periodic = th::add_task(mw, {"p", 100 * kMilli, 1});
  TaskId ap = th::add_task(mw, {"ap", 0, 1, kMilli, 0, {}, TaskKind::kAperiodic});
  Job early_ap = make_job(mw, ap, 0, 0);
  Job late_p = make_job(mw, periodic, 50, 5000 * kMilli);
  EXPECT_TRUE(late_p.key.higher_than(early_ap.key));
  EXPECT_EQ(early_ap.key.cls, PriorityClass::kAperiodic);
  // Between aperiodic jobs, the earlier activation wins.
  EXPECT_TRUE(make_job(mw, ap, 0, 3).key.higher_than(make_job(mw, ap, 1, 9).key));
}

TEST(Priority, InheritedKeyRaisesEffectivePriority) {
  Job low;
  low.key = {PriorityClass::kRecurring, 100, 3, 0};
  PriorityKey high{PriorityClass::kRecurring, 10, 1, 0};
  EXPECT_EQ(low.effective_key(), low.key);
  low.inherited = high;
  EXPECT_EQ(low.effective_key(), high);
  // An inherited key lower than the base one is ignored.
  low.inherited = PriorityKey{PriorityClass::kRecurring, 500, 9, 0};
  EXPECT_EQ(low.effective_key(), low.key);
}

TEST(SortReady, SortedQueueCostsNoMoves) {
  std::vector<Job> jobs(5);
  std::vector<Job*> q;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    jobs[i].key.primary = static_cast<std::int64_t>(i);
    q.push_back(&jobs[i]);
  }
  EXPECT_EQ(sort_ready(q), 0u);
}

TEST(SortReady, OrdersByEffectiveKeyAndCountsMoves) {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 50; ++round) {
    std::vector<Job> jobs(12);
    std::vector<Job*> q;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      jobs[i].key = {PriorityClass::kRecurring, static_cast<std::int64_t>(rng() % 20), static_cast<std::uint32_t>(i), 0};
      q.push_back(&jobs[i]);
    }
    std::shuffle(q.begin(), q.end(), rng);
    bool sorted_before = std::is_sorted(q.begin(), q.end(),
                                        [](const Job* a, const Job* b) { return a->effective_key() < b->effective_key(); });
    std::size_t moves = sort_ready(q);
    EXPECT_TRUE(std::is_sorted(q.begin(), q.end(),
                               [](const Job* a, const Job* b) { return a->effective_key() < b->effective_key(); }));
    if (!sorted_before) EXPECT_GT(moves, 0u);
  }
}
