#include <gtest/gtest.h>

#include "rtmw/config.hpp"
#include "rtmw/error.hpp"
#include "rtmw/time.hpp"

using namespace rtmw;

TEST(Duration, ParsesUnits) {
  EXPECT_EQ(parse_duration("250"), 250);
  EXPECT_EQ(parse_duration("250ns"), 250);
  EXPECT_EQ(parse_duration("10us"), 10 * kMicro);
  EXPECT_EQ(parse_duration("4ms"), 4 * kMilli);
  EXPECT_EQ(parse_duration("30s"), 30 * kSecond);
}

TEST(Duration, RejectsGarbage) {
  EXPECT_THROW(parse_duration(""), DocumentError);
  EXPECT_THROW(parse_duration("ms"), DocumentError);
  EXPECT_THROW(parse_duration("4 ms"), DocumentError);
  EXPECT_THROW(parse_duration("4h"), DocumentError);
  EXPECT_THROW(parse_duration("99999999999s"), DocumentError);
}

TEST(Duration, FormatIsShortestExact) {
  EXPECT_EQ(format_duration(4 * kMilli), "4ms");
  EXPECT_EQ(format_duration(1500 * kMicro), "1500us");
  EXPECT_EQ(format_duration(30 * kSecond), "30s");
  EXPECT_EQ(format_duration(7), "7ns");
  EXPECT_EQ(format_duration(0), "0ns");
  for (Nanos v : {Nanos{1}, Nanos{999}, kMicro, 12 * kMilli, 3 * kSecond, Nanos{1'234'567}}) {
    EXPECT_EQ(parse_duration(format_duration(v)), v);
  }
}

TEST(Duration, GcdLcm) {
  EXPECT_EQ(gcd_ns(10 * kMilli, 25 * kMilli), 5 * kMilli);
  Nanos l = 0;
  ASSERT_TRUE(lcm_ns(4, 6, l));
  EXPECT_EQ(l, 12);
  EXPECT_FALSE(lcm_ns(std::numeric_limits<Nanos>::max() - 1, std::numeric_limits<Nanos>::max() - 2, l));
}

TEST(PolicyConfig, OfflineForbidsPreemption) {
  PolicyConfig c;
  c.mapping_scheme = MappingScheme::kOffline;
  c.version_selection = VersionSelection::kPreselected;
  c.preemptive = true;
  try {
    c.validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("OFFLINE forbids preemption"), std::string::npos);
  }
  c.preemptive = false;
  EXPECT_NO_THROW(c.validate());
}

TEST(PolicyConfig, OfflineRequiresPreselected) {
  PolicyConfig c;
  c.mapping_scheme = MappingScheme::kOffline;
  c.preemptive = false;
  c.version_selection = VersionSelection::kEnergy;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(PolicyConfig, PreselectedOnlyOffline) {
  PolicyConfig c;
  c.version_selection = VersionSelection::kPreselected;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(PolicyConfig, ZeroWorkersRejected) {
  PolicyConfig c;
  c.worker_count = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(PolicyConfig, EnumNamesRoundTrip) {
  for (auto m : {MappingScheme::kGlobal, MappingScheme::kPartitioned, MappingScheme::kOffline}) {
    EXPECT_EQ(parse_mapping(to_string(m)), m);
  }
  for (auto p : {PriorityAssignment::kRM, PriorityAssignment::kDM, PriorityAssignment::kEDF, PriorityAssignment::kUser}) {
    EXPECT_EQ(parse_priority(to_string(p)), p);
  }
  for (auto s : {VersionSelection::kEnergy, VersionSelection::kEnergyTime, VersionSelection::kMode,
                 VersionSelection::kBitmask, VersionSelection::kUser, VersionSelection::kPreselected}) {
    EXPECT_EQ(parse_selection(to_string(s)), s);
  }
  EXPECT_EQ(parse_mapping("global"), MappingScheme::kGlobal);
  EXPECT_EQ(parse_waiting("SPIN"), WaitingStrategy::kSpin);
  EXPECT_EQ(parse_locking("lock_free"), LockingStrategy::kLockFree);
  EXPECT_EQ(parse_clock("virtual"), ClockSource::kVirtual);
  EXPECT_FALSE(parse_mapping("clustered"));
}

TEST(PolicyConfig, Labels) {
  PolicyConfig c;
  EXPECT_EQ(policy_label(c), "G-EDF");
  c.mapping_scheme = MappingScheme::kPartitioned;
  c.priority_assignment = PriorityAssignment::kDM;
  EXPECT_EQ(policy_label(c), "P-DM");
  c.mapping_scheme = MappingScheme::kOffline;
  EXPECT_EQ(policy_label(c), "OFFLINE");
}
