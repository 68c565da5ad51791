#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace rtmw {

enum class MappingScheme { kGlobal, kPartitioned, kOffline };
enum class PriorityAssignment { kRM, kDM, kEDF, kUser };
enum class VersionSelection { kEnergy, kEnergyTime, kMode, kBitmask, kUser, kPreselected };
enum class WaitingStrategy { kSleep, kSpin };
enum class LockingStrategy { kOsLock, kLockFree };
enum class ClockSource { kMonotonic, kVirtual };

// One compiled scheduling configuration. Exactly one is active per run; it is
// validated once when the middleware is initialised.
struct PolicyConfig {
  MappingScheme mapping_scheme = MappingScheme::kGlobal;
  PriorityAssignment priority_assignment = PriorityAssignment::kEDF;
  bool preemptive = true;
  VersionSelection version_selection = VersionSelection::kEnergy;
  WaitingStrategy waiting_strategy = WaitingStrategy::kSleep;
  LockingStrategy locking_strategy = LockingStrategy::kOsLock;
  std::uint32_t worker_count = 1;
  ClockSource clock_source = ClockSource::kMonotonic;
  // Raise an accelerator holder to the priority of a blocked requester.
  bool priority_inheritance = true;

  bool online() const { return mapping_scheme != MappingScheme::kOffline; }

  // Throws ConfigError naming the conflicting fields.
  void validate() const;

  friend bool operator==(const PolicyConfig&, const PolicyConfig&) = default;
};

std::string_view to_string(MappingScheme v);
std::string_view to_string(PriorityAssignment v);
std::string_view to_string(VersionSelection v);
std::string_view to_string(WaitingStrategy v);
std::string_view to_string(LockingStrategy v);
std::string_view to_string(ClockSource v);

// Parsers accept the spelling produced by to_string (case-insensitive).
std::optional<MappingScheme> parse_mapping(std::string_view s);
std::optional<PriorityAssignment> parse_priority(std::string_view s);
std::optional<VersionSelection> parse_selection(std::string_view s);
std::optional<WaitingStrategy> parse_waiting(std::string_view s);
std::optional<LockingStrategy> parse_locking(std::string_view s);
std::optional<ClockSource> parse_clock(std::string_view s);

// Short policy label used in reports: "G-EDF", "P-DM", "OFFLINE".
std::string policy_label(const PolicyConfig& config);

}  // namespace rtmw
