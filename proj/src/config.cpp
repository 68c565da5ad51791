#include "rtmw/config.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <utility>

#include "rtmw/error.hpp"

namespace rtmw {
namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view s) {
  for (const auto& [value, name] : table) {
    if (iequals(name, s)) return value;
  }
  return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E v) {
  for (const auto& [value, name] : table) {
    if (value == v) return name;
  }
  return "?";
}

constexpr std::array<std::pair<MappingScheme, std::string_view>, 3> kMapping{{
    {MappingScheme::kGlobal, "GLOBAL"},
    {MappingScheme::kPartitioned, "PARTITIONED"},
    {MappingScheme::kOffline, "OFFLINE"},
}};
constexpr std::array<std::pair<PriorityAssignment, std::string_view>, 4> kPriority{{
    {PriorityAssignment::kRM, "RM"},
    {PriorityAssignment::kDM, "DM"},
    {PriorityAssignment::kEDF, "EDF"},
    {PriorityAssignment::kUser, "USER"},
}};
constexpr std::array<std::pair<VersionSelection, std::string_view>, 6> kSelection{{
    {VersionSelection::kEnergy, "ENERGY"},
    {VersionSelection::kEnergyTime, "ENERGY_TIME"},
    {VersionSelection::kMode, "MODE"},
    {VersionSelection::kBitmask, "BITMASK"},
    {VersionSelection::kUser, "USER"},
    {VersionSelection::kPreselected, "PRESELECTED"},
}};
constexpr std::array<std::pair<WaitingStrategy, std::string_view>, 2> kWaiting{{
    {WaitingStrategy::kSleep, "sleep"},
    {WaitingStrategy::kSpin, "spin"},
}};
constexpr std::array<std::pair<LockingStrategy, std::string_view>, 2> kLocking{{
    {LockingStrategy::kOsLock, "os_lock"},
    {LockingStrategy::kLockFree, "lock_free"},
}};
constexpr std::array<std::pair<ClockSource, std::string_view>, 2> kClock{{
    {ClockSource::kMonotonic, "monotonic"},
    {ClockSource::kVirtual, "virtual"},
}};

}  // namespace

void PolicyConfig::validate() const {
  if (worker_count == 0) throw ConfigError("worker_count must be positive");
  if (mapping_scheme == MappingScheme::kOffline) {
    if (preemptive) throw ConfigError("OFFLINE forbids preemption (mapping_scheme=OFFLINE, preemptive=true)");
    if (version_selection != VersionSelection::kPreselected) {
      throw ConfigError("OFFLINE requires version_selection=PRESELECTED (got " +
                        std::string(to_string(version_selection)) + ")");
    }
  } else if (version_selection == VersionSelection::kPreselected) {
    throw ConfigError("version_selection=PRESELECTED requires mapping_scheme=OFFLINE (got " +
                      std::string(to_string(mapping_scheme)) + ")");
  }
}

std::string_view to_string(MappingScheme v) { return name_of(kMapping, v); }
std::string_view to_string(PriorityAssignment v) { return name_of(kPriority, v); }
std::string_view to_string(VersionSelection v) { return name_of(kSelection, v); }
std::string_view to_string(WaitingStrategy v) { return name_of(kWaiting, v); }
std::string_view to_string(LockingStrategy v) { return name_of(kLocking, v); }
std::string_view to_string(ClockSource v) { return name_of(kClock, v); }

std::optional<MappingScheme> parse_mapping(std::string_view s) { return lookup(kMapping, s); }
std::optional<PriorityAssignment> parse_priority(std::string_view s) { return lookup(kPriority, s); }
std::optional<VersionSelection> parse_selection(std::string_view s) { return lookup(kSelection, s); }
std::optional<WaitingStrategy> parse_waiting(std::string_view s) { return lookup(kWaiting, s); }
std::optional<LockingStrategy> parse_locking(std::string_view s) { return lookup(kLocking, s); }
std::optional<ClockSource> parse_clock(std::string_view s) { return lookup(kClock, s); }

std::string policy_label(const PolicyConfig& config) {
  switch (config.mapping_scheme) {
    case MappingScheme::kOffline:
      return "OFFLINE";
    case MappingScheme::kGlobal:
      return "G-" + std::string(to_string(config.priority_assignment));
    case MappingScheme::kPartitioned:
      return "P-" + std::string(to_string(config.priority_assignment));
  }
  return "?";
}

}  // namespace rtmw
