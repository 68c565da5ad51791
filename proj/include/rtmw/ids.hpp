#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>

namespace rtmw {

// Dense small-integer identifiers issued in declaration order. The tag keeps
// a TaskId from being passed where a VersionId is expected.
template <typename Tag>
struct Id {
  static constexpr std::uint32_t kInvalid = std::numeric_limits<std::uint32_t>::max();

  std::uint32_t value = kInvalid;

  constexpr Id() = default;
  constexpr explicit Id(std::uint32_t v) : value(v) {}

  constexpr bool valid() const { return value != kInvalid; }
  constexpr std::size_t index() const { return value; }

  friend constexpr auto operator<=>(Id, Id) = default;
};

using TaskId = Id<struct TaskTag>;
using VersionId = Id<struct VersionTag>;
using AccelId = Id<struct AccelTag>;
using ChannelId = Id<struct ChannelTag>;

// Worker (virtual core) index; kSchedulerContext marks the scheduler thread
// in traces and lock statistics.
using WorkerIndex = std::int32_t;
constexpr WorkerIndex kSchedulerContext = -1;

}  // namespace rtmw

template <typename Tag>
struct std::hash<rtmw::Id<Tag>> {
  std::size_t operator()(rtmw::Id<Tag> id) const noexcept { return id.value; }
};
