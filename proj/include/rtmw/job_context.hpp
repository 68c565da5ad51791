#pragma once

#include <any>
#include <cstring>
#include <span>
#include <type_traits>

#include "rtmw/ids.hpp"
#include "rtmw/task_model.hpp"
#include "rtmw/time.hpp"

namespace rtmw {

// Handle given to a running job body on the real-time backend. Channel
// operations and yield_point() are the preemption safe points.
class JobContext {
 public:
  virtual ~JobContext() = default;

  virtual TaskId task() const = 0;
  virtual std::uint64_t seq() const = 0;
  virtual VersionId version() const = 0;
  virtual const std::any& static_args() const = 0;
  virtual Nanos now() const = 0;
  virtual Nanos abs_deadline() const = 0;

  // Block while the channel is full / empty.
  virtual void push(ChannelId channel, std::span<const std::byte> element) = 0;
  virtual void pop(ChannelId channel, std::span<std::byte> out) = 0;

  virtual void yield_point() = 0;
  // Synthetic work of the given duration with periodic safe points.
  virtual void busy_wait(Nanos duration) = 0;

  virtual void set_execution_mode(ModeMask mode) = 0;
  virtual void set_permission_mask(ModeMask mask) = 0;

  template <typename T>
  void push_value(ChannelId channel, const T& value) {
    static_assert(std::is_trivially_copyable_v<T>);
    push(channel, std::as_bytes(std::span<const T, 1>(&value, 1)));
  }

  template <typename T>
  T pop_value(ChannelId channel) {
    static_assert(std::is_trivially_copyable_v<T>);
    T value{};
    pop(channel, std::as_writable_bytes(std::span<T, 1>(&value, 1)));
    return value;
  }
};

// Context of the job running on the calling thread, nullptr elsewhere.
JobContext* current_job();

// Free-function forms for job bodies. Throw UsageError outside a running job.
void channel_push(ChannelId channel, std::span<const std::byte> element);
void channel_pop(ChannelId channel, std::span<std::byte> out);

template <typename T>
void channel_push(ChannelId channel, const T& value) {
  static_assert(std::is_trivially_copyable_v<T>);
  channel_push(channel, std::span<const std::byte>(std::as_bytes(std::span<const T, 1>(&value, 1))));
}

template <typename T>
void channel_pop(ChannelId channel, T* value) {
  static_assert(std::is_trivially_copyable_v<T>);
  channel_pop(channel, std::as_writable_bytes(std::span<T, 1>(value, 1)));
}

}  // namespace rtmw
