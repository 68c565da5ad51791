#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rtmw {

// Fixed-capacity single-producer/single-consumer FIFO of fixed-size
// elements. Not synchronised; callers provide mutual exclusion. A channel
// declared with capacity 0 is token-only: it holds one bare token and pops
// yield no payload.
class ChannelBuffer {
 public:
  ChannelBuffer(std::size_t element_size, std::size_t capacity);

  // False when full; never overwrites.
  bool try_push(std::span<const std::byte> element);
  // False when empty. `out` may be empty for token-only channels.
  bool try_pop(std::span<std::byte> out);

  std::size_t occupancy() const { return occupancy_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t token_capacity() const { return slots_; }
  std::size_t element_size() const { return element_size_; }
  bool token_only() const { return capacity_ == 0; }
  bool full() const { return occupancy_ == slots_; }
  bool empty() const { return occupancy_ == 0; }

  std::uint64_t pushes() const { return pushes_; }
  std::uint64_t pops() const { return pops_; }

  void clear();

 private:
  std::size_t element_size_;
  std::size_t capacity_;
  std::size_t slots_;
  std::vector<std::byte> storage_;
  std::size_t head_ = 0;
  std::size_t occupancy_ = 0;
  std::uint64_t pushes_ = 0;
  std::uint64_t pops_ = 0;
};

}  // namespace rtmw
