#include "rtmw/channel.hpp"

#include <algorithm>
#include <cstring>

#include "rtmw/error.hpp"

namespace rtmw {

ChannelBuffer::ChannelBuffer(std::size_t element_size, std::size_t capacity)
    : element_size_(capacity == 0 ? 0 : element_size),
      capacity_(capacity),
      slots_(capacity == 0 ? 1 : capacity),
      storage_(element_size_ * slots_) {}

bool ChannelBuffer::try_push(std::span<const std::byte> element) {
  if (full()) return false;
  if (element_size_ > 0) {
    if (element.size() != element_size_) {
      throw UsageError("channel push of " + std::to_string(element.size()) + " bytes, element size is " +
                       std::to_string(element_size_));
    }
    std::size_t tail = (head_ + occupancy_) % slots_;
    std::memcpy(storage_.data() + tail * element_size_, element.data(), element_size_);
  }
  ++occupancy_;
  ++pushes_;
  return true;
}

bool ChannelBuffer::try_pop(std::span<std::byte> out) {
  if (empty()) return false;
  if (element_size_ > 0 && !out.empty()) {
    std::memcpy(out.data(), storage_.data() + head_ * element_size_, std::min(out.size(), element_size_));
  }
  head_ = (head_ + 1) % slots_;
  --occupancy_;
  ++pops_;
  return true;
}

void ChannelBuffer::clear() {
  head_ = 0;
  occupancy_ = 0;
  pushes_ = 0;
  pops_ = 0;
}

}  // namespace rtmw
