#include "hintscope/rate_limiter.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>

namespace hintscope {

ByteRateLimiter::ByteRateLimiter(double bytes_per_second)
    : rate_(bytes_per_second), tokens_(bytes_per_second), last_(Clock::now()) {
  if (!(bytes_per_second > 0)) throw std::invalid_argument("throughput cap must be positive");
}

void ByteRateLimiter::consume(std::size_t bytes) {
  std::chrono::duration<double> wait{0};
  {
    std::lock_guard lock(mutex_);
    auto now = Clock::now();
    std::chrono::duration<double> elapsed = now - last_;
    last_ = now;
    tokens_ = std::min(rate_, tokens_ + elapsed.count() * rate_);
    tokens_ -= static_cast<double>(bytes);
    total_ += bytes;
    if (tokens_ < 0) wait = std::chrono::duration<double>(-tokens_ / rate_);
  }
  if (wait.count() > 0) std::this_thread::sleep_for(wait);
}

std::uint64_t ByteRateLimiter::total_bytes() const {
  std::lock_guard lock(mutex_);
  return total_;
}

}  // namespace hintscope
