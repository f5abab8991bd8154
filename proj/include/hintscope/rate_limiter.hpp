#pragma once

#include <chrono>
#include <cstdint>
#include <mutex>

namespace hintscope {

/// Process-wide byte throughput cap (token bucket, one second of burst).
/// consume() blocks until the debt it creates is paid off.
class ByteRateLimiter {
 public:
  explicit ByteRateLimiter(double bytes_per_second);

  void consume(std::size_t bytes);

  double rate() const { return rate_; }
  std::uint64_t total_bytes() const;

 private:
  using Clock = std::chrono::steady_clock;

  double rate_;
  double tokens_;
  Clock::time_point last_;
  std::uint64_t total_ = 0;
  mutable std::mutex mutex_;
};

}  // namespace hintscope
