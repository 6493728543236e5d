#pragma once

#include <chrono>
#include <mutex>

namespace capcurate {

// Token bucket: `rate` tokens per second, holding at most `burst` tokens.
// Thread-safe; acquire() blocks the caller until a token is available.
class TokenBucket {
 public:
  TokenBucket(double rate_per_second, double burst);

  void acquire();
  // Takes a token if one is available right now.
  bool try_acquire();

  double rate() const noexcept { return rate_; }

 private:
  using Clock = std::chrono::steady_clock;

  // Reserves the next token and returns how long the caller must wait.
  Clock::duration reserve();

  double rate_;
  double burst_;
  double tokens_;
  Clock::time_point last_;
  std::mutex mu_;
};

}  // namespace capcurate
