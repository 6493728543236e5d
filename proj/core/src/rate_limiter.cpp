#include "capcurate/rate_limiter.hpp"

#include <algorithm>
#include <thread>

#include "capcurate/error.hpp"

namespace capcurate {

TokenBucket::TokenBucket(double rate_per_second, double burst)
    : rate_(rate_per_second), burst_(burst), tokens_(burst), last_(Clock::now()) {
  if (!(rate_per_second > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "rate limit must be > 0");
  }
  if (!(burst >= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "token bucket burst must be >= 1");
  }
}

TokenBucket::Clock::duration TokenBucket::reserve() {
  std::lock_guard lock(mu_);
  const auto now = Clock::now();
  const double elapsed = std::chrono::duration<double>(now - last_).count();
  tokens_ = std::min(burst_, tokens_ + elapsed * rate_);
  last_ = now;
  tokens_ -= 1.0;
  if (tokens_ >= 0.0) return Clock::duration::zero();
  return std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(-tokens_ / rate_));
}

void TokenBucket::acquire() {
  const auto wait = reserve();
  if (wait > Clock::duration::zero()) std::this_thread::sleep_for(wait);
}

bool TokenBucket::try_acquire() {
  std::lock_guard lock(mu_);
  const auto now = Clock::now();
  const double elapsed = std::chrono::duration<double>(now - last_).count();
  tokens_ = std::min(burst_, tokens_ + elapsed * rate_);
  last_ = now;
  if (tokens_ < 1.0) return false;
  tokens_ -= 1.0;
  return true;
}

}  // namespace capcurate
