#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace capcurate {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

Timestamp now_utc();

// ISO-8601 UTC with millisecond precision, e.g. "2024-05-01T12:00:00.250Z".
std::string format_timestamp(Timestamp t);
Timestamp parse_timestamp(std::string_view text);

// Time source injected into anything that reasons about lease expiry.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp now() const = 0;
};

class SystemClock final : public Clock {
 public:
  Timestamp now() const override { return now_utc(); }
};

// Deterministic clock for simulations and tests.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(Timestamp start = Timestamp{}) : now_(start) {}
  Timestamp now() const override { return now_; }
  void advance(std::chrono::milliseconds d) { now_ += d; }
  void set(Timestamp t) { now_ = t; }

 private:
  Timestamp now_;
};

}  // namespace capcurate
