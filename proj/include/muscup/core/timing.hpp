#pragma once

#include <algorithm>
#include <chrono>

namespace muscup {

/// Wall time split into micro model, macro model and method overhead
/// (interpolation, surrogate fitting, testing, estimation).
struct TimingBreakdown {
  double t_total = 0.0;
  double t_micro = 0.0;
  double t_macro = 0.0;
  double t_overhead = 0.0;

  double micro_fraction() const { return frac(t_micro); }
  double macro_fraction() const { return frac(t_macro); }
  double overhead_fraction() const { return frac(t_overhead); }

  TimingBreakdown& operator+=(const TimingBreakdown& o) {
    t_total += o.t_total;
    t_micro += o.t_micro;
    t_macro += o.t_macro;
    t_overhead += o.t_overhead;
    return *this;
  }

 private:
  double frac(double t) const {
    return t_total > 0.0 ? std::clamp(t / t_total, 0.0, 1.0) : 0.0;
  }
};

class Stopwatch {
 public:
  using clock = std::chrono::steady_clock;
  Stopwatch() : start_(clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(clock::now() - start_).count();
  }
  void restart() { start_ = clock::now(); }

 private:
  clock::time_point start_;
};

/// Adds the scope's elapsed time to `sink` on destruction.
class ScopedTimer {
 public:
  explicit ScopedTimer(double& sink) : sink_(sink) {}
  ~ScopedTimer() { sink_ += watch_.seconds(); }
  ScopedTimer(const ScopedTimer&) = delete;
  ScopedTimer& operator=(const ScopedTimer&) = delete;

 private:
  double& sink_;
  Stopwatch watch_;
};

}  // namespace muscup
