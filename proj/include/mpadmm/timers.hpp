#pragma once

#include <chrono>

namespace mpadmm {

/// Cumulative wall time per ADMM block, in milliseconds.
struct SubproblemTimes {
  double U = 0.0;
  double V = 0.0;
  double P = 0.0;
  double Z = 0.0;

  double sum() const { return U + V + P + Z; }
};

enum class Section { U, V, P, Z };

/// Adds the elapsed time of its scope to one field of a SubproblemTimes.
class ScopedTimer {
 public:
  ScopedTimer(SubproblemTimes& times, Section section)
      : slot_(slot(times, section)), start_(std::chrono::steady_clock::now()) {}

  ~ScopedTimer() {
    const auto stop = std::chrono::steady_clock::now();
    slot_ += std::chrono::duration<double, std::milli>(stop - start_).count();
  }

  ScopedTimer(const ScopedTimer&) = delete;
  ScopedTimer& operator=(const ScopedTimer&) = delete;

 private:
  static double& slot(SubproblemTimes& t, Section s) {
    switch (s) {
      case Section::U: return t.U;
      case Section::V: return t.V;
      case Section::P: return t.P;
      case Section::Z: break;
    }
    return t.Z;
  }

  double& slot_;
  std::chrono::steady_clock::time_point start_;
};

/// Milliseconds elapsed since a start point.
inline double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace mpadmm
