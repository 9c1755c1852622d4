#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "flightlab/sim.hpp"
#include "flightlab/trajectory.hpp"

namespace flightlab::testing {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("flightlab-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline Trajectory level_cruise(double duration, std::uint64_t seed = 1, double speed = 90,
                               double altitude = 1000, double dt = 0.2) {
  SegmentSpec s;
  s.kind = SegmentKind::level_cruise;
  s.duration = duration;
  s.speed = speed;
  SortieStart start;
  start.altitude = altitude;
  start.sortie_id = "cruise";
  return gen_good_sortie(seed, {s}, dt, start);
}

/// 240 s of cruise with one template spliced in at t_start.
inline Trajectory embedded_fixture(const ManeuverTemplate& tmpl, double t_start, std::uint64_t seed) {
  return embed_template(level_cruise(240, seed), tmpl, t_start).with_id("fixture");
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace flightlab::testing
