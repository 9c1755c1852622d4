#include <functional>

#include "doctest.h"

#include "flightlab/error.hpp"
#include "flightlab/irregularity.hpp"
#include "flightlab/sim.hpp"
#include "flightlab/tsv.hpp"

using namespace flightlab;

namespace {

// n+1 samples at spacing dt; the callback fills position for sample i.
Trajectory build(std::size_t n, double dt, const std::function<void(TrajectorySample&, std::size_t)>& f) {
  std::vector<TrajectorySample> s(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    s[i].t = static_cast<double>(i) * dt;
    f(s[i], i);
  }
  return Trajectory("T", std::move(s));
}

const DetectorConfig cfg;

}  // namespace

TEST_CASE("taxiing") {
  SUBCASE("low and slow for 20 s") {
    const auto t = build(100, 0.2, [](TrajectorySample& s, std::size_t i) {
      s.z_up = 0.5;
      s.x_east = 1.0 * s.t;
      (void)i;
    });
    const auto f = detect_taxiing(t, cfg);
    REQUIRE(f.size() == 1);
    CHECK(f[0].t_start == 0);
    CHECK(f[0].t_end == doctest::Approx(20));
    CHECK(f[0].kind == Behavior::taxiing_or_stopped);
  }
  SUBCASE("cruise at altitude") {
    const auto t = build(100, 0.2, [](TrajectorySample& s, std::size_t) {
      s.z_up = 300;
      s.x_east = 100 * s.t;
    });
    CHECK(detect_taxiing(t, cfg).empty());
  }
  SUBCASE("4 s on the ground is below persistence") {
    const auto t = build(100, 0.2, [](TrajectorySample& s, std::size_t) {
      if (s.t < 4 - 1e-9) {
        s.z_up = 0.5;
        s.x_east = s.t;
      } else {
        s.z_up = 50;
        s.x_east = 4 + 80 * (s.t - 4);
      }
    });
    CHECK(detect_taxiing(t, cfg).empty());
  }
  SUBCASE("exactly 10 s at dt 1") {
    const auto t = build(20, 1.0, [](TrajectorySample& s, std::size_t i) {
      s.z_up = i <= 10 ? 0.5 : 100;
      s.x_east = i <= 10 ? static_cast<double>(i) : 10 + 100.0 * static_cast<double>(i - 10);
    });
    const auto f = detect_taxiing(t, cfg);
    REQUIRE(f.size() == 1);
    CHECK(f[0].t_start == 0);
    CHECK(f[0].t_end == 10);
  }
}

TEST_CASE("irregular stop") {
  SUBCASE("frozen at 100 m for 8 s") {
    const auto t = build(40, 1.0, [](TrajectorySample& s, std::size_t i) {
      s.z_up = 100;
      s.x_east = i < 10 ? 100.0 * i : i < 18 ? 1000 : 1000 + 100.0 * (i - 18);
    });
    const auto f = detect_irregular_stop(t, cfg);
    REQUIRE(f.size() == 1);
    CHECK(f[0].t_start == 10);
    CHECK(f[0].t_end == 18);
  }
  SUBCASE("continuous cruise") {
    const auto t = build(40, 1.0, [](TrajectorySample& s, std::size_t) {
      s.z_up = 100;
      s.x_east = 100 * s.t;
    });
    CHECK(detect_irregular_stop(t, cfg).empty());
  }
  SUBCASE("frozen on the ground belongs to taxiing") {
    const auto t = build(40, 1.0, [](TrajectorySample& s, std::size_t) { s.z_up = 0.5; });
    CHECK(detect_irregular_stop(t, cfg).empty());
    CHECK(detect_taxiing(t, cfg).size() == 1);
  }
}

TEST_CASE("teleport") {
  SUBCASE("5000 m in 0.2 s") {
    const auto t = build(50, 0.2, [](TrajectorySample& s, std::size_t i) {
      s.z_up = 100;
      s.x_east = 100 * s.t + (i > 25 ? 5000 : 0);
    });
    const auto f = detect_teleport(t, cfg);
    REQUIRE(f.size() == 1);
    CHECK(f[0].t_start == doctest::Approx(5.0));
    CHECK(f[0].t_end == doctest::Approx(5.2));
  }
  SUBCASE("smooth flight") {
    const auto t = build(50, 0.2, [](TrajectorySample& s, std::size_t) { s.x_east = 100 * s.t; });
    CHECK(detect_teleport(t, cfg).empty());
  }
  SUBCASE("long gap, feasible speed") {
    std::vector<TrajectorySample> s(2);
    s[1].t = 60;
    s[1].x_east = 600;
    CHECK(detect_teleport(Trajectory("gap", s), cfg).empty());
  }
}

TEST_CASE("impossible speed") {
  SUBCASE("500 m/s for 3 s") {
    const auto t = build(30, 1.0, [](TrajectorySample& s, std::size_t i) {
      s.z_up = 100;
      s.x_east = i < 10 ? 100.0 * i : i < 13 ? 1000 + 500.0 * (i - 10) : 2500 + 100.0 * (i - 13);
    });
    const auto f = detect_impossible_speed(t, cfg);
    REQUIRE(f.size() == 1);
    CHECK(f[0].t_start == 10);
    CHECK(f[0].t_end == 13);
  }
  SUBCASE("all at most 120 m/s") {
    const auto t = build(30, 1.0, [](TrajectorySample& s, std::size_t) { s.x_east = 120 * s.t; });
    CHECK(detect_impossible_speed(t, cfg).empty());
  }
  SUBCASE("exactly the threshold is not flagged") {
    const auto t = build(30, 1.0, [](TrajectorySample& s, std::size_t) { s.x_east = 180 * s.t; });
    CHECK(detect_impossible_speed(t, cfg).empty());
  }
}

TEST_CASE("label_sortie union and merging") {
  SUBCASE("clean generated sortie") {
    const auto r = label_sortie(random_good_sortie(3));
    CHECK(r.clean);
    CHECK(r.flags.empty());
  }
  SUBCASE("teleport gives one merged flag") {
    const auto t = inject_defect(random_good_sortie(3), {DefectKind::teleport, 60, 3000});
    const auto r = label_sortie(t);
    CHECK_FALSE(r.clean);
    REQUIRE(r.flags.size() == 1);
    CHECK(r.flags[0].kind == Behavior::teleportation_or_impossible_speed);
  }
  SUBCASE("taxi plus teleport") {
    const auto t = build(60, 1.0, [](TrajectorySample& s, std::size_t i) {
      s.z_up = i <= 10 ? 0.5 : 100;
      s.x_east = i <= 10 ? 0 : 50.0 * (i - 10) + (i > 40 ? 9000 : 0);
    });
    const auto r = label_sortie(t);
    REQUIRE(r.flags.size() == 2);
    CHECK(r.flags[0].kind == Behavior::taxiing_or_stopped);
    CHECK(r.flags[1].kind == Behavior::teleportation_or_impossible_speed);
  }
}

TEST_CASE("thresholds are monotone") {
  const auto t = inject_defect(inject_defect(random_good_sortie(8), {DefectKind::impossible_speed, 50, 10}),
                               {DefectKind::ground_idle, 0, 12});
  DetectorConfig lo, hi;
  hi.impossible_speed_min = 400;
  hi.persistence_min = 11;
  CHECK(detect_impossible_speed(t, hi).size() <= detect_impossible_speed(t, lo).size());
  CHECK(detect_taxiing(t, hi).size() <= detect_taxiing(t, lo).size());
  for (const auto& f : label_sortie(t).flags) {
    CHECK(f.t_start >= t.t_first());
    CHECK(f.t_end <= t.t_last());
  }
}

TEST_CASE("report CSV") {
  IrregularityReport a{"12000001002", {{Behavior::taxiing_or_stopped, 0, 12.5}}, false};
  IrregularityReport b{"B", {{Behavior::irregular_stopping, 30, 40}, {Behavior::taxiing_or_stopped, 1, 8}}, false};
  IrregularityReport c{"C", {}, true};
  const auto csv = write_report({c, b, a});
  CHECK(csv ==
        "Sortie Num,Behavior,t_start,t_end\n"
        "12000001002,Taxiing or Stopped on Ground,0.000,12.500\n"
        "B,Taxiing or Stopped on Ground,1.000,8.000\n"
        "B,Irregular Stopping,30.000,40.000\n");
  CHECK(write_report({c}) == "Sortie Num,Behavior,t_start,t_end\n");
}

TEST_CASE("detector config") {
  DetectorConfig c;
  c.apply(parse_key_value("# thresholds\nslow_speed_max = 3.5\npersistence_min=2\n"));
  CHECK(c.slow_speed_max == 3.5);
  CHECK(c.persistence_min == 2);
  c.slow_speed_max = -1;
  CHECK_THROWS_AS(c.check(), Error);
}
