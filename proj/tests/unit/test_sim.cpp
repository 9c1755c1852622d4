#include <cmath>
#include <set>

#include "doctest.h"

#include "flightlab/error.hpp"
#include "flightlab/irregularity.hpp"
#include "flightlab/sim.hpp"
#include "flightlab/tsv.hpp"

#include "../support.hpp"

using namespace flightlab;

namespace {

SegmentSpec segment(SegmentKind kind, double duration, double speed, double turn = 0, double climb = 0) {
  SegmentSpec s;
  s.kind = kind;
  s.duration = duration;
  s.speed = speed;
  s.turn_rate = turn;
  s.climb_rate = climb;
  return s;
}

}  // namespace

TEST_CASE("level cruise integrates to the closed form") {
  SortieStart start;
  start.heading = 90;
  start.altitude = 100;
  const auto t = gen_good_sortie(1, {segment(SegmentKind::level_cruise, 60, 100)}, 0.2, start);
  CHECK(t.t_first() == 0);
  CHECK(t.t_last() == doctest::Approx(60));
  CHECK(std::abs(t[t.size() - 1].x_east - 6000) <= 0.5);
  CHECK(std::abs(t[t.size() - 1].y_north) <= 0.5);
}

TEST_CASE("full circle closes") {
  SortieStart start;
  start.altitude = 500;
  const auto t = gen_good_sortie(2, {segment(SegmentKind::constant_rate_turn, 120, 100, 3)}, 0.2, start);
  const auto& a = t[0];
  const auto& b = t[t.size() - 1];
  CHECK(std::hypot(b.x_east - a.x_east, b.y_north - a.y_north) <= 5);
  CHECK(a.roll > 0);
}

TEST_CASE("good sorties: consistency, origin start, clean") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto t = random_good_sortie(seed, 0.2, "g");
    CHECK(std::abs(t[0].x_east) <= 0.5);
    CHECK(std::abs(t[0].y_north) <= 0.5);
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
      const double dt = t[i + 1].t - t[i].t;
      const double ex = t[i + 1].x_east - t[i].x_east - t[i].vx * dt;
      const double ey = t[i + 1].y_north - t[i].y_north - t[i].vy * dt;
      const double ez = t[i + 1].z_up - t[i].z_up - t[i].vz * dt;
      CHECK(std::sqrt(ex * ex + ey * ey + ez * ez) <= 0.1);
      CHECK(t[i].z_up >= 0);
    }
    CHECK(label_sortie(t).clean);
  }
}

TEST_CASE("generation is deterministic per seed") {
  CHECK(write_tsv(random_good_sortie(9)) == write_tsv(random_good_sortie(9)));
  CHECK(write_tsv(random_good_sortie(9)) != write_tsv(random_good_sortie(10)));
}

TEST_CASE("invalid segments") {
  auto code = [](const std::vector<SegmentSpec>& segs) {
    try {
      gen_good_sortie(1, segs);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::InvalidArgument;
  };
  CHECK(code({segment(SegmentKind::level_cruise, 10, 200)}) == Errc::InvalidSegment);
  CHECK(code({segment(SegmentKind::level_cruise, 0, 100)}) == Errc::InvalidSegment);
  CHECK(code({segment(SegmentKind::descent, 30, 100, 0, 10)}) == Errc::InvalidSegment);
  CHECK(code({}) == Errc::InvalidSegment);
}

TEST_CASE("defects agree with the detectors") {
  const auto good = random_good_sortie(5, 0.2, "d");
  const DetectorConfig cfg;

  SUBCASE("teleport") {
    const auto t = inject_defect(good, {DefectKind::teleport, 70, 5000});
    const auto ev = detect_teleport(t, cfg);
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].t_start <= 70);
    CHECK(ev[0].t_end >= 70);
    const auto r = label_sortie(t);
    REQUIRE(r.flags.size() == 1);
    CHECK(r.flags[0].kind == Behavior::teleportation_or_impossible_speed);
  }
  SUBCASE("ground idle") {
    const auto t = inject_defect(good, {DefectKind::ground_idle, 0, 30});
    const auto f = detect_taxiing(t, cfg);
    REQUIRE(f.size() == 1);
    CHECK(f[0].t_end - f[0].t_start >= 30 - 1e-9);
  }
  SUBCASE("frozen midair") {
    SortieStart start;
    start.altitude = 100;
    const auto base = gen_good_sortie(3, {segment(SegmentKind::level_cruise, 60, 100)}, 0.2, start);
    const auto t = inject_defect(base, {DefectKind::frozen_midair, 20, 10});
    const auto f = detect_irregular_stop(t, cfg);
    REQUIRE(f.size() == 1);
    CHECK(f[0].t_start == doctest::Approx(20));
    CHECK(f[0].t_end == doctest::Approx(30));
  }
  SUBCASE("impossible speed") {
    const auto t = inject_defect(good, {DefectKind::impossible_speed, 60, 5});
    CHECK_FALSE(detect_impossible_speed(t, cfg).empty());
    CHECK(t.duration() < good.duration());
  }
  SUBCASE("straight line") {
    const auto t = inject_defect(good, {DefectKind::straight_line_only, 0, 80});
    const auto h = channel_extract(t, Channel::heading);
    CHECK(std::set<double>(h.begin(), h.end()).size() == 1);
    CHECK(t.duration() == doctest::Approx(good.duration()));
  }
  SUBCASE("out of range") {
    CHECK_THROWS_AS(inject_defect(good, {DefectKind::teleport, good.t_last() + 5, 5000}), Error);
    CHECK_THROWS_AS(inject_defect(good, {DefectKind::teleport, -1, 5000}), Error);
  }
}

TEST_CASE("embed_template") {
  const auto templates = standard_templates();
  const auto& tmpl = templates[0];

  SUBCASE("identity splice") {
    const auto base = testing::level_cruise(tmpl.trajectory.duration(), 7);
    const auto out = embed_template(base, tmpl, 0);
    REQUIRE(out.size() == tmpl.trajectory.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(out[i].roll == doctest::Approx(tmpl.trajectory[i].roll));
      CHECK(out[i].vx == doctest::Approx(tmpl.trajectory[i].vx));
    }
  }
  SUBCASE("region first differences match the template") {
    const double t0 = 100;
    const auto out = testing::embedded_fixture(tmpl, t0, 3);
    std::size_t k = 0;
    while (out[k].t < t0 - 1e-9) ++k;
    for (std::size_t j = 0; j + 1 < tmpl.trajectory.size(); ++j) {
      const auto& a = tmpl.trajectory[j];
      const auto& b = tmpl.trajectory[j + 1];
      CHECK(std::abs((out[k + j + 1].x_east - out[k + j].x_east) - (b.x_east - a.x_east)) <= 1e-9);
      CHECK(std::abs((out[k + j + 1].roll - out[k + j].roll) - (b.roll - a.roll)) <= 1e-9);
    }
    CHECK(validate_samples(out.samples()).empty());
    REQUIRE(out.annotations().size() == 1);
    CHECK(out.annotations()[0].name == tmpl.name);
    CHECK(label_sortie(out).clean);
  }
  SUBCASE("does not fit") {
    const auto base = testing::level_cruise(20, 1);
    CHECK_THROWS_AS(embed_template(base, tmpl, 0), Error);
  }
}

TEST_CASE("gen_corpus layout, manifest and determinism") {
  testing::TempDir a("corpus-a"), b("corpus-b");
  const auto m = gen_corpus(3, 5, 11, a.path());
  gen_corpus(3, 5, 11, b.path());
  CHECK(m.entries.size() == 8);
  std::set<std::string> ids;
  for (const auto& e : m.entries) {
    ids.insert(e.sortie_id);
    CHECK(std::filesystem::exists(a.path() / e.file));
    CHECK(read_text_file(a.path() / e.file) == read_text_file(b.path() / e.file));
    CHECK(e.file.rfind(e.truth_good ? "good/" : "bad/", 0) == 0);
    CHECK(e.defects.size() == (e.truth_good ? 0u : 1u));
  }
  CHECK(ids.size() == 8);
  CHECK(read_text_file(a.path() / "manifest.json") == read_text_file(b.path() / "manifest.json"));
  const auto back = load_manifest(a.path() / "manifest.json");
  CHECK(manifest_to_json(back) == manifest_to_json(m));

  std::set<DefectKind> kinds;
  for (const auto& e : m.entries) {
    for (const auto& d : e.defects) kinds.insert(d.kind);
  }
  CHECK(kinds.size() == 5);

  testing::TempDir empty("corpus-empty");
  CHECK(gen_corpus(0, 0, 1, empty.path()).entries.empty());
  CHECK(std::filesystem::is_directory(empty.path() / "good"));
  CHECK(std::filesystem::is_directory(empty.path() / "bad"));
}

TEST_CASE("imbalanced ratio") {
  const std::size_t good = 880;
  const std::size_t bad = imbalanced_bad_count(good);
  CHECK(bad == 120);
  CHECK(static_cast<double>(good) / static_cast<double>(good + bad) == doctest::Approx(0.88));
}
