#include <atomic>
#include <fstream>
#include <functional>
#include <set>
#include <thread>

#include "doctest.h"
#include "httplib.h"

#include "flightlab/error.hpp"
#include "flightlab/journal.hpp"
#include "flightlab/service.hpp"
#include "flightlab/sim.hpp"
#include "support.hpp"

using namespace flightlab;
using nlohmann::json;

namespace {

LabelRecord quality(std::string sid, std::string who, std::string value = "good") {
  LabelRecord r;
  r.sortie_id = std::move(sid);
  r.value = std::move(value);
  r.labeler_id = std::move(who);
  return r;
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::InvalidArgument;
}

}  // namespace

TEST_CASE("label records") {
  LabelRecord r = quality("S1", "ann");
  r.label_kind = LabelKind::maneuver;
  r.t_start = 1.5;
  r.t_end = 9;
  r.record_id = "rec-000001";
  r.created_at = utc_timestamp();
  CHECK(label_from_json(label_to_json(r)) == r);
  CHECK(r.created_at.size() == 27);
  CHECK(r.created_at.back() == 'Z');
  CHECK(code_of([] { label_from_json(json{{"sortie_id", "S1"}}); }) == Errc::MalformedRecord);
  CHECK(label_kind_from_name("maneuver") == LabelKind::maneuver);
  CHECK_FALSE(label_kind_from_name("other"));
}

TEST_CASE("journal") {
  testing::TempDir dir("journal");
  const auto path = dir / "labels.jsonl";

  SUBCASE("empty") {
    LabelJournal j(path);
    CHECK(j.size() == 0);
    CHECK(j.export_labels().empty());
  }
  SUBCASE("append, filter, replay") {
    std::vector<LabelRecord> before;
    {
      LabelJournal j(path);
      const auto a = j.append(quality("S1", "ann"));
      CHECK(a.record_id == "rec-000001");
      CHECK_FALSE(a.created_at.empty());
      j.append(quality("S2", "bob", "bad"));
      LabelRecord m = quality("S1", "bob", "loop");
      m.label_kind = LabelKind::maneuver;
      m.t_start = 1;
      m.t_end = 2;
      j.append(m);
      CHECK(j.size() == 3);
      CHECK(j.count_for("S1") == 2);
      LabelFilter f;
      f.labeler_id = "bob";
      CHECK(j.export_labels(f).size() == 2);
      f.label_kind = LabelKind::quality;
      CHECK(j.export_labels(f).size() == 1);
      before = j.export_labels();
    }
    LabelJournal again(path);
    CHECK(again.export_labels() == before);
    CHECK(again.append(quality("S3", "ann")).record_id == "rec-000004");
  }
  SUBCASE("concurrent appends") {
    LabelJournal j(path);
    std::vector<std::thread> ts;
    for (int w = 0; w < 4; ++w) {
      ts.emplace_back([&, w] {
        for (int k = 0; k < 25; ++k) j.append(quality("S" + std::to_string(k), "w" + std::to_string(w)));
      });
    }
    for (auto& t : ts) t.join();
    const auto all = j.export_labels();
    CHECK(all.size() == 100);
    std::set<std::string> ids;
    for (const auto& r : all) ids.insert(r.record_id);
    CHECK(ids.size() == 100);
  }
  SUBCASE("torn tail is dropped") {
    {
      LabelJournal j(path);
      j.append(quality("S1", "ann"));
    }
    std::ofstream(path, std::ios::app) << "{\"sortie_id\": \"S";
    LabelJournal j(path);
    CHECK(j.size() == 1);
    j.append(quality("S2", "ann"));
    CHECK(j.size() == 2);
  }
  SUBCASE("corrupt middle line") {
    std::ofstream(path) << "not json\n";
    CHECK(code_of([&] { LabelJournal j(path); }) == Errc::MalformedRecord);
  }
  SUBCASE("locked") {
    LabelJournal j(path);
    CHECK(code_of([&] { LabelJournal k(path); }) == Errc::JournalLocked);
    CHECK(code_of([&] { LabelJournal k(dir / "missing" / "x.jsonl"); }) == Errc::JournalLocked);
  }
}

TEST_CASE("label service") {
  testing::TempDir dir("svc");
  gen_corpus(3, 2, 7, dir / "corpus");
  ServiceConfig cfg;
  cfg.corpus_dir = dir / "corpus";
  cfg.journal_path = dir / "labels.jsonl";
  LabelService svc(cfg);

  const auto list = svc.sorties();
  REQUIRE(list.size() == 5);
  const std::string sid = list[0].sortie_id;
  const auto& t = svc.trajectory(sid);

  SUBCASE("summaries and auto labels") {
    std::size_t bad = 0;
    for (const auto& s : list) {
      REQUIRE(s.truth_good.has_value());
      if (!*s.truth_good) ++bad;
      CHECK(s.label_count == 0);
    }
    CHECK(bad == 2);
    const auto a = svc.auto_labels(sid);
    CHECK(a["sortie_id"] == sid);
    CHECK(a.contains("irregularities"));
    CHECK(summary_to_json(list[0])["sortie_id"] == sid);
  }
  SUBCASE("quality label") {
    const auto r = svc.append_label(sid, {{"label_kind", "quality"}, {"value", "bad"}, {"labeler_id", "ann"}});
    CHECK(r.sortie_id == sid);
    CHECK(svc.sorties()[0].label_count == 1);
    CHECK(code_of([&] { svc.append_label(sid, {{"label_kind", "quality"}, {"value", "meh"}, {"labeler_id", "a"}}); }) ==
          Errc::MalformedRecord);
    CHECK(code_of([&] { svc.append_label(sid, {{"label_kind", "quality"}, {"value", "good"}}); }) ==
          Errc::MalformedRecord);
  }
  SUBCASE("header wins") {
    const auto r = svc.append_label(sid, {{"label_kind", "quality"}, {"value", "good"}, {"labeler_id", "body"}}, "head");
    CHECK(r.labeler_id == "head");
  }
  SUBCASE("maneuver intervals") {
    const json ok{{"label_kind", "maneuver"}, {"value", "loop"}, {"labeler_id", "a"}, {"t_start", 1.0}, {"t_end", 5.0}};
    CHECK(svc.append_label(sid, ok).t_end == 5.0);
    auto inverted = ok;
    inverted["t_start"] = 6.0;
    CHECK(code_of([&] { svc.append_label(sid, inverted); }) == Errc::InvalidInterval);
    auto outside = ok;
    outside["t_end"] = t.t_last() + 10;
    CHECK(code_of([&] { svc.append_label(sid, outside); }) == Errc::InvalidInterval);
    auto missing = ok;
    missing.erase("t_end");
    CHECK(code_of([&] { svc.append_label(sid, missing); }) == Errc::InvalidInterval);
  }
  SUBCASE("unknown sortie") {
    CHECK(code_of([&] { svc.trajectory("nope"); }) == Errc::UnknownSortie);
    CHECK(code_of([&] { svc.append_label("nope", {{"label_kind", "quality"}, {"value", "good"}, {"labeler_id", "a"}}); }) ==
          Errc::UnknownSortie);
  }
  SUBCASE("missing corpus") {
    ServiceConfig c2 = cfg;
    c2.corpus_dir = dir / "nothing";
    c2.journal_path = dir / "other.jsonl";
    CHECK(code_of([&] { LabelService s(c2); }) == Errc::CorpusNotFound);
  }
}

TEST_CASE("http front end") {
  testing::TempDir dir("http");
  gen_corpus(2, 1, 3, dir / "corpus");
  ServiceConfig cfg;
  cfg.corpus_dir = dir / "corpus";
  cfg.journal_path = dir / "labels.jsonl";
  LabelService svc(cfg);
  HttpService http(svc);
  const int port = http.bind("127.0.0.1", 0);
  std::thread server([&] { http.listen(); });
  http.wait_until_ready();

  httplib::Client c("127.0.0.1", port);
  auto list = c.Get("/sorties");
  REQUIRE(list);
  CHECK(list->status == 200);
  CHECK(list->get_header_value("Access-Control-Allow-Origin") == "*");
  const auto sorties = json::parse(list->body);
  REQUIRE(sorties.size() == 3);
  const std::string sid = sorties[0]["sortie_id"];
  const std::string base = "/sorties/" + sid;

  CHECK(c.Get(base + "/trajectory")->status == 200);
  const auto svg = c.Get(base + "/render/topdown?width=300&height=200");
  CHECK(svg->status == 200);
  CHECK(svg->body.find("width=\"300\"") != std::string::npos);
  CHECK(c.Get(base + "/render/altitude?width=abc")->status == 400);
  CHECK(c.Get(base + "/auto")->status == 200);
  CHECK(c.Get("/sorties/nope/trajectory")->status == 404);

  const json good{{"label_kind", "quality"}, {"value", "good"}, {"labeler_id", "ann"}};
  const auto posted = c.Post(base + "/labels", good.dump(), "application/json");
  CHECK(posted->status == 201);
  CHECK(json::parse(posted->body).contains("record_id"));
  CHECK(c.Post(base + "/labels", "{", "application/json")->status == 400);
  const json bad_interval{{"label_kind", "maneuver"}, {"value", "x"}, {"labeler_id", "a"}, {"t_start", 5.0}, {"t_end", 1.0}};
  CHECK(c.Post(base + "/labels", bad_interval.dump(), "application/json")->status == 422);
  CHECK(c.Post("/sorties/nope/labels", good.dump(), "application/json")->status == 404);

  const auto labels = c.Get("/labels?labeler_id=ann");
  CHECK(json::parse(labels->body).size() == 1);
  CHECK(json::parse(c.Get("/labels?labeler_id=bob")->body).empty());
  CHECK(c.Get("/labels?label_kind=other")->status == 400);
  CHECK(c.Options("/labels")->status == 204);

  http.stop();
  server.join();

  HttpService other(svc);
  CHECK(code_of([&] { other.bind("256.0.0.1", 0); }) == Errc::BindFailure);
}

TEST_CASE("bind address") {
  CHECK(parse_bind_address("127.0.0.1:8080") == std::pair<std::string, int>("127.0.0.1", 8080));
  CHECK(parse_bind_address(":9000").first == "0.0.0.0");
  CHECK(code_of([] { parse_bind_address("localhost"); }) == Errc::InvalidArgument);
  CHECK(code_of([] { parse_bind_address("h:70000"); }) == Errc::InvalidArgument);
}
