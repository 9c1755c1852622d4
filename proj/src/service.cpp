#include "flightlab/service.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "httplib.h"

#include "flightlab/corpus.hpp"
#include "flightlab/error.hpp"
#include "flightlab/render.hpp"
#include "flightlab/summary.hpp"
#include "flightlab/tsv.hpp"

namespace flightlab {

nlohmann::json summary_to_json(const SortieSummary& s) {
  nlohmann::json j = {{"sortie_id", s.sortie_id},
                      {"duration", s.duration},
                      {"sample_count", s.sample_count}};
  j["truth_quality"] = s.truth_good ? nlohmann::json(*s.truth_good ? "good" : "bad") : nlohmann::json();
  j["auto_quality"] = s.auto_good ? "good" : "bad";
  j["irregularities"] = s.irregularities;
  j["label_count"] = s.label_count;
  return j;
}

LabelService::LabelService(ServiceConfig cfg)
    : cfg_(std::move(cfg)), rules_(cfg_.rules ? *cfg_.rules : table1_rules()) {
  for (auto& f : load_corpus(cfg_.corpus_dir)) {
    const std::string id = f.trajectory.sortie_id();
    corpus_.emplace(id, Entry{std::move(f.trajectory), f.truth_good});
  }
  if (cfg_.templates) templates_ = load_template_library(*cfg_.templates);
  journal_ = std::make_unique<LabelJournal>(cfg_.journal_path);
}

const LabelService::Entry& LabelService::entry(const std::string& sortie_id) const {
  auto it = corpus_.find(sortie_id);
  if (it == corpus_.end()) throw Error(Errc::UnknownSortie, "unknown sortie " + sortie_id);
  return it->second;
}

const Trajectory& LabelService::trajectory(const std::string& sortie_id) const {
  return entry(sortie_id).trajectory;
}

const LabelService::Auto& LabelService::analysis(const std::string& sortie_id) const {
  const auto& e = entry(sortie_id);
  {
    std::lock_guard lock(cache_mu_);
    if (auto it = cache_.find(sortie_id); it != cache_.end()) return it->second;
  }
  Auto a{evaluate_rules(compute_summary(e.trajectory), rules_), label_sortie(e.trajectory, cfg_.detector)};
  std::lock_guard lock(cache_mu_);
  return cache_.emplace(sortie_id, std::move(a)).first->second;
}

std::vector<SortieSummary> LabelService::sorties() const {
  std::vector<SortieSummary> out;
  for (const auto& [id, e] : corpus_) {
    const auto& a = analysis(id);
    SortieSummary s;
    s.sortie_id = id;
    s.duration = e.trajectory.duration();
    s.sample_count = e.trajectory.size();
    s.truth_good = e.truth_good;
    s.auto_good = a.good;
    std::set<std::string> kinds;
    for (const auto& f : a.report.flags) kinds.insert(std::string(behavior_name(f.kind)));
    s.irregularities.assign(kinds.begin(), kinds.end());
    s.label_count = journal_->count_for(id);
    out.push_back(std::move(s));
  }
  return out;
}

nlohmann::json LabelService::auto_labels(const std::string& sortie_id) const {
  const auto& a = analysis(sortie_id);
  auto flags = nlohmann::json::array();
  for (const auto& f : a.report.flags) {
    flags.push_back({{"kind", behavior_name(f.kind)},
                     {"behavior", behavior_label(f.kind)},
                     {"t_start", f.t_start},
                     {"t_end", f.t_end}});
  }
  nlohmann::json j = {{"sortie_id", sortie_id},
                      {"auto_quality", a.good ? "good" : "bad"},
                      {"irregularities", std::move(flags)}};
  if (!templates_.empty()) {
    const auto results = match_sortie(templates_, trajectory(sortie_id));
    j["match_results"] = match_results_to_json(results);
  }
  return j;
}

LabelRecord LabelService::append_label(const std::string& sortie_id, const nlohmann::json& body,
                                       const std::string& labeler_header) {
  const Trajectory& traj = trajectory(sortie_id);
  if (!body.is_object()) throw Error(Errc::MalformedRecord, "label body must be a JSON object");

  auto string_field = [&](const char* key) -> std::optional<std::string> {
    if (!body.contains(key) || body[key].is_null()) return std::nullopt;
    if (!body[key].is_string()) throw Error(Errc::MalformedRecord, std::string(key) + " must be a string");
    return body[key].get<std::string>();
  };
  auto number_field = [&](const char* key) -> std::optional<double> {
    if (!body.contains(key) || body[key].is_null()) return std::nullopt;
    if (!body[key].is_number()) throw Error(Errc::InvalidInterval, std::string(key) + " must be a number");
    return body[key].get<double>();
  };

  LabelRecord r;
  r.sortie_id = sortie_id;
  const auto kind_name = string_field("label_kind");
  if (!kind_name) throw Error(Errc::MalformedRecord, "label_kind is required");
  const auto kind = label_kind_from_name(*kind_name);
  if (!kind) throw Error(Errc::MalformedRecord, "label_kind must be quality or maneuver");
  r.label_kind = *kind;
  r.value = string_field("value").value_or("");
  if (r.value.empty()) throw Error(Errc::MalformedRecord, "value is required");
  r.labeler_id = !labeler_header.empty() ? labeler_header : string_field("labeler_id").value_or("");
  if (r.labeler_id.empty()) throw Error(Errc::MalformedRecord, "labeler_id is required");
  r.t_start = number_field("t_start");
  r.t_end = number_field("t_end");

  if (r.label_kind == LabelKind::quality) {
    if (r.value != "good" && r.value != "bad") {
      throw Error(Errc::MalformedRecord, "quality value must be good or bad");
    }
    if (r.t_start || r.t_end) throw Error(Errc::InvalidInterval, "quality labels take no interval");
  } else {
    if (!r.t_start || !r.t_end) throw Error(Errc::InvalidInterval, "maneuver labels need t_start and t_end");
    const double a = *r.t_start, b = *r.t_end;
    if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
      throw Error(Errc::InvalidInterval, "t_start must be below t_end");
    }
    if (a < traj.t_first() || b > traj.t_last()) {
      throw Error(Errc::InvalidInterval, "interval lies outside the sortie");
    }
  }
  return journal_->append(std::move(r));
}

std::vector<LabelRecord> LabelService::export_labels(const LabelFilter& filter) const {
  return journal_->export_labels(filter);
}

// ---------------------------------------------------------------- HTTP

namespace {

int http_status(Errc code) {
  switch (code) {
    case Errc::UnknownSortie: return 404;
    case Errc::InvalidInterval: return 422;
    case Errc::MalformedRecord:
    case Errc::InvalidArgument: return 400;
    default: return 500;
  }
}

void send_json(httplib::Response& res, const nlohmann::json& j, int status = 200) {
  res.status = status;
  res.set_content(j.dump(), "application/json");
}

void send_error(httplib::Response& res, Errc code, const std::string& detail) {
  send_json(res, {{"error", errc_name(code)}, {"detail", detail}}, http_status(code));
}

int int_param(const httplib::Request& req, const char* name) {
  const auto v = req.get_param_value(name);
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw Error(Errc::InvalidArgument, std::string(name) + " must be an integer");
  }
  return out;
}

template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    send_error(res, e.code(), e.detail());
  } catch (const nlohmann::json::exception& e) {
    send_error(res, Errc::MalformedRecord, e.what());
  } catch (const std::exception& e) {
    send_json(res, {{"error", "Internal"}, {"detail", e.what()}}, 500);
  }
}

}  // namespace

struct HttpService::Impl {
  LabelService& svc;
  httplib::Server server;

  explicit Impl(LabelService& s) : svc(s) {}
};

HttpService::HttpService(LabelService& service) : impl_(std::make_unique<Impl>(service)) {
  auto& svr = impl_->server;
  LabelService& svc = impl_->svc;

  svr.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Headers", "Content-Type, X-Labeler-Id"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  svr.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  svr.Get("/sorties", [&svc](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      auto arr = nlohmann::json::array();
      for (const auto& s : svc.sorties()) arr.push_back(summary_to_json(s));
      send_json(res, arr);
    });
  });
  svr.Get(R"(/sorties/([^/]+)/trajectory)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, export_json(svc.trajectory(req.matches[1]))); });
  });
  svr.Get(R"(/sorties/([^/]+)/render/(topdown|altitude))",
          [&svc](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
              const auto& t = svc.trajectory(req.matches[1]);
              PlotSpec spec;
              if (req.has_param("width")) spec.width = int_param(req, "width");
              if (req.has_param("height")) spec.height = int_param(req, "height");
              const auto svg = req.matches[2] == "topdown" ? render_topdown(t, spec) : render_altitude(t, spec);
              res.set_content(svg, "image/svg+xml");
            });
          });
  svr.Get(R"(/sorties/([^/]+)/auto)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, svc.auto_labels(req.matches[1])); });
  });
  svr.Post(R"(/sorties/([^/]+)/labels)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      nlohmann::json body;
      try {
        body = nlohmann::json::parse(req.body);
      } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::MalformedRecord, std::string("body is not JSON: ") + e.what());
      }
      const auto rec = svc.append_label(req.matches[1], body, req.get_header_value("X-Labeler-Id"));
      send_json(res, {{"record_id", rec.record_id}}, 201);
    });
  });
  svr.Get("/labels", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      LabelFilter f;
      if (req.has_param("sortie_id")) f.sortie_id = req.get_param_value("sortie_id");
      if (req.has_param("labeler_id")) f.labeler_id = req.get_param_value("labeler_id");
      if (req.has_param("label_kind")) {
        f.label_kind = label_kind_from_name(req.get_param_value("label_kind"));
        if (!f.label_kind) throw Error(Errc::InvalidArgument, "label_kind must be quality or maneuver");
      }
      auto arr = nlohmann::json::array();
      for (const auto& r : svc.export_labels(f)) arr.push_back(label_to_json(r));
      send_json(res, arr);
    });
  });
  if (svc.config().ui_dir) {
    if (!svr.set_mount_point("/ui", svc.config().ui_dir->string())) {
      throw Error(Errc::InvalidArgument, "cannot serve UI from " + svc.config().ui_dir->string());
    }
  }
}

HttpService::~HttpService() { stop(); }

int HttpService::bind(const std::string& host, int port) {
  auto& svr = impl_->server;
  if (port == 0) {
    const int p = svr.bind_to_any_port(host);
    if (p < 0) throw Error(Errc::BindFailure, "cannot bind " + host);
    return p;
  }
  if (!svr.bind_to_port(host, port)) {
    throw Error(Errc::BindFailure, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpService::listen() { impl_->server.listen_after_bind(); }

void HttpService::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void HttpService::wait_until_ready() const { impl_->server.wait_until_ready(); }

std::pair<std::string, int> parse_bind_address(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw Error(Errc::InvalidArgument, "bind address must be HOST:PORT");
  std::string host = addr.substr(0, colon);
  if (host.empty()) host = "0.0.0.0";
  int port = -1;
  const char* b = addr.data() + colon + 1;
  const char* e = addr.data() + addr.size();
  const auto [ptr, ec] = std::from_chars(b, e, port);
  if (ec != std::errc{} || ptr != e || port < 0 || port > 65535) {
    throw Error(Errc::InvalidArgument, "bad port in " + addr);
  }
  return {host, port};
}

void serve(const ServiceConfig& cfg, const std::string& bind_address) {
  const auto [host, port] = parse_bind_address(bind_address);
  LabelService svc(cfg);
  HttpService http(svc);
  http.bind(host, port);
  http.listen();
}

}  // namespace flightlab
