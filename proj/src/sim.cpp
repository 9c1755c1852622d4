#include "flightlab/sim.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <cmath>
#include <numbers>
#include <random>

#include "flightlab/error.hpp"
#include "flightlab/tsv.hpp"

namespace flightlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;
constexpr double kGravity = 9.80665;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed ^ (0x9E3779B97F4A7C15ull * (stream + 0x632BE59BD9B4E019ull));
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

struct Command {
  double speed;
  double turn_rate;  // deg/s
  double climb_rate;
};

Command command_at(const SegmentSpec& s, double tau) {
  switch (s.kind) {
    case SegmentKind::level_cruise: return {s.speed, 0, 0};
    case SegmentKind::constant_rate_turn: return {s.speed, s.turn_rate, 0};
    case SegmentKind::climb: return {s.speed, 0, std::abs(s.climb_rate)};
    case SegmentKind::descent: return {s.speed, 0, -std::abs(s.climb_rate)};
    case SegmentKind::s_turn:
      return {s.speed, s.turn_rate * std::sin(2 * kPi * tau / s.duration), 0};
  }
  return {s.speed, 0, 0};
}

void check_segment(const SegmentSpec& s) {
  if (!std::isfinite(s.duration) || !(s.duration > 0)) {
    throw Error(Errc::InvalidSegment, "segment duration must be > 0");
  }
  if (!(s.speed > 30 && s.speed < 160)) {
    throw Error(Errc::InvalidSegment, "segment speed must lie in (30, 160) m/s");
  }
  if (!std::isfinite(s.turn_rate) || !std::isfinite(s.climb_rate)) {
    throw Error(Errc::InvalidSegment, "non-finite segment parameter");
  }
  if (std::abs(s.climb_rate) >= s.speed) {
    throw Error(Errc::InvalidSegment, "climb rate exceeds speed");
  }
  if ((s.kind == SegmentKind::climb || s.kind == SegmentKind::descent) && s.climb_rate == 0) {
    throw Error(Errc::InvalidSegment, "climb/descent needs a non-zero climb rate");
  }
}

/// Smooth bounded position perturbation, zero at t = 0; z part is non-negative.
struct Wobble {
  double ax, ay, az, px, py, pz;

  explicit Wobble(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    ax = uniform(rng, 0.05, 0.4);
    ay = uniform(rng, 0.05, 0.4);
    az = uniform(rng, 0.05, 0.4);
    px = uniform(rng, 40, 120);
    py = uniform(rng, 40, 120);
    pz = uniform(rng, 40, 120);
  }
  double x(double t) const { return ax * std::sin(2 * kPi * t / px); }
  double y(double t) const { return ay * std::sin(2 * kPi * t / py); }
  double z(double t) const { return az * 0.5 * (1 - std::cos(2 * kPi * t / pz)); }
};

TrajectorySample make_sample(double t, double x, double y, double z, double heading,
                             const Command& c) {
  TrajectorySample s;
  s.t = t;
  s.x_east = x;
  s.y_north = y;
  s.z_up = z;
  s.vx = c.speed * std::sin(heading * kDeg);
  s.vy = c.speed * std::cos(heading * kDeg);
  s.vz = c.climb_rate;
  s.heading = normalize_heading(heading);
  s.pitch = std::atan2(c.climb_rate, c.speed) / kDeg;
  s.roll = std::atan(c.speed * c.turn_rate * kDeg / kGravity) / kDeg;
  return s;
}

std::size_t index_at_or_after(std::span<const TrajectorySample> s, double t) {
  return static_cast<std::size_t>(
      std::lower_bound(s.begin(), s.end(), t - 1e-9,
                       [](const TrajectorySample& a, double v) { return a.t < v; }) -
      s.begin());
}

std::array<double, 3> position_at(std::span<const TrajectorySample> s, double t) {
  const std::size_t hi = std::min(index_at_or_after(s, t), s.size() - 1);
  if (hi == 0) return {s[0].x_east, s[0].y_north, s[0].z_up};
  const auto& a = s[hi - 1];
  const auto& b = s[hi];
  const double f = std::clamp((t - a.t) / (b.t - a.t), 0.0, 1.0);
  return {a.x_east + (b.x_east - a.x_east) * f, a.y_north + (b.y_north - a.y_north) * f,
          a.z_up + (b.z_up - a.z_up) * f};
}

}  // namespace

std::string_view segment_kind_name(SegmentKind k) noexcept {
  switch (k) {
    case SegmentKind::level_cruise: return "level_cruise";
    case SegmentKind::constant_rate_turn: return "constant_rate_turn";
    case SegmentKind::climb: return "climb";
    case SegmentKind::descent: return "descent";
    case SegmentKind::s_turn: return "s_turn";
  }
  return "unknown";
}

std::string_view defect_kind_name(DefectKind k) noexcept {
  switch (k) {
    case DefectKind::teleport: return "teleport";
    case DefectKind::impossible_speed: return "impossible_speed";
    case DefectKind::frozen_midair: return "frozen_midair";
    case DefectKind::ground_idle: return "ground_idle";
    case DefectKind::straight_line_only: return "straight_line_only";
  }
  return "unknown";
}

Trajectory gen_good_sortie(std::uint64_t seed, const std::vector<SegmentSpec>& segments,
                           double dt, const SortieStart& start) {
  if (segments.empty()) throw Error(Errc::InvalidSegment, "no segments");
  if (!(dt > 0)) throw Error(Errc::InvalidArgument, "dt must be > 0");
  for (const auto& s : segments) check_segment(s);

  const Wobble wobble(seed);
  double x = 0, y = 0, z = start.altitude, heading = start.heading;
  std::vector<TrajectorySample> out;
  std::size_t k = 0;
  for (const auto& seg : segments) {
    const auto steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(seg.duration / dt)));
    for (std::size_t j = 0; j < steps; ++j, ++k) {
      const double t = static_cast<double>(k) * dt;
      const Command c = command_at(seg, static_cast<double>(j) * dt);
      out.push_back(make_sample(t, x + wobble.x(t), y + wobble.y(t), z + wobble.z(t), heading, c));
      x += c.speed * std::sin(heading * kDeg) * dt;
      y += c.speed * std::cos(heading * kDeg) * dt;
      z += c.climb_rate * dt;
      heading += c.turn_rate * dt;
      if (z < -1e-9) throw Error(Errc::InvalidSegment, "segment descends below ground level");
    }
  }
  const double t = static_cast<double>(k) * dt;
  const Command last = command_at(segments.back(), segments.back().duration);
  out.push_back(make_sample(t, x + wobble.x(t), y + wobble.y(t), z + wobble.z(t), heading, last));
  return Trajectory(start.sortie_id, std::move(out));
}

Trajectory inject_defect(const Trajectory& traj, const DefectSpec& defect) {
  const auto src = traj.samples();
  if (!(defect.at >= traj.t_first() && defect.at <= traj.t_last())) {
    throw Error(Errc::DefectOutOfRange, "defect time outside the sortie");
  }
  const double dt = native_period(traj);
  std::vector<TrajectorySample> out;

  switch (defect.kind) {
    case DefectKind::teleport: {
      if (defect.at >= traj.t_last()) throw Error(Errc::DefectOutOfRange, "no samples after jump");
      for (auto s : src) {
        if (s.t > defect.at) s.x_east += defect.magnitude;
        out.push_back(s);
      }
      break;
    }
    case DefectKind::impossible_speed: {
      const std::size_t a = index_at_or_after(src, defect.at);
      std::size_t b = a;
      while (b + 1 < src.size() && src[b + 1].t <= defect.at + defect.magnitude + 1e-9) ++b;
      if (b <= a) throw Error(Errc::DefectOutOfRange, "compressed stretch holds no interval");
      double slowest = std::numeric_limits<double>::infinity();
      for (std::size_t i = a; i < b; ++i) {
        const double dx = src[i + 1].x_east - src[i].x_east;
        const double dy = src[i + 1].y_north - src[i].y_north;
        const double dz = src[i + 1].z_up - src[i].z_up;
        slowest = std::min(slowest, std::sqrt(dx * dx + dy * dy + dz * dz) / (src[i + 1].t - src[i].t));
      }
      // Push the slowest interval to 2.5x the default impossible-speed threshold.
      const double factor = std::clamp(450.0 / std::max(slowest, 1e-3), 2.0, 1e4);
      const double t0 = src[a].t;
      const double removed = (src[b].t - t0) * (1.0 - 1.0 / factor);
      for (std::size_t i = 0; i < src.size(); ++i) {
        auto s = src[i];
        if (i > a && i <= b) s.t = t0 + (s.t - t0) / factor;
        if (i > b) s.t -= removed;
        out.push_back(s);
      }
      break;
    }
    case DefectKind::frozen_midair: {
      const std::size_t hold = index_at_or_after(src, defect.at);
      if (hold + 1 >= src.size()) throw Error(Errc::DefectOutOfRange, "no samples after hold");
      const auto steps = static_cast<std::size_t>(std::lround(defect.magnitude / dt));
      if (steps == 0) throw Error(Errc::InvalidArgument, "hold shorter than one sample");
      out.assign(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(hold) + 1);
      auto frozen = src[hold];
      frozen.vx = frozen.vy = frozen.vz = 0;
      frozen.roll = 0;
      out.back() = frozen;
      for (std::size_t j = 1; j <= steps; ++j) {
        auto s = frozen;
        s.t = frozen.t + static_cast<double>(j) * dt;
        out.push_back(s);
      }
      const double shift = static_cast<double>(steps) * dt;
      for (std::size_t i = hold + 1; i < src.size(); ++i) {
        auto s = src[i];
        s.t += shift;
        out.push_back(s);
      }
      break;
    }
    case DefectKind::ground_idle: {
      const auto steps = static_cast<std::size_t>(std::lround(defect.magnitude / dt));
      if (steps == 0) throw Error(Errc::InvalidArgument, "idle shorter than one sample");
      constexpr double creep = 0.5;  // m/s
      const auto& first = src.front();
      const double hx = std::sin(first.heading * kDeg);
      const double hy = std::cos(first.heading * kDeg);
      for (std::size_t j = 0; j < steps; ++j) {
        TrajectorySample s;
        const double back = creep * static_cast<double>(steps - j) * dt;
        s.t = first.t + static_cast<double>(j) * dt;
        s.x_east = first.x_east - hx * back;
        s.y_north = first.y_north - hy * back;
        s.z_up = 0.3;
        s.vx = creep * hx;
        s.vy = creep * hy;
        s.heading = first.heading;
        out.push_back(s);
      }
      const double shift = static_cast<double>(steps) * dt;
      for (auto s : src) {
        s.t += shift;
        out.push_back(s);
      }
      break;
    }
    case DefectKind::straight_line_only: {
      const double speed = defect.magnitude > 0 ? defect.magnitude : 100.0;
      const auto& first = src.front();
      const double hx = std::sin(first.heading * kDeg);
      const double hy = std::cos(first.heading * kDeg);
      const auto steps = static_cast<std::size_t>(std::lround(traj.duration() / dt));
      for (std::size_t j = 0; j <= steps; ++j) {
        const double tau = static_cast<double>(j) * dt;
        TrajectorySample s;
        s.t = first.t + tau;
        s.x_east = first.x_east + hx * speed * tau;
        s.y_north = first.y_north + hy * speed * tau;
        s.z_up = first.z_up;
        s.vx = hx * speed;
        s.vy = hy * speed;
        s.heading = first.heading;
        out.push_back(s);
      }
      break;
    }
  }
  Trajectory result(traj.sortie_id(), std::move(out), traj.source());
  for (const auto& a : traj.annotations()) result = result.with_annotation(a);
  return result;
}

Trajectory embed_template(const Trajectory& base, const ManeuverTemplate& tmpl, double t_start) {
  const auto b = base.samples();
  const auto m = tmpl.trajectory.samples();
  const double span = tmpl.trajectory.duration();
  if (t_start < base.t_first() - 1e-9 || t_start + span > base.t_last() + 1e-9) {
    throw Error(Errc::DoesNotFit, "template does not fit at t_start");
  }
  const double t_end = t_start + span;
  const auto at_start = position_at(b, t_start);
  const double ox = at_start[0] - m.front().x_east;
  const double oy = at_start[1] - m.front().y_north;
  const double oz = at_start[2] - m.front().z_up;

  std::vector<TrajectorySample> out;
  for (const auto& s : b) {
    if (s.t < t_start - 1e-9) out.push_back(s);
  }
  for (auto s : m) {
    s.t = t_start + (s.t - m.front().t);
    s.x_east += ox;
    s.y_north += oy;
    s.z_up += oz;
    out.push_back(s);
  }
  const auto at_end = position_at(b, t_end);
  const double ex = out.back().x_east - at_end[0];
  const double ey = out.back().y_north - at_end[1];
  const double ez = out.back().z_up - at_end[2];
  for (auto s : b) {
    if (s.t <= t_end + 1e-9) continue;
    s.x_east += ex;
    s.y_north += ey;
    s.z_up += ez;
    out.push_back(s);
  }
  Trajectory result(base.sortie_id(), std::move(out), base.source());
  for (const auto& a : base.annotations()) result = result.with_annotation(a);
  return result.with_annotation({tmpl.name, t_start, t_end});
}

// ---------------------------------------------------------------- Corpus

nlohmann::json manifest_to_json(const CorpusManifest& m) {
  auto entries = nlohmann::json::array();
  for (const auto& e : m.entries) {
    auto defects = nlohmann::json::array();
    for (const auto& d : e.defects) {
      defects.push_back({{"kind", defect_kind_name(d.kind)}, {"at", d.at}, {"magnitude", d.magnitude}});
    }
    auto embedded = nlohmann::json::array();
    for (const auto& a : e.embedded_templates) {
      embedded.push_back({{"name", a.name}, {"t_start", a.t_start}});
    }
    entries.push_back({{"sortie_id", e.sortie_id},
                       {"file", e.file},
                       {"truth_quality", e.truth_good ? "good" : "bad"},
                       {"defects", std::move(defects)},
                       {"embedded_templates", std::move(embedded)}});
  }
  return {{"seed", m.seed}, {"dt", m.dt}, {"entries", std::move(entries)}};
}

CorpusManifest manifest_from_json(const nlohmann::json& j) {
  try {
    CorpusManifest m;
    m.seed = j.value("seed", std::uint64_t{0});
    m.dt = j.value("dt", 0.2);
    for (const auto& e : j.at("entries")) {
      CorpusEntry entry;
      entry.sortie_id = e.at("sortie_id").get<std::string>();
      entry.file = e.at("file").get<std::string>();
      const auto q = e.at("truth_quality").get<std::string>();
      if (q != "good" && q != "bad") throw Error(Errc::InvalidArgument, "bad truth_quality " + q);
      entry.truth_good = q == "good";
      for (const auto& d : e.value("defects", nlohmann::json::array())) {
        const auto name = d.at("kind").get<std::string>();
        auto it = std::find_if(kAllDefects.begin(), kAllDefects.end(),
                               [&](DefectKind k) { return defect_kind_name(k) == name; });
        if (it == kAllDefects.end()) throw Error(Errc::InvalidArgument, "unknown defect " + name);
        entry.defects.push_back({*it, d.at("at").get<double>(), d.at("magnitude").get<double>()});
      }
      for (const auto& a : e.value("embedded_templates", nlohmann::json::array())) {
        entry.embedded_templates.push_back(
            {a.at("name").get<std::string>(), a.at("t_start").get<double>(), 0});
      }
      m.entries.push_back(std::move(entry));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("malformed manifest: ") + e.what());
  }
}

CorpusManifest load_manifest(const std::filesystem::path& path) {
  try {
    return manifest_from_json(nlohmann::json::parse(read_text_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("manifest is not JSON: ") + e.what());
  }
}

Trajectory random_good_sortie(std::uint64_t seed, double dt, std::string sortie_id) {
  std::mt19937_64 rng(derive_seed(seed, 1));
  std::vector<SegmentSpec> segs;
  auto whole_seconds = [&](double lo, double hi) { return std::round(uniform(rng, lo, hi)); };

  SegmentSpec climb;
  climb.kind = SegmentKind::climb;
  climb.duration = 30;
  climb.speed = uniform(rng, 70, 120);
  climb.climb_rate = uniform(rng, 5, 12);
  segs.push_back(climb);
  double altitude = climb.duration * climb.climb_rate;

  const int extra = std::uniform_int_distribution<int>(4, 7)(rng);
  const int turn_slot = std::uniform_int_distribution<int>(0, extra - 1)(rng);
  for (int i = 0; i < extra; ++i) {
    SegmentSpec s;
    s.speed = uniform(rng, 60, 140);
    const int pick = i == turn_slot ? 1 : std::uniform_int_distribution<int>(0, 4)(rng);
    const double sign = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
    switch (pick) {
      case 0:
        s.kind = SegmentKind::level_cruise;
        s.duration = whole_seconds(10, 40);
        break;
      case 1: {
        s.kind = SegmentKind::constant_rate_turn;
        s.turn_rate = sign * uniform(rng, 2, 6);
        const double degrees = uniform(rng, 90, 360);
        s.duration = std::ceil(degrees / std::abs(s.turn_rate));
        break;
      }
      case 2:
        s.kind = SegmentKind::climb;
        s.climb_rate = uniform(rng, 3, 10);
        s.duration = whole_seconds(10, 30);
        altitude += s.climb_rate * s.duration;
        break;
      case 3: {
        s.kind = SegmentKind::descent;
        s.climb_rate = uniform(rng, 3, 10);
        s.duration = whole_seconds(10, 30);
        if (altitude - s.climb_rate * s.duration < 100) {
          s.kind = SegmentKind::level_cruise;
          s.climb_rate = 0;
        } else {
          altitude -= s.climb_rate * s.duration;
        }
        break;
      }
      default:
        s.kind = SegmentKind::s_turn;
        s.turn_rate = sign * uniform(rng, 3, 8);
        s.duration = whole_seconds(20, 40);
        break;
    }
    segs.push_back(s);
  }
  SortieStart start;
  start.heading = std::floor(uniform(rng, 0, 360));
  start.sortie_id = std::move(sortie_id);
  return gen_good_sortie(derive_seed(seed, 2), segs, dt, start);
}

std::vector<GeneratedSortie> generate_sorties(std::size_t n_good, std::size_t n_bad,
                                              std::uint64_t seed, double dt) {
  const std::size_t total = n_good + n_bad;
  std::vector<std::size_t> numbers(total);
  for (std::size_t i = 0; i < total; ++i) numbers[i] = i + 1;
  std::mt19937_64 id_rng(derive_seed(seed, 0));
  std::shuffle(numbers.begin(), numbers.end(), id_rng);

  std::vector<GeneratedSortie> out;
  out.reserve(total);
  char id[32];
  for (std::size_t i = 0; i < total; ++i) {
    std::snprintf(id, sizeof id, "S%06zu", numbers[i]);
    const bool good = i < n_good;
    CorpusEntry entry;
    entry.sortie_id = id;
    entry.truth_good = good;
    entry.file = std::string(good ? "good/" : "bad/") + id + ".tsv";
    const std::uint64_t s = derive_seed(seed, 1000 + i);
    Trajectory traj = random_good_sortie(s, dt, id);
    if (!good) {
      std::mt19937_64 rng(derive_seed(s, 7));
      const DefectKind kind = kAllDefects[(i - n_good) % kAllDefects.size()];
      const double d = traj.duration();
      DefectSpec defect{kind, 0, 0};
      switch (kind) {
        case DefectKind::teleport:
          defect.at = std::round(uniform(rng, 0.3, 0.7) * d * 10) / 10;
          defect.magnitude = std::round(uniform(rng, 2000, 8000));
          break;
        case DefectKind::impossible_speed:
          defect.at = std::round(uniform(rng, 0.3, 0.6) * d * 10) / 10;
          defect.magnitude = std::round(uniform(rng, 5, 30));
          break;
        case DefectKind::frozen_midair:
          defect.at = std::round(uniform(rng, 0.3, 0.7) * d * 10) / 10;
          defect.magnitude = std::round(uniform(rng, 8, 20));
          break;
        case DefectKind::ground_idle:
          defect.at = traj.t_first();
          defect.magnitude = std::round(uniform(rng, 20, 60));
          break;
        case DefectKind::straight_line_only:
          defect.at = traj.t_first();
          defect.magnitude = std::round(uniform(rng, 60, 140));
          break;
      }
      traj = inject_defect(traj, defect);
      entry.defects.push_back(defect);
    }
    out.push_back({std::move(entry), std::move(traj)});
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.entry.sortie_id < b.entry.sortie_id; });
  return out;
}

CorpusManifest gen_corpus(std::size_t n_good, std::size_t n_bad, std::uint64_t seed,
                          const std::filesystem::path& out_dir, double dt) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "good", ec);
  if (!ec) std::filesystem::create_directories(out_dir / "bad", ec);
  if (ec) throw Error(Errc::IOFailure, "cannot create corpus directories under " + out_dir.string());

  CorpusManifest manifest;
  manifest.seed = seed;
  manifest.dt = dt;
  for (auto& g : generate_sorties(n_good, n_bad, seed, dt)) {
    write_text_file(out_dir / g.entry.file, write_tsv(g.trajectory));
    manifest.entries.push_back(std::move(g.entry));
  }
  write_text_file(out_dir / "manifest.json", manifest_to_json(manifest).dump(2) + "\n");
  return manifest;
}

std::size_t imbalanced_bad_count(std::size_t n_good) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(n_good) * 12.0 / 88.0));
}

std::vector<ManeuverTemplate> standard_templates(double dt) {
  auto pad = [](double speed) {
    SegmentSpec s;
    s.kind = SegmentKind::level_cruise;
    s.duration = 1;
    s.speed = speed;
    return s;
  };
  auto turn = [](double rate, double duration, double speed) {
    SegmentSpec s;
    s.kind = SegmentKind::constant_rate_turn;
    s.turn_rate = rate;
    s.duration = duration;
    s.speed = speed;
    return s;
  };
  auto vertical = [](SegmentKind kind, double rate, double duration, double speed) {
    SegmentSpec s;
    s.kind = kind;
    s.climb_rate = rate;
    s.duration = duration;
    s.speed = speed;
    return s;
  };
  SegmentSpec s_turn;
  s_turn.kind = SegmentKind::s_turn;
  s_turn.turn_rate = 6;
  s_turn.duration = 40;
  s_turn.speed = 90;

  struct Spec {
    const char* name;
    SegmentSpec body;
  };
  const Spec specs[] = {
      {"left_turn", turn(-5, 36, 90)},
      {"right_turn", turn(4, 45, 90)},
      {"climb", vertical(SegmentKind::climb, 10, 30, 90)},
      {"descent", vertical(SegmentKind::descent, 8, 30, 90)},
      {"s_turn", s_turn},
  };
  const std::vector<Channel> channels = {Channel::roll, Channel::pitch, Channel::vz};
  std::vector<ManeuverTemplate> out;
  std::uint64_t seed = 11;
  for (const auto& spec : specs) {
    SortieStart start;
    start.altitude = 1000;
    start.sortie_id = spec.name;
    auto traj = gen_good_sortie(seed++, {pad(spec.body.speed), spec.body, pad(spec.body.speed)}, dt,
                                start);
    out.emplace_back(spec.name, std::move(traj), channels);
  }
  return out;
}

}  // namespace flightlab
