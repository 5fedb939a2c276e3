#include "o3dsp/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "o3dsp/errors.hpp"

namespace o3dsp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct KeyValues {
  std::map<std::string, std::pair<std::string, std::size_t>> entries;
  std::set<std::string> consumed;

  void insert(const std::string& key, const std::string& value,
              std::size_t line) {
    if (entries.count(key))
      throw ParseError("config line " + std::to_string(line) +
                       ": duplicate key '" + key + "'");
    entries.emplace(key, std::make_pair(value, line));
  }

  const std::pair<std::string, std::size_t>* find(const std::string& key) {
    consumed.insert(key);
    const auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : entries)
      if (!consumed.count(key))
        throw ParseError("config line " + std::to_string(value.second) +
                         ": unknown key '" + key + "'");
  }
};

KeyValues tokenize(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line " + std::to_string(lineno) +
                       ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ParseError("config line " + std::to_string(lineno) +
                       ": empty key or value");
    kv.insert(key, value, lineno);
  }
  return kv;
}

[[noreturn]] void bad_value(const std::string& key, std::size_t line,
                            const std::string& why) {
  throw ParseError("config line " + std::to_string(line) + ": key '" + key +
                   "' " + why);
}

double parse_double(const std::string& key,
                    const std::pair<std::string, std::size_t>& entry) {
  char* end = nullptr;
  const double v = std::strtod(entry.first.c_str(), &end);
  if (end == entry.first.c_str() || *end != '\0' || !std::isfinite(v))
    bad_value(key, entry.second, "is not a finite number");
  return v;
}

std::int64_t parse_int(const std::string& key,
                       const std::pair<std::string, std::size_t>& entry) {
  char* end = nullptr;
  const long long v = std::strtoll(entry.first.c_str(), &end, 10);
  if (end == entry.first.c_str() || *end != '\0')
    bad_value(key, entry.second, "is not an integer");
  return v;
}

class Reader {
 public:
  explicit Reader(KeyValues& kv) : kv_(kv) {}

  double number(const std::string& key, double fallback, double lo, double hi,
                bool lo_open = false) {
    const auto* e = kv_.find(key);
    if (!e) return fallback;
    const double v = parse_double(key, *e);
    if (v < lo || v > hi || (lo_open && v == lo))
      bad_value(key, e->second, "out of range");
    return v;
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback,
                       std::int64_t lo, std::int64_t hi) {
    const auto* e = kv_.find(key);
    if (!e) return fallback;
    const std::int64_t v = parse_int(key, *e);
    if (v < lo || v > hi) bad_value(key, e->second, "out of range");
    return v;
  }

  bool flag(const std::string& key, bool fallback) {
    const auto* e = kv_.find(key);
    if (!e) return fallback;
    if (e->first == "true" || e->first == "1") return true;
    if (e->first == "false" || e->first == "0") return false;
    bad_value(key, e->second, "is not a boolean (true/false/1/0)");
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const auto* e = kv_.find(key);
    return e ? e->first : fallback;
  }

  const std::pair<std::string, std::size_t>* raw(const std::string& key) {
    return kv_.find(key);
  }

 private:
  KeyValues& kv_;
};

std::vector<WSegment> parse_w_schedule(
    const std::pair<std::string, std::size_t>& entry) {
  // format: "start:w[,start:w]..." with ascending starts, first at 0
  std::vector<WSegment> schedule;
  std::istringstream in(entry.first);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      bad_value("scene.w_schedule", entry.second, "has a segment without ':'");
    char* end = nullptr;
    const std::string start_s = trim(item.substr(0, colon));
    const std::string w_s = trim(item.substr(colon + 1));
    const long long start = std::strtoll(start_s.c_str(), &end, 10);
    if (end == start_s.c_str() || *end != '\0')
      bad_value("scene.w_schedule", entry.second, "has a non-integer start");
    const double w = std::strtod(w_s.c_str(), &end);
    if (end == w_s.c_str() || *end != '\0' || w < 0.0 || w > 1.0)
      bad_value("scene.w_schedule", entry.second, "has w outside [0,1]");
    if (!schedule.empty() && start <= schedule.back().start)
      bad_value("scene.w_schedule", entry.second, "starts must ascend");
    schedule.push_back({start, w});
  }
  if (schedule.empty() || schedule.front().start != 0)
    bad_value("scene.w_schedule", entry.second, "must begin with segment 0");
  return schedule;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  KeyValues kv = tokenize(text);
  Reader r(kv);
  RunConfig cfg;

  cfg.sys.rep_period = r.number("t_r", 1500.0, 0.0, 1e12, /*lo_open=*/true);
  cfg.sys.irf_variance = r.number("s2", 200.0, 0.0, 1e12, /*lo_open=*/true);
  cfg.sys.frame_reps =
      static_cast<std::uint32_t>(r.integer("n_r", 1, 1, 1u << 30));

  cfg.params = default_filter_params(cfg.sys);
  cfg.params.rw_variance = r.number("gamma2", 100.0, 0.0, 1e12);
  cfg.params.self_prob = r.number("nu", 0.99, 0.0, 1.0, /*lo_open=*/true);
  cfg.params.attenuation = r.number("alpha", 0.01, 0.0, 1.0, /*lo_open=*/true);
  cfg.params.smooth_std = r.number("smooth_std", 0.0, 0.0, 100.0);
  cfg.params.edge_extra_weight =
      r.number("edge_weight", 0.05, 0.0, 1.0, /*lo_open=*/true);
  cfg.params.edge_extra_variance = r.number(
      "edge_variance", cfg.params.edge_extra_variance, 0.0, 1e18, true);
  cfg.params.init_weight = r.number("init_w", 0.5, 0.0, 1.0, /*lo_open=*/true);
  cfg.params.occlusion_component_enabled = r.flag("occlusion_component", false);
  cfg.params.occlusion_weight =
      r.number("occlusion_weight", 0.05, 0.0, 1.0, /*lo_open=*/true);

  const std::string neighborhood = r.text("neighborhood", "cross5");
  if (neighborhood == "self")
    cfg.params.neighborhood = Neighborhood::kSelfOnly;
  else if (neighborhood == "cross5")
    cfg.params.neighborhood = Neighborhood::kCross5;
  else if (const auto* e = r.raw("neighborhood"))
    bad_value("neighborhood", e->second, "must be 'self' or 'cross5'");

  cfg.seed = static_cast<std::uint64_t>(
      r.integer("seed", 1, 0, std::numeric_limits<std::int64_t>::max()));

  cfg.scene.height = static_cast<int>(r.integer("scene.height", 1, 1, 65535));
  cfg.scene.width = static_cast<int>(r.integer("scene.width", 1, 1, 65535));
  cfg.scene.frames = r.integer("scene.frames", 500, 1, 1000000000000000LL);

  const double t_r = cfg.sys.rep_period;
  const std::string kind = r.text("scene.kind", "sine");
  if (kind == "sine") {
    SinePixelScene s;
    s.center = r.number("scene.center", t_r / 2.0, 0.0, t_r);
    s.amplitude = r.number("scene.amplitude", 0.0, 0.0, t_r);
    s.period_frames = r.number("scene.period", 1000.0, 1.0, 1e15);
    s.detect_prob = r.number("scene.pi", 0.5, 0.0, 1.0);
    if (const auto* e = r.raw("scene.w_schedule"))
      s.w_schedule = parse_w_schedule(*e);
    cfg.scene.kind = s;
  } else if (kind == "static") {
    StaticMapsScene s;
    s.range_path = r.text("scene.range_map", "");
    s.signal_frac_path = r.text("scene.w_map", "");
    s.detect_prob_path = r.text("scene.pi_map", "");
    s.detect_prob_scale = r.number("scene.pi_scale", 1.0, 0.0, 1e6, true);
    cfg.scene.kind = s;
  } else if (kind == "rects") {
    RectDanceScene s;
    s.backplane_range = r.number("scene.backplane_range", 2000.0, 0.0, t_r);
    s.backplane_w = r.number("scene.backplane_w", 0.5, 0.0, 1.0);
    s.object_w = r.number("scene.object_w", 0.7, 0.0, 1.0);
    s.detect_prob = r.number("scene.pi", 0.5, 0.0, 1.0);
    s.obj1_half = static_cast<int>(r.integer("scene.obj1_half", 8, 1, 1024));
    s.obj1_range = r.number("scene.obj1_range", 1200.0, 0.0, t_r);
    s.obj1_angle_deg = r.number("scene.obj1_angle", 0.0, -360.0, 360.0);
    s.obj2_half = static_cast<int>(r.integer("scene.obj2_half", 10, 1, 1024));
    s.obj2_range = r.number("scene.obj2_range", 600.0, 0.0, t_r);
    s.orbit_radius = r.number("scene.orbit_radius", 30.0, 0.0, 65535.0);
    s.rotation_deg_per_frame = r.number("scene.rotation_rate", 0.45, -360.0, 360.0);
    s.start_angle_deg = r.number("scene.start_angle", 180.0, -360.0, 360.0);
    s.obj3_half = static_cast<int>(r.integer("scene.obj3_half", 8, 1, 1024));
    s.obj3_range = r.number("scene.obj3_range", 1000.0, 0.0, t_r);
    s.obj3_speed = r.number("scene.obj3_speed", 0.1, 0.0, 1e6);
    s.obj1_retreat_rate = r.number("scene.obj1_retreat", 0.5, 0.0, 1e6);
    s.phase1_end = r.integer("scene.phase1_end", 800, 0, 1000000000000000LL);
    s.phase2_end = r.integer("scene.phase2_end", 1600, s.phase1_end, 1000000000000000LL);
    cfg.scene.kind = s;
  } else {
    const auto* e = r.raw("scene.kind");
    throw ParseError("config line " + std::to_string(e ? e->second : 0) +
                     ": scene.kind must be sine, static or rects");
  }

  kv.reject_unknown();
  cfg.params.validate();
  cfg.sys.validate();
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace o3dsp
