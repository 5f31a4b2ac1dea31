#pragma once

// Run description files: sectioned key = value text.
//
//   # comment
//   [storage]    length_x, length_y (m), nx, ny, horizon (s)
//   [materials]  medium.density, medium.conductivity, medium.heat_capacity,
//                fluid.density, fluid.conductivity, fluid.heat_capacity
//   [phx]        velocity (m/s); layer = <first fluid row>, <last fluid row>  (repeatable)
//   [boundary]   lambda_G (W/(m^2 K)), ground_mean, ground_amplitude, ground_period (s)
//   [time]       theta, tau = <s> | auto, safety, initial = <temperature> | file:<csv>
//   [schedule]   interval = <start>, <end>, on, <inlet temperature>
//                interval = <start>, <end>, off            (repeatable)
//   [output]     directory, snapshot_stride

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "geostorage/coefficients.hpp"
#include "geostorage/config.hpp"
#include "geostorage/errors.hpp"
#include "geostorage/format.hpp"

namespace geostorage::io {

/// One pump interval as written in a run file; Q_in is constant per interval.
struct IntervalSpec {
  double start{};
  double end{};
  PumpRegime regime{PumpRegime::Off};
  double inlet{0.0};
  bool operator==(const IntervalSpec&) const = default;
};

/// Constant temperature or path to a field CSV in the snapshot format.
using InitialCondition = std::variant<double, std::string>;

struct RunDescription {
  StorageConfig storage;
  double theta{1.0};
  std::optional<double> tau;  ///< nullopt means "auto"
  double safety{0.9};
  std::vector<IntervalSpec> schedule;
  InitialCondition initial{10.0};
  int snapshot_stride{1};
  std::string output_dir;  ///< empty: $GEOSTORAGE_OUTPUT_DIR, else "geostorage_output"

  bool operator==(const RunDescription&) const = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_commas(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto c = s.find(',', pos);
    out.push_back(trim(s.substr(pos, c == std::string_view::npos ? s.npos : c - pos)));
    if (c == std::string_view::npos) break;
    pos = c + 1;
  }
  return out;
}

class RunParser {
 public:
  explicit RunParser(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(int line, const std::string& field, const std::string& message) const {
    std::string where = source_;
    if (line > 0) where += ":" + std::to_string(line);
    throw ConfigError(where + ": " + field + ": " + message);
  }

  double number(int line, const std::string& field, std::string_view text) const {
    double value{};
    const auto t = trim(text);
    const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
    if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size() || !std::isfinite(value)) {
      fail(line, field, "expected a number, got '" + std::string(t) + "'");
    }
    return value;
  }

  int integer(int line, const std::string& field, std::string_view text) const {
    int value{};
    const auto t = trim(text);
    const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
    if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
      fail(line, field, "expected an integer, got '" + std::string(t) + "'");
    }
    return value;
  }

 private:
  std::string source_;
};

struct Entry {
  int line;
  std::string value;
};

}  // namespace detail

/// Parses and validates run-file text. `source` names the file in messages;
/// `base_dir` resolves a relative initial-condition path.
inline RunDescription parse_run_text(const std::string& text, const std::string& source = "<run>",
                                     const std::filesystem::path& base_dir = {}) {
  using detail::Entry;
  detail::RunParser p(source);

  static const std::map<std::string, std::set<std::string>> known = {
      {"storage", {"length_x", "length_y", "nx", "ny", "horizon"}},
      {"materials",
       {"medium.density", "medium.conductivity", "medium.heat_capacity", "fluid.density",
        "fluid.conductivity", "fluid.heat_capacity"}},
      {"phx", {"velocity", "layer"}},
      {"boundary", {"lambda_G", "ground_mean", "ground_amplitude", "ground_period"}},
      {"time", {"theta", "tau", "safety", "initial"}},
      {"schedule", {"interval"}},
      {"output", {"directory", "snapshot_stride"}},
  };
  static const std::set<std::string> repeatable = {"[phx].layer", "[schedule].interval"};

  std::map<std::string, Entry> single;
  std::map<std::string, std::vector<Entry>> multi;

  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = detail::trim(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = detail::trim(line.substr(0, hash));
    }
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') p.fail(line_no, "section", "unterminated section header");
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      if (!known.contains(section)) p.fail(line_no, "[" + section + "]", "unknown section");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) p.fail(line_no, "entry", "expected 'key = value'");
    if (section.empty()) p.fail(line_no, "entry", "key outside of any section");
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string value(detail::trim(line.substr(eq + 1)));
    const std::string field = "[" + section + "]." + key;
    if (!known.at(section).contains(key)) p.fail(line_no, field, "unknown key");
    if (repeatable.contains(field)) {
      multi[field].push_back({line_no, value});
    } else {
      if (single.contains(field)) {
        p.fail(line_no, field, "duplicate key (first set on line " +
                                   std::to_string(single.at(field).line) + ")");
      }
      single[field] = {line_no, value};
    }
  }

  auto get = [&](const std::string& field) -> const Entry& {
    const auto it = single.find(field);
    if (it == single.end()) p.fail(0, field, "missing required entry");
    return it->second;
  };
  auto num = [&](const std::string& field) {
    const Entry& e = get(field);
    return p.number(e.line, field, e.value);
  };
  auto num_or = [&](const std::string& field, double fallback) {
    return single.contains(field) ? num(field) : fallback;
  };
  auto positive = [&](const std::string& field) {
    const double v = num(field);
    if (!(v > 0.0)) p.fail(single.at(field).line, field, "must be positive");
    return v;
  };
  auto integer = [&](const std::string& field) {
    const Entry& e = get(field);
    return p.integer(e.line, field, e.value);
  };

  RunDescription d;
  StorageConfig& s = d.storage;
  s.length_x = positive("[storage].length_x");
  s.length_y = positive("[storage].length_y");
  s.nx = integer("[storage].nx");
  s.ny = integer("[storage].ny");
  if (s.nx < 3) p.fail(get("[storage].nx").line, "[storage].nx", "must be at least 3");
  s.horizon = positive("[storage].horizon");

  s.medium = {positive("[materials].medium.density"), positive("[materials].medium.conductivity"),
              positive("[materials].medium.heat_capacity")};
  s.fluid = {positive("[materials].fluid.density"), positive("[materials].fluid.conductivity"),
             positive("[materials].fluid.heat_capacity")};

  s.pump_velocity = positive("[phx].velocity");
  for (const Entry& e : multi["[phx].layer"]) {
    const auto parts = detail::split_commas(e.value);
    if (parts.size() != 2) p.fail(e.line, "[phx].layer", "expected '<first row>, <last row>'");
    s.phx.push_back({p.integer(e.line, "[phx].layer", parts[0]),
                     p.integer(e.line, "[phx].layer", parts[1])});
  }

  s.ground_transfer = num("[boundary].lambda_G");
  if (s.ground_transfer < 0.0) {
    p.fail(get("[boundary].lambda_G").line, "[boundary].lambda_G", "must be non-negative");
  }
  s.ground.mean = num("[boundary].ground_mean");
  s.ground.amplitude = num_or("[boundary].ground_amplitude", 0.0);
  s.ground.period = num_or("[boundary].ground_period", s.ground.period);
  if (!(s.ground.period > 0.0)) {
    p.fail(get("[boundary].ground_period").line, "[boundary].ground_period", "must be positive");
  }

  try {
    s.validate();
  } catch (const ConfigError& e) {
    const int line = multi["[phx].layer"].empty() ? 0 : multi["[phx].layer"].front().line;
    p.fail(line, "[phx]", e.what());
  }

  d.theta = num_or("[time].theta", 1.0);
  if (!(d.theta >= 0.0 && d.theta <= 1.0)) p.fail(get("[time].theta").line, "[time].theta", "must lie in [0, 1]");
  if (single.contains("[time].tau") && get("[time].tau").value != "auto") {
    d.tau = positive("[time].tau");
  }
  d.safety = num_or("[time].safety", 0.9);
  if (!(d.safety > 0.0 && d.safety <= 1.0)) p.fail(get("[time].safety").line, "[time].safety", "must lie in (0, 1]");
  d.initial = s.ground.mean;
  if (single.contains("[time].initial")) {
    const Entry& e = get("[time].initial");
    if (e.value.rfind("file:", 0) == 0) {
      std::filesystem::path path(std::string(detail::trim(std::string_view(e.value).substr(5))));
      if (path.empty()) p.fail(e.line, "[time].initial", "empty file path");
      if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
      d.initial = path.lexically_normal().string();
    } else {
      d.initial = p.number(e.line, "[time].initial", e.value);
    }
  }

  const auto& intervals = multi["[schedule].interval"];
  if (intervals.empty()) p.fail(0, "[schedule].interval", "missing required entry");
  for (const Entry& e : intervals) {
    const auto parts = detail::split_commas(e.value);
    const std::string field = "[schedule].interval";
    if (parts.size() < 3 || parts.size() > 4) {
      p.fail(e.line, field, "expected '<start>, <end>, on|off[, <inlet temperature>]'");
    }
    IntervalSpec iv;
    iv.start = p.number(e.line, field, parts[0]);
    iv.end = p.number(e.line, field, parts[1]);
    if (parts[2] == "on") {
      iv.regime = PumpRegime::On;
      if (parts.size() != 4) p.fail(e.line, field, "pump-on interval needs an inlet temperature");
      iv.inlet = p.number(e.line, field, parts[3]);
    } else if (parts[2] == "off") {
      iv.regime = PumpRegime::Off;
      if (parts.size() == 4) p.fail(e.line, field, "pump-off interval takes no inlet temperature");
    } else {
      p.fail(e.line, field, "regime must be 'on' or 'off'");
    }
    if (!(iv.end > iv.start)) p.fail(e.line, field, "end must be greater than start");
    d.schedule.push_back(iv);
  }
  std::stable_sort(d.schedule.begin(), d.schedule.end(),
                   [](const auto& a, const auto& b) { return a.start < b.start; });
  const double eps = 1e-9 * s.horizon;
  double covered = 0.0;
  std::vector<std::string> gaps;
  for (const auto& iv : d.schedule) {
    if (iv.start > covered + eps) gaps.push_back("[" + format_shortest(covered) + ", " + format_shortest(iv.start) + ")");
    if (iv.start < covered - eps) {
      p.fail(0, "[schedule].interval", "intervals overlap at " + format_shortest(iv.start));
    }
    covered = std::max(covered, iv.end);
  }
  if (covered < s.horizon - eps) gaps.push_back("[" + format_shortest(covered) + ", " + format_shortest(s.horizon) + ")");
  if (covered > s.horizon + eps) p.fail(0, "[schedule].interval", "schedule extends beyond the horizon");
  if (!gaps.empty()) {
    std::string list;
    for (const auto& g : gaps) list += (list.empty() ? "" : ", ") + g;
    p.fail(0, "[schedule].interval", "schedule does not cover [0, T]; uncovered: " + list);
  }

  if (single.contains("[output].directory")) d.output_dir = get("[output].directory").value;
  if (single.contains("[output].snapshot_stride")) {
    d.snapshot_stride = integer("[output].snapshot_stride");
    if (d.snapshot_stride < 0) {
      p.fail(get("[output].snapshot_stride").line, "[output].snapshot_stride", "must be >= 0");
    }
  }
  return d;
}

inline RunDescription parse_run(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open run file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_text(buf.str(), path.string(), path.parent_path());
}

/// Canonical run-file text; parse_run_text(write_run(d)) == d.
inline std::string write_run(const RunDescription& d) {
  const StorageConfig& s = d.storage;
  const auto f = [](double x) { return format_g17(x); };
  std::ostringstream o;
  o << "[storage]\n"
    << "length_x = " << f(s.length_x) << "\n"
    << "length_y = " << f(s.length_y) << "\n"
    << "nx = " << s.nx << "\n"
    << "ny = " << s.ny << "\n"
    << "horizon = " << f(s.horizon) << "\n\n";
  o << "[materials]\n"
    << "medium.density = " << f(s.medium.density) << "\n"
    << "medium.conductivity = " << f(s.medium.conductivity) << "\n"
    << "medium.heat_capacity = " << f(s.medium.heat_capacity) << "\n"
    << "fluid.density = " << f(s.fluid.density) << "\n"
    << "fluid.conductivity = " << f(s.fluid.conductivity) << "\n"
    << "fluid.heat_capacity = " << f(s.fluid.heat_capacity) << "\n\n";
  o << "[phx]\n"
    << "velocity = " << f(s.pump_velocity) << "\n";
  for (const auto& layer : s.phx) o << "layer = " << layer.first_fluid_row << ", " << layer.last_fluid_row << "\n";
  o << "\n[boundary]\n"
    << "lambda_G = " << f(s.ground_transfer) << "\n"
    << "ground_mean = " << f(s.ground.mean) << "\n"
    << "ground_amplitude = " << f(s.ground.amplitude) << "\n"
    << "ground_period = " << f(s.ground.period) << "\n\n";
  o << "[time]\n"
    << "theta = " << f(d.theta) << "\n"
    << "tau = " << (d.tau ? f(*d.tau) : std::string("auto")) << "\n"
    << "safety = " << f(d.safety) << "\n";
  if (const double* c = std::get_if<double>(&d.initial)) {
    o << "initial = " << f(*c) << "\n\n";
  } else {
    o << "initial = file:" << std::get<std::string>(d.initial) << "\n\n";
  }
  o << "[schedule]\n";
  for (const auto& iv : d.schedule) {
    o << "interval = " << f(iv.start) << ", " << f(iv.end) << ", " << to_string(iv.regime);
    if (iv.regime == PumpRegime::On) o << ", " << f(iv.inlet);
    o << "\n";
  }
  o << "\n[output]\n";
  if (!d.output_dir.empty()) o << "directory = " << d.output_dir << "\n";
  o << "snapshot_stride = " << d.snapshot_stride << "\n";
  return o.str();
}

}  // namespace geostorage::io
