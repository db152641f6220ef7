#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "rydberg/error.hpp"
#include "rydberg/scanner.hpp"
#include "rydberg/units.hpp"

namespace rydberg {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : value) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

class LineError {
 public:
  LineError(std::string source, int line) : source_(std::move(source)), line_(line) {}
  ConfigError operator()(const std::string& msg) const {
    return ConfigError(source_ + ":" + std::to_string(line_) + ": " + msg);
  }

 private:
  std::string source_;
  int line_;
};

double parse_double(const std::string& v, const LineError& err, const std::string& key) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw err("key '" + key + "': expected a number, got '" + v + "'");
  }
  return out;
}

int parse_int(const std::string& v, const LineError& err, const std::string& key) {
  int out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw err("key '" + key + "': expected an integer, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& v, const LineError& err, const std::string& key) {
  const auto s = lower(v);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw err("key '" + key + "': expected true or false, got '" + v + "'");
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

// Dimensional keys without a unit suffix get a pointed message instead of
// "unknown key".
const std::map<std::string, std::string> kNeedsUnit = {
    {"d", "D_um or D_a0"},
    {"distance", "D_um or D_a0"},
    {"sigma", "sigma_um or sigma_a0"},
    {"r_at", "R_at_um, R_at_a0 or R_at_over_D"},
    {"spacing", "R_at_um, R_at_a0 or R_at_over_D"},
    {"energy", "an explicit unit (not supported)"},
};

}  // namespace

std::string to_string(ScanMode mode) {
  switch (mode) {
    case ScanMode::SingleAtomNumeric: return "single-atom-numeric";
    case ScanMode::SingleAtomAnalytic: return "single-atom-analytic";
    case ScanMode::Polarization: return "polarization";
    case ScanMode::ManyBody: return "many-body";
    case ScanMode::Table1: return "table1";
  }
  return "?";
}

ScanMode parse_scan_mode(std::string_view text) {
  for (auto m : {ScanMode::SingleAtomNumeric, ScanMode::SingleAtomAnalytic, ScanMode::Polarization,
                 ScanMode::ManyBody, ScanMode::Table1}) {
    if (text == to_string(m)) return m;
  }
  throw ConfigError("unknown mode '" + std::string(text) +
                    "' (single-atom-numeric, single-atom-analytic, polarization, many-body, table1)");
}

int default_l_max(std::string_view element) {
  const auto e = lower(std::string(element));
  return (e == "li" || e == "lithium") ? 8 : 4;
}

void KappaGrid::validate() const {
  if (count < 1) throw ConfigError("kappa grid: kappa_count must be >= 1");
  if (!std::isfinite(min) || !std::isfinite(max)) throw ConfigError("kappa grid: non-finite bounds");
  if (count > 1 && !(max > min)) throw ConfigError("kappa grid: kappa_max must exceed kappa_min");
  if (spacing == GridSpacing::Log && !(min > 0.0)) {
    throw ConfigError("kappa grid: log spacing needs kappa_min > 0");
  }
}

std::vector<double> KappaGrid::points() const {
  validate();
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = min;
    return out;
  }
  for (int i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / (count - 1);
    out[static_cast<std::size_t>(i)] =
        spacing == GridSpacing::Log ? min * std::pow(max / min, t) : min + (max - min) * t;
  }
  out.back() = max;
  return out;
}

void ScanJob::validate() const {
  if (element.empty() && defects_file.empty()) throw ConfigError("config: 'element' is required");
  if (n < 1) throw ConfigError("config: 'n' is required and must be >= 1");
  grid.validate();
  if (distance_a0.has_value() == eta_target.has_value()) {
    throw ConfigError("config: give exactly one of D_um, D_a0 or eta_target");
  }
  if (distance_a0 && !(*distance_a0 > 0.0)) throw ConfigError("config: D must be positive");
  if (eta_target && !(*eta_target > 0.0)) throw ConfigError("config: eta_target must be positive");
  if (!(sigma_a0 >= 0.0)) throw ConfigError("config: sigma must be non-negative");
  if (n_window < 0) throw ConfigError("config: n_window must be >= 0");
  if (l_max < 1) throw ConfigError("config: l_max must be >= 1");
  if (!(radial_step > 0.0)) throw ConfigError("config: radial_step must be positive");
  propagation.validate();
  if (mode == ScanMode::ManyBody) {
    if (atoms < 1) throw ConfigError("config: atoms must be >= 1");
    if (spacing_a0.has_value() && spacing_over_d.has_value()) {
      throw ConfigError("config: R_at given twice");
    }
    if (spacing_a0 && !(*spacing_a0 > 0.0)) throw ConfigError("config: R_at must be positive");
    if (spacing_over_d && !(*spacing_over_d > 0.0)) throw ConfigError("config: R_at must be positive");
  }
  if (mode == ScanMode::Table1) {
    if (targets.empty()) throw ConfigError("config: table1 mode needs 'targets'");
    for (double t : targets) {
      if (!(t > 0.0 && t < 1.0)) throw ConfigError("config: targets must lie in (0, 1)");
    }
    if (!(energy_rel_tol > 0.0)) throw ConfigError("config: energy_rel_tol must be positive");
  }
  for (int c : channels) {
    if (c < 1) throw ConfigError("config: channels must be positive principal numbers");
  }
}

std::vector<std::pair<std::string, std::string>> ScanJob::canonical() const {
  std::vector<std::pair<std::string, std::string>> kv;
  auto add = [&](std::string k, std::string v) { kv.emplace_back(std::move(k), std::move(v)); };
  add("mode", to_string(mode));
  if (!element.empty()) add("element", element);
  if (!defects_file.empty()) add("defects_file", defects_file);
  add("n", std::to_string(n));
  if (!channels.empty()) {
    std::string s;
    for (int c : channels) s += (s.empty() ? "" : " ") + std::to_string(c);
    add("channels", s);
  }
  if (distance_a0) add("D_a0", format_double(*distance_a0));
  if (eta_target) add("eta_target", format_double(*eta_target));
  add("sigma_a0", format_double(sigma_a0));
  add("kappa_min", format_double(grid.min));
  add("kappa_max", format_double(grid.max));
  add("kappa_count", std::to_string(grid.count));
  add("kappa_spacing", grid.spacing == GridSpacing::Log ? "log" : "linear");
  const bool numeric = mode == ScanMode::SingleAtomNumeric || mode == ScanMode::Polarization ||
                       mode == ScanMode::Table1;
  if (numeric) {
    if (states.empty()) {
      add("n_window", std::to_string(n_window));
      add("l_max", std::to_string(l_max));
    } else {
      std::string s;
      for (const auto& st : states) s += (s.empty() ? "" : " ") + st.label();
      add("states", s);
    }
    add("zero_dipoles", zero_dipoles ? "true" : "false");
    add("radial_step", format_double(radial_step));
    add("rel_tol", format_double(propagation.rel_tol));
    add("abs_tol", format_double(propagation.abs_tol));
    add("frame", propagation.frame == Frame::Interaction ? "interaction" : "bare");
    add("half_window", format_double(propagation.half_window));
    add("auto_window", propagation.auto_window ? "true" : "false");
    add("window_tol", format_double(propagation.window_tol));
    add("max_window_doublings", std::to_string(propagation.max_window_doublings));
    add("norm_tol", format_double(propagation.norm_tol));
  } else {
    add("radial_step", format_double(radial_step));
  }
  if (mode == ScanMode::ManyBody) {
    add("atoms", std::to_string(atoms));
    if (spacing_a0) {
      add("R_at_a0", format_double(*spacing_a0));
    } else {
      add("R_at_over_D", format_double(spacing_over_d.value_or(2.0)));
    }
  }
  if (mode == ScanMode::Table1) {
    std::string s;
    for (double t : targets) s += (s.empty() ? "" : " ") + format_double(t);
    add("targets", s);
    add("energy_rel_tol", format_double(energy_rel_tol));
  }
  return kv;
}

std::string ScanJob::canonical_text() const {
  std::string out;
  for (const auto& [k, v] : canonical()) out += k + " = " + v + "\n";
  return out;
}

std::uint64_t ScanJob::hash() const {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : canonical_text()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

ScanJob parse_config(std::istream& in, const std::string& source) {
  std::vector<std::pair<int, std::string>> lines;
  {
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
      // JSON output of an earlier run: read its "config" object.
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(text);
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(source + ": invalid JSON: " + e.what());
      }
      if (!j.contains("config") || !j["config"].is_object()) {
        throw ConfigError(source + ": JSON input has no 'config' object");
      }
      int i = 0;
      for (const auto& [k, v] : j["config"].items()) {
        lines.emplace_back(++i, k + " = " + (v.is_string() ? v.get<std::string>() : v.dump()));
      }
    } else {
      std::istringstream is(text);
      std::string line;
      int no = 0;
      bool has_cfg = false;
      std::vector<std::pair<int, std::string>> plain;
      while (std::getline(is, line)) {
        ++no;
        if (line.rfind("#cfg ", 0) == 0) {
          has_cfg = true;
          lines.emplace_back(no, line.substr(5));
        } else {
          plain.emplace_back(no, line);
        }
      }
      if (!has_cfg) lines = std::move(plain);
    }
  }

  ScanJob job;
  std::set<std::string> seen;
  bool have_mode = false;
  bool have_l_max = false;
  std::optional<double> d_um, d_a0, s_um, s_a0, r_um, r_a0, r_ratio;
  for (const auto& [no, raw] : lines) {
    const LineError err(source, no);
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') continue;  // TOML-style section headers
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw err("expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = unquote(trim(std::string_view(line).substr(eq + 1)));
    if (key.empty()) throw err("missing key");
    if (value.empty()) throw err("key '" + key + "' has no value");
    if (!seen.insert(key).second) throw err("duplicate key '" + key + "'");

    if (key == "mode") {
      try {
        job.mode = parse_scan_mode(value);
      } catch (const ConfigError& e) {
        throw err(e.what());
      }
      have_mode = true;
    } else if (key == "element") {
      job.element = value;
    } else if (key == "defects_file") {
      job.defects_file = value;
    } else if (key == "n") {
      job.n = parse_int(value, err, key);
    } else if (key == "channels") {
      for (const auto& t : split_list(value)) job.channels.push_back(parse_int(t, err, key));
    } else if (key == "D_um") {
      d_um = parse_double(value, err, key);
    } else if (key == "D_a0") {
      d_a0 = parse_double(value, err, key);
    } else if (key == "eta_target") {
      job.eta_target = parse_double(value, err, key);
    } else if (key == "sigma_um") {
      s_um = parse_double(value, err, key);
    } else if (key == "sigma_a0") {
      s_a0 = parse_double(value, err, key);
    } else if (key == "kappa_min") {
      job.grid.min = parse_double(value, err, key);
    } else if (key == "kappa_max") {
      job.grid.max = parse_double(value, err, key);
    } else if (key == "kappa_count") {
      job.grid.count = parse_int(value, err, key);
    } else if (key == "kappa_spacing") {
      const auto v = lower(value);
      if (v == "log") {
        job.grid.spacing = GridSpacing::Log;
      } else if (v == "linear") {
        job.grid.spacing = GridSpacing::Linear;
      } else {
        throw err("kappa_spacing must be 'log' or 'linear'");
      }
    } else if (key == "n_window") {
      job.n_window = parse_int(value, err, key);
    } else if (key == "l_max") {
      job.l_max = parse_int(value, err, key);
      have_l_max = true;
    } else if (key == "states") {
      for (const auto& t : split_list(value)) {
        try {
          job.states.push_back(parse_state_label(t));
        } catch (const Error& e) {
          throw err(e.what());
        }
      }
    } else if (key == "zero_dipoles") {
      job.zero_dipoles = parse_bool(value, err, key);
    } else if (key == "radial_step") {
      job.radial_step = parse_double(value, err, key);
    } else if (key == "rel_tol") {
      job.propagation.rel_tol = parse_double(value, err, key);
    } else if (key == "abs_tol") {
      job.propagation.abs_tol = parse_double(value, err, key);
    } else if (key == "frame") {
      const auto v = lower(value);
      if (v == "interaction") {
        job.propagation.frame = Frame::Interaction;
      } else if (v == "bare") {
        job.propagation.frame = Frame::Bare;
      } else {
        throw err("frame must be 'interaction' or 'bare'");
      }
    } else if (key == "half_window") {
      job.propagation.half_window = parse_double(value, err, key);
    } else if (key == "auto_window") {
      job.propagation.auto_window = parse_bool(value, err, key);
    } else if (key == "window_tol") {
      job.propagation.window_tol = parse_double(value, err, key);
    } else if (key == "max_window_doublings") {
      job.propagation.max_window_doublings = parse_int(value, err, key);
    } else if (key == "norm_tol") {
      job.propagation.norm_tol = parse_double(value, err, key);
    } else if (key == "atoms") {
      job.atoms = parse_int(value, err, key);
    } else if (key == "R_at_um") {
      r_um = parse_double(value, err, key);
    } else if (key == "R_at_a0") {
      r_a0 = parse_double(value, err, key);
    } else if (key == "R_at_over_D") {
      r_ratio = parse_double(value, err, key);
    } else if (key == "targets") {
      for (const auto& t : split_list(value)) job.targets.push_back(parse_double(t, err, key));
    } else if (key == "energy_rel_tol") {
      job.energy_rel_tol = parse_double(value, err, key);
    } else if (const auto it = kNeedsUnit.find(lower(key)); it != kNeedsUnit.end()) {
      throw err("dimensional key '" + key + "' needs a unit suffix: use " + it->second);
    } else {
      throw err("unknown key '" + key + "'");
    }
  }

  if (!have_mode) throw ConfigError(source + ": 'mode' is required");
  if (d_um && d_a0) throw ConfigError(source + ": D given both as D_um and D_a0");
  if ((d_um || d_a0) && job.eta_target) {
    throw ConfigError(source + ": D and eta_target are mutually exclusive");
  }
  if (d_um) job.distance_a0 = units::micrometres_to_bohr(*d_um);
  if (d_a0) job.distance_a0 = *d_a0;
  if (s_um && s_a0) throw ConfigError(source + ": sigma given both as sigma_um and sigma_a0");
  if (s_um) job.sigma_a0 = units::micrometres_to_bohr(*s_um);
  if (s_a0) job.sigma_a0 = *s_a0;
  if (static_cast<int>(r_um.has_value()) + r_a0.has_value() + r_ratio.has_value() > 1) {
    throw ConfigError(source + ": R_at given more than once");
  }
  if (r_um) job.spacing_a0 = units::micrometres_to_bohr(*r_um);
  if (r_a0) job.spacing_a0 = *r_a0;
  if (r_ratio) job.spacing_over_d = *r_ratio;
  if (!have_l_max) job.l_max = default_l_max(job.element);
  try {
    job.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return job;
}

ScanJob load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  return parse_config(in, path.string());
}

}  // namespace rydberg
