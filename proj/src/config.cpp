#include "burgers_rb/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace burgers_rb {

TimeGrid time_grid(const ProblemConfig& config) {
  if (!(config.dt > 0.0)) throw ConfigError("problem.dt must be positive");
  if (!(config.horizon > 0.0)) {
    throw ConfigError("problem.horizon must be positive");
  }
  const double ratio = config.horizon / config.dt;
  const long long steps = std::llround(ratio);
  if (steps < 1 || std::abs(ratio - static_cast<double>(steps)) > 1e-8) {
    throw ConfigError(
        "problem.horizon must be an integer multiple of problem.dt");
  }
  TimeGrid grid;
  grid.dt = config.dt;
  grid.horizon = config.horizon;
  grid.num_steps = static_cast<int>(steps);
  return grid;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Raw key/value view of the file plus consumption tracking, so that unknown
// keys can be reported after all known ones were pulled.
class KeyValueView {
 public:
  KeyValueView(const std::string& text, const std::string& origin)
      : origin_(origin) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        fail("malformed line " + std::to_string(lineno) +
             " (expected 'key = value'): '" + line + "'");
      }
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) {
        fail("malformed line " + std::to_string(lineno) + ": empty key");
      }
      if (entries_.count(key)) fail("duplicate key '" + key + "'");
      entries_[key] = value;
    }
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(origin_ + ": " + msg);
  }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::string require(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) fail("missing required key '" + key + "'");
    consumed_.insert(key);
    return it->second;
  }

  std::string optional(const std::string& key, const std::string& fallback) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    consumed_.insert(key);
    return it->second;
  }

  void reject_unconsumed() const {
    for (const auto& [key, value] : entries_) {
      if (!consumed_.count(key)) fail("unknown key '" + key + "'");
    }
  }

 private:
  std::string origin_;
  std::map<std::string, std::string> entries_;
  std::set<std::string> consumed_;
};

double parse_double(const KeyValueView& kv, const std::string& key,
                    const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || !std::isfinite(v)) {
    kv.fail("key '" + key + "': expected a number, got '" + text + "'");
  }
  return v;
}

long long parse_int(const KeyValueView& kv, const std::string& key,
                    const std::string& text) {
  char* end = nullptr;
  const long long v = std::strtoll(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0') {
    kv.fail("key '" + key + "': expected an integer, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const KeyValueView& kv, const std::string& key,
                const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  kv.fail("key '" + key + "': expected true/false, got '" + text + "'");
  return false;  // unreachable
}

std::vector<double> parse_list(const KeyValueView& kv, const std::string& key,
                               const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) out.push_back(parse_double(kv, key, tok));
  return out;
}

Interval parse_interval(const KeyValueView& kv, const std::string& key,
                        const std::string& text) {
  const std::vector<double> v = parse_list(kv, key, text);
  if (v.size() != 2) {
    kv.fail("key '" + key + "': expected an interval 'lo hi', got '" + text +
            "'");
  }
  if (!(v[0] <= v[1])) {
    kv.fail("key '" + key + "': empty interval [" + text + "]");
  }
  return Interval{v[0], v[1]};
}

}  // namespace

ProblemConfig parse_config(const std::string& text, const std::string& origin) {
  KeyValueView kv(text, origin);
  ProblemConfig cfg;

  cfg.num_intervals = static_cast<int>(
      parse_int(kv, "problem.num_intervals", kv.require("problem.num_intervals")));
  cfg.dt = parse_double(kv, "problem.dt", kv.require("problem.dt"));
  cfg.horizon = parse_double(kv, "problem.horizon", kv.require("problem.horizon"));
  cfg.penalty =
      parse_double(kv, "problem.penalty", kv.optional("problem.penalty", "1e7"));
  cfg.newton_tol = parse_double(kv, "problem.newton_tol",
                                kv.optional("problem.newton_tol", "3e-16"));
  cfg.newton_cap = static_cast<int>(parse_int(
      kv, "problem.newton_cap", kv.optional("problem.newton_cap", "50")));
  cfg.seed = static_cast<std::uint64_t>(
      parse_int(kv, "problem.seed", kv.optional("problem.seed", "1")));

  if (cfg.num_intervals < 2) kv.fail("problem.num_intervals must be >= 2");
  if (!(cfg.penalty > 0.0)) kv.fail("problem.penalty must be positive");
  if (!(cfg.newton_tol > 0.0)) kv.fail("problem.newton_tol must be positive");
  if (cfg.newton_cap < 1) kv.fail("problem.newton_cap must be >= 1");

  cfg.freq.omega_b0 =
      parse_list(kv, "freq.omega_b0", kv.optional("freq.omega_b0", ""));
  cfg.freq.omega_b1 =
      parse_list(kv, "freq.omega_b1", kv.optional("freq.omega_b1", ""));
  cfg.freq.omega_u0 =
      parse_list(kv, "freq.omega_u0", kv.optional("freq.omega_u0", ""));
  cfg.freq.omega_fT =
      parse_list(kv, "freq.omega_fT", kv.optional("freq.omega_fT", ""));
  cfg.freq.omega_fS =
      parse_list(kv, "freq.omega_fS", kv.optional("freq.omega_fS", ""));

  cfg.ranges.nu = parse_interval(kv, "ranges.nu", kv.require("ranges.nu"));
  cfg.ranges.f_m = parse_interval(kv, "ranges.f_m", kv.require("ranges.f_m"));
  cfg.ranges.u0m = parse_interval(kv, "ranges.u0m", kv.require("ranges.u0m"));
  if (!(cfg.ranges.nu.lo > 0.0)) kv.fail("ranges.nu must be positive");

  auto amp_key = [](const std::string& base, int l) {
    return "ranges." + base + "_" + std::to_string(l);
  };
  for (int l = 1; l <= cfg.freq.n_b0(); ++l) {
    const std::string key = amp_key("amp_b0", l);
    cfg.ranges.amp_b0.push_back(parse_interval(kv, key, kv.require(key)));
  }
  for (int l = 1; l <= cfg.freq.n_b1(); ++l) {
    const std::string key = amp_key("amp_b1", l);
    cfg.ranges.amp_b1.push_back(parse_interval(kv, key, kv.require(key)));
  }
  for (int l = 1; l <= cfg.freq.n_fT(); ++l) {
    cfg.ranges.amp_f.emplace_back();
    for (int p = 1; p <= cfg.freq.n_fS(); ++p) {
      const std::string key =
          "ranges.amp_f_" + std::to_string(l) + "_" + std::to_string(p);
      cfg.ranges.amp_f.back().push_back(
          parse_interval(kv, key, kv.require(key)));
    }
  }
  for (int l = 1; l <= cfg.freq.n_u0(); ++l) {
    const std::string key = amp_key("amp_u0", l);
    cfg.ranges.amp_u0.push_back(parse_interval(kv, key, kv.require(key)));
  }

  cfg.rb.basis_size = static_cast<int>(
      parse_int(kv, "rb.basis_size", kv.optional("rb.basis_size", "5")));
  cfg.rb.snapshot_count = static_cast<int>(parse_int(
      kv, "rb.snapshot_count", kv.optional("rb.snapshot_count", "30")));
  cfg.rb.greedy_candidates = static_cast<int>(parse_int(
      kv, "rb.greedy_candidates", kv.optional("rb.greedy_candidates", "100")));
  cfg.rb.enrich =
      parse_bool(kv, "rb.enrich", kv.optional("rb.enrich", "false"));
  cfg.rb.sweep_min = static_cast<int>(
      parse_int(kv, "rb.sweep_min", kv.optional("rb.sweep_min", "2")));
  cfg.rb.sweep_max = static_cast<int>(
      parse_int(kv, "rb.sweep_max", kv.optional("rb.sweep_max", "10")));
  cfg.rb.benchmark_samples = static_cast<int>(parse_int(
      kv, "rb.benchmark_samples", kv.optional("rb.benchmark_samples", "100")));
  cfg.rb.seed = static_cast<std::uint64_t>(
      parse_int(kv, "rb.seed", kv.optional("rb.seed", "42")));

  cfg.scm.constraint_count = static_cast<int>(parse_int(
      kv, "scm.constraint_count", kv.optional("scm.constraint_count", "10")));
  cfg.scm.nearest_count = static_cast<int>(parse_int(
      kv, "scm.nearest_count", kv.optional("scm.nearest_count", "10")));
  cfg.scm.sample_size = static_cast<int>(
      parse_int(kv, "scm.sample_size", kv.optional("scm.sample_size", "100")));
  cfg.scm.sharpness_tol = parse_double(
      kv, "scm.sharpness_tol", kv.optional("scm.sharpness_tol", "1e-10"));
  cfg.scm.seed = static_cast<std::uint64_t>(
      parse_int(kv, "scm.seed", kv.optional("scm.seed", "7")));

  if (cfg.rb.basis_size < 1) kv.fail("rb.basis_size must be >= 1");
  if (cfg.rb.snapshot_count < 1) kv.fail("rb.snapshot_count must be >= 1");
  if (cfg.rb.greedy_candidates < 1) {
    kv.fail("rb.greedy_candidates must be >= 1");
  }
  if (cfg.rb.sweep_min < 1 || cfg.rb.sweep_max < cfg.rb.sweep_min) {
    kv.fail("rb.sweep_min/rb.sweep_max must satisfy 1 <= min <= max");
  }
  if (cfg.rb.benchmark_samples < 1) {
    kv.fail("rb.benchmark_samples must be >= 1");
  }
  if (cfg.scm.constraint_count < 1) {
    kv.fail("scm.constraint_count must be >= 1");
  }
  if (cfg.scm.nearest_count < 1) kv.fail("scm.nearest_count must be >= 1");
  if (cfg.scm.sample_size < 1) kv.fail("scm.sample_size must be >= 1");

  kv.reject_unconsumed();

  // Fail fast on inconsistent grids and boxes.
  time_grid(cfg);
  flatten_ranges(cfg.freq, cfg.ranges);
  return cfg;
}

ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

}  // namespace burgers_rb
