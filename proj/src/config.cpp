#include "uwoc/config.hpp"

#include "uwoc/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace uwoc::config {

using nlohmann::json;

namespace {

// Collects type errors and unknown keys while reading a JSON object, so a
// single pass can report every problem at once.
class Reader {
 public:
  explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

  void expect_object(const json& node, const std::string& path,
                     std::initializer_list<std::string_view> allowed) {
    if (!node.is_object()) {
      errors_.push_back(path + ": expected an object");
      return;
    }
    for (const auto& [key, _] : node.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        errors_.push_back(join(path, key) + ": unknown field");
    }
  }

  void number(const json& node, const std::string& path, std::string_view key, double& out) {
    if (!node.contains(std::string(key))) return;
    const json& v = node.at(std::string(key));
    if (!v.is_number()) {
      errors_.push_back(join(path, key) + ": expected a number");
      return;
    }
    out = v.get<double>();
  }

  template <class Int>
  void integer(const json& node, const std::string& path, std::string_view key, Int& out) {
    if (!node.contains(std::string(key))) return;
    const json& v = node.at(std::string(key));
    if (v.is_number_integer() || (v.is_number_float() && is_integral(v.get<double>()))) {
      if constexpr (std::is_unsigned_v<Int>) {
        if (v.is_number_integer() && !v.is_number_unsigned()) {
          errors_.push_back(join(path, key) + ": expected a non-negative integer");
          return;
        }
      }
      out = v.is_number_float() ? static_cast<Int>(v.get<double>()) : v.get<Int>();
      return;
    }
    errors_.push_back(join(path, key) + ": expected an integer");
  }

  // A number or an array of numbers.
  void numbers(const json& node, const std::string& path, std::string_view key,
               std::vector<double>& out) {
    if (node.contains(std::string(key))) numbers_value(node.at(std::string(key)), join(path, key), out);
  }

  void numbers_value(const json& v, const std::string& path, std::vector<double>& out) {
    if (v.is_number()) {
      out = {v.get<double>()};
      return;
    }
    if (!v.is_array()) {
      errors_.push_back(path + ": expected a number or an array of numbers");
      return;
    }
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        errors_.push_back(path + "[" + std::to_string(i) + "]: expected a number");
        continue;
      }
      out.push_back(v[i].get<double>());
    }
  }

  void string(const json& node, const std::string& path, std::string_view key, std::string& out) {
    if (!node.contains(std::string(key))) return;
    const json& v = node.at(std::string(key));
    if (!v.is_string()) {
      errors_.push_back(join(path, key) + ": expected a string");
      return;
    }
    out = v.get<std::string>();
  }

  void error(std::string message) { errors_.push_back(std::move(message)); }

  static std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
  }

 private:
  static bool is_integral(double v) { return std::isfinite(v) && std::floor(v) == v; }
  std::vector<std::string>& errors_;
};

std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

void read_water(const json& doc, RunConfig& cfg, Reader& r) {
  if (!doc.contains("water")) return;
  const json& node = doc.at("water");
  if (node.is_string()) {
    cfg.water.preset = node.get<std::string>();
    try {
      cfg.water.properties = channel::WaterProperties::preset(cfg.water.preset);
    } catch (const std::invalid_argument& e) {
      r.error(std::string("water: ") + e.what());
    }
    return;
  }
  r.expect_object(node, "water",
                  {"preset", "absorption_per_m", "scattering_per_m", "hg_asymmetry",
                   "refractive_index"});
  if (!node.is_object()) return;
  cfg.water.preset.clear();
  r.string(node, "water", "preset", cfg.water.preset);
  if (!cfg.water.preset.empty()) {
    try {
      cfg.water.properties = channel::WaterProperties::preset(cfg.water.preset);
    } catch (const std::invalid_argument& e) {
      r.error(std::string("water.preset: ") + e.what());
    }
  } else if (!node.contains("absorption_per_m") || !node.contains("scattering_per_m")) {
    r.error("water: without a preset both absorption_per_m and scattering_per_m are required");
  }
  auto& p = cfg.water.properties;
  r.number(node, "water", "absorption_per_m", p.absorption);
  r.number(node, "water", "scattering_per_m", p.scattering);
  r.number(node, "water", "hg_asymmetry", p.hg_asymmetry);
  r.number(node, "water", "refractive_index", p.refractive_index);
}

void read_links(const json& doc, RunConfig& cfg, Reader& r) {
  if (doc.contains("distance_m") && doc.contains("distances_m"))
    r.error("distance_m and distances_m are mutually exclusive");
  r.numbers(doc, "", "distance_m", cfg.distances_m);
  r.numbers(doc, "", "distances_m", cfg.distances_m);

  if (doc.contains("relays")) {
    std::vector<double> values;
    r.numbers(doc, "", "relays", values);
    cfg.relays.clear();
    for (double x : values) {
      if (std::floor(x) != x)
        r.error("relays: expected integers");
      else
        cfg.relays.push_back(static_cast<int>(x));
    }
  }

  if (doc.contains("hop_lengths_m")) {
    const json& v = doc.at("hop_lengths_m");
    if (!v.is_array() || v.empty()) {
      r.error("hop_lengths_m: expected a non-empty array");
      return;
    }
    const bool nested = v[0].is_array();
    if (!nested) {
      std::vector<double> set;
      r.numbers(doc, "", "hop_lengths_m", set);
      cfg.hop_lengths_m = {set};
      return;
    }
    cfg.hop_lengths_m.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      std::vector<double> set;
      r.numbers_value(v[i], "hop_lengths_m[" + std::to_string(i) + "]", set);
      cfg.hop_lengths_m.push_back(set);
    }
  }
}

void read_turbulence(const json& doc, RunConfig& cfg, Reader& r) {
  r.numbers(doc, "", "sigma_x_sq", cfg.turbulence.sigma_x_sq);
  if (!doc.contains("turbulence")) return;
  const json& node = doc.at("turbulence");
  r.expect_object(node, "turbulence", {"sigma_x_sq", "chi_t", "epsilon", "w", "kinematic_viscosity"});
  if (!node.is_object()) return;
  r.numbers(node, "turbulence", "sigma_x_sq", cfg.turbulence.sigma_x_sq);
  r.number(node, "turbulence", "chi_t", cfg.turbulence.chi_t);
  r.number(node, "turbulence", "epsilon", cfg.turbulence.epsilon);
  r.number(node, "turbulence", "w", cfg.turbulence.w);
  r.number(node, "turbulence", "kinematic_viscosity", cfg.turbulence.kinematic_viscosity);
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::vector<double> PowerSweep::points() const {
  std::vector<double> out;
  if (!(step_db > 0.0) || !(stop_dbm > start_dbm)) return out;
  const auto n = static_cast<std::size_t>(std::floor((stop_dbm - start_dbm) / step_db + 1e-6));
  for (std::size_t i = 0; i <= n; ++i) out.push_back(start_dbm + static_cast<double>(i) * step_db);
  return out;
}

std::vector<std::vector<double>> RunConfig::hop_sets() const {
  if (!hop_lengths_m.empty()) return hop_lengths_m;
  std::vector<std::vector<double>> sets;
  for (double d : distances_m) {
    for (int n : relays) {
      if (n < 0) continue;
      sets.emplace_back(static_cast<std::size_t>(n) + 1, d / (n + 1));
    }
  }
  return sets;
}

double RunConfig::resolved_bin_width() const {
  if (bin_width_s) return *bin_width_s;
  double fastest = 0.0;
  for (double r : data_rates_bps) fastest = std::max(fastest, r);
  return fastest > 0.0 ? 0.1 / fastest : 1e-10;
}

std::vector<std::string> validate(const RunConfig& cfg) {
  std::vector<std::string> errors;
  auto check = [&](bool ok, const std::string& message) {
    if (!ok) errors.push_back(message);
  };
  auto wrap = [&](const std::string& field, auto&& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      errors.push_back(field + ": " + e.what());
    }
  };

  wrap("water", [&] { cfg.water.properties.validate(); });
  wrap("geometry", [&] {
    channel::LinkGeometry g = cfg.geometry;
    g.distance = 1.0;
    g.validate();
  });

  if (cfg.hop_lengths_m.empty()) {
    check(!cfg.distances_m.empty(), "distance_m: at least one end-to-end distance (or hop_lengths_m) is required");
    for (double d : cfg.distances_m) check(std::isfinite(d) && d > 0.0, "distance_m: distances must be > 0");
    check(!cfg.relays.empty(), "relays: at least one relay count is required");
    for (int n : cfg.relays) check(n >= 0 && n <= 64, "relays: relay counts must lie in [0, 64]");
  } else {
    check(cfg.distances_m.empty(), "hop_lengths_m: cannot be combined with distance_m");
    for (std::size_t i = 0; i < cfg.hop_lengths_m.size(); ++i) {
      const auto& set = cfg.hop_lengths_m[i];
      const std::string path = "hop_lengths_m[" + std::to_string(i) + "]";
      check(!set.empty(), path + ": at least one hop is required");
      for (double d : set) check(std::isfinite(d) && d > 0.0, path + ": hop lengths must be > 0");
    }
  }

  const auto sets = cfg.hop_sets();
  if (cfg.turbulence.explicit_sigma()) {
    for (double s : cfg.turbulence.sigma_x_sq)
      check(std::isfinite(s) && s >= 0.0, "turbulence.sigma_x_sq: values must be >= 0");
    if (cfg.turbulence.sigma_x_sq.size() > 1) {
      for (const auto& set : sets)
        check(set.size() == cfg.turbulence.sigma_x_sq.size(),
              "turbulence.sigma_x_sq: per-hop list length must match every configuration's hop count");
    }
  } else {
    check(cfg.turbulence.chi_t >= 0.0, "turbulence.chi_t: must be >= 0");
    check(cfg.turbulence.epsilon > 0.0, "turbulence.epsilon: must be > 0");
    check(cfg.turbulence.w < 0.0, "turbulence.w: must be < 0");
    check(cfg.turbulence.kinematic_viscosity > 0.0, "turbulence.kinematic_viscosity: must be > 0");
  }

  const auto& n = cfg.noise;
  check(n.quantum_efficiency > 0.0 && n.quantum_efficiency <= 1.0,
        "noise.quantum_efficiency: must lie in (0, 1]");
  check(n.temperature_k > 0.0, "noise.temperature_k: must be > 0");
  check(n.load_resistance_ohm > 0.0, "noise.load_resistance_ohm: must be > 0");
  check(n.dark_current_a >= 0.0, "noise.dark_current_a: must be >= 0");
  check(n.background_rate_per_s >= 0.0, "noise.background_rate_per_s: must be >= 0");

  check(!cfg.data_rates_bps.empty(), "data_rate_bps: at least one data rate is required");
  for (double r : cfg.data_rates_bps)
    check(std::isfinite(r) && r > 0.0, "data_rate_bps: data rates must be > 0");

  check(std::isfinite(cfg.power_sweep.start_dbm) && std::isfinite(cfg.power_sweep.stop_dbm) &&
            cfg.power_sweep.start_dbm < cfg.power_sweep.stop_dbm,
        "power_sweep.start_dbm: must be finite and below power_sweep.stop_dbm");
  check(std::isfinite(cfg.power_sweep.step_db) && cfg.power_sweep.step_db > 0.0,
        "power_sweep.step: step_db must be > 0");

  check(!cfg.methods.empty(), "methods: at least one method is required");
  for (const auto& m : cfg.methods) {
    check(std::find(std::begin(kMethodNames), std::end(kMethodNames), m) != std::end(kMethodNames),
          "methods: unknown method '" + m + "'");
  }
  check(cfg.ghq_order >= 1 && cfg.ghq_order <= 64, "ghq_order: must lie in [1, 64]");

  if (!cfg.power_shares.empty()) {
    double sum = 0.0;
    for (double s : cfg.power_shares) {
      check(std::isfinite(s) && s >= 0.0, "power_shares: shares must be >= 0");
      sum += s;
    }
    check(std::abs(sum - 1.0) <= 1e-9, "power_shares: shares must sum to 1");
    for (const auto& set : sets)
      check(set.size() == cfg.power_shares.size(),
            "power_shares: length must match every configuration's hop count");
  }

  check(cfg.tail_epsilon > 0.0 && cfg.tail_epsilon < 1.0, "tail_epsilon: must lie in (0, 1)");
  if (cfg.bin_width_s)
    check(std::isfinite(*cfg.bin_width_s) && *cfg.bin_width_s > 0.0, "bin_width_s: must be > 0");
  check(cfg.detector == "awgn" || cfg.detector == "photon_counting",
        "detector: must be 'awgn' or 'photon_counting'");
  check(cfg.mc.n_photons >= 1, "mc.n_photons: must be >= 1");
  check(cfg.mc.n_bits >= 1, "mc.n_bits: must be >= 1");
  return errors;
}

RunConfig parse_config(const json& doc) {
  std::vector<std::string> errors;
  Reader r(errors);
  RunConfig cfg;

  r.expect_object(doc, "",
                  {"water", "geometry", "distance_m", "distances_m", "relays", "hop_lengths_m",
                   "turbulence", "sigma_x_sq", "noise", "data_rate_bps", "data_rates_bps",
                   "power_sweep", "methods", "ghq_order", "power_shares", "tail_epsilon",
                   "bin_width_s", "detector", "mc"});
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object at the top level");

  read_water(doc, cfg, r);

  if (doc.contains("geometry")) {
    const json& g = doc.at("geometry");
    r.expect_object(g, "geometry",
                    {"aperture_diameter_m", "fov_half_angle_deg", "beam_divergence_full_deg",
                     "wavelength_m"});
    if (g.is_object()) {
      r.number(g, "geometry", "aperture_diameter_m", cfg.geometry.aperture_diameter);
      r.number(g, "geometry", "fov_half_angle_deg", cfg.geometry.fov_half_angle_deg);
      r.number(g, "geometry", "beam_divergence_full_deg", cfg.geometry.beam_divergence_deg);
      r.number(g, "geometry", "wavelength_m", cfg.geometry.wavelength);
    }
  }

  read_links(doc, cfg, r);
  read_turbulence(doc, cfg, r);

  if (doc.contains("noise")) {
    const json& n = doc.at("noise");
    r.expect_object(n, "noise",
                    {"quantum_efficiency", "temperature_k", "load_resistance_ohm", "dark_current_a",
                     "background_rate_per_s"});
    if (n.is_object()) {
      r.number(n, "noise", "quantum_efficiency", cfg.noise.quantum_efficiency);
      r.number(n, "noise", "temperature_k", cfg.noise.temperature_k);
      r.number(n, "noise", "load_resistance_ohm", cfg.noise.load_resistance_ohm);
      r.number(n, "noise", "dark_current_a", cfg.noise.dark_current_a);
      r.number(n, "noise", "background_rate_per_s", cfg.noise.background_rate_per_s);
    }
  }

  if (doc.contains("data_rate_bps") && doc.contains("data_rates_bps"))
    r.error("data_rate_bps and data_rates_bps are mutually exclusive");
  r.numbers(doc, "", "data_rate_bps", cfg.data_rates_bps);
  r.numbers(doc, "", "data_rates_bps", cfg.data_rates_bps);

  if (doc.contains("power_sweep")) {
    const json& p = doc.at("power_sweep");
    r.expect_object(p, "power_sweep", {"start_dbm", "stop_dbm", "step_db"});
    if (p.is_object()) {
      r.number(p, "power_sweep", "start_dbm", cfg.power_sweep.start_dbm);
      r.number(p, "power_sweep", "stop_dbm", cfg.power_sweep.stop_dbm);
      r.number(p, "power_sweep", "step_db", cfg.power_sweep.step_db);
    }
  }

  if (doc.contains("methods")) {
    const json& m = doc.at("methods");
    cfg.methods.clear();
    if (m.is_string()) {
      cfg.methods.push_back(m.get<std::string>());
    } else if (m.is_array()) {
      for (const auto& item : m) {
        if (item.is_string())
          cfg.methods.push_back(item.get<std::string>());
        else
          r.error("methods: expected strings");
      }
    } else {
      r.error("methods: expected a string or an array of strings");
    }
  }

  r.integer(doc, "", "ghq_order", cfg.ghq_order);

  if (doc.contains("power_shares")) {
    const json& s = doc.at("power_shares");
    if (s.is_string()) {
      if (s.get<std::string>() != "equal") r.error("power_shares: expected \"equal\" or an array");
    } else {
      r.numbers(doc, "", "power_shares", cfg.power_shares);
    }
  }

  r.number(doc, "", "tail_epsilon", cfg.tail_epsilon);
  if (doc.contains("bin_width_s") && !doc.at("bin_width_s").is_null()) {
    double bw = 0.0;
    r.number(doc, "", "bin_width_s", bw);
    cfg.bin_width_s = bw;
  }
  r.string(doc, "", "detector", cfg.detector);

  if (doc.contains("mc")) {
    const json& mc = doc.at("mc");
    r.expect_object(mc, "mc", {"n_photons", "n_bits", "seed"});
    if (mc.is_object()) {
      r.integer(mc, "mc", "n_photons", cfg.mc.n_photons);
      r.integer(mc, "mc", "n_bits", cfg.mc.n_bits);
      r.integer(mc, "mc", "seed", cfg.mc.seed);
    }
  }

  if (errors.empty()) errors = validate(cfg);
  if (!errors.empty()) {
    std::string message = "invalid configuration:";
    for (const auto& e : errors) message += "\n  - " + e;
    throw ConfigError(message);
  }
  return cfg;
}

RunConfig parse_config_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error at " + line_column(text, e.byte == 0 ? 0 : e.byte - 1) +
                      ": " + e.what());
  }
  return parse_config(doc);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config_text(buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

json to_json(const RunConfig& cfg) {
  json doc;
  const auto& w = cfg.water.properties;
  doc["water"] = {{"preset", cfg.water.preset},
                  {"absorption_per_m", w.absorption},
                  {"scattering_per_m", w.scattering},
                  {"hg_asymmetry", w.hg_asymmetry},
                  {"refractive_index", w.refractive_index}};
  doc["geometry"] = {{"aperture_diameter_m", cfg.geometry.aperture_diameter},
                     {"fov_half_angle_deg", cfg.geometry.fov_half_angle_deg},
                     {"beam_divergence_full_deg", cfg.geometry.beam_divergence_deg},
                     {"wavelength_m", cfg.geometry.wavelength}};
  if (cfg.hop_lengths_m.empty()) {
    doc["distances_m"] = cfg.distances_m;
    doc["relays"] = cfg.relays;
  } else {
    doc["hop_lengths_m"] = cfg.hop_lengths_m;
  }
  if (cfg.turbulence.explicit_sigma()) {
    doc["turbulence"] = {{"sigma_x_sq", cfg.turbulence.sigma_x_sq}};
  } else {
    doc["turbulence"] = {{"chi_t", cfg.turbulence.chi_t},
                         {"epsilon", cfg.turbulence.epsilon},
                         {"w", cfg.turbulence.w},
                         {"kinematic_viscosity", cfg.turbulence.kinematic_viscosity}};
  }
  doc["noise"] = {{"quantum_efficiency", cfg.noise.quantum_efficiency},
                  {"temperature_k", cfg.noise.temperature_k},
                  {"load_resistance_ohm", cfg.noise.load_resistance_ohm},
                  {"dark_current_a", cfg.noise.dark_current_a},
                  {"background_rate_per_s", cfg.noise.background_rate_per_s}};
  doc["data_rates_bps"] = cfg.data_rates_bps;
  doc["power_sweep"] = {{"start_dbm", cfg.power_sweep.start_dbm},
                        {"stop_dbm", cfg.power_sweep.stop_dbm},
                        {"step_db", cfg.power_sweep.step_db}};
  doc["methods"] = cfg.methods;
  doc["ghq_order"] = cfg.ghq_order;
  doc["power_shares"] = cfg.power_shares.empty() ? json("equal") : json(cfg.power_shares);
  doc["tail_epsilon"] = cfg.tail_epsilon;
  doc["bin_width_s"] = cfg.bin_width_s ? finite_or_null(*cfg.bin_width_s) : json(nullptr);
  doc["detector"] = cfg.detector;
  doc["mc"] = {{"n_photons", cfg.mc.n_photons}, {"n_bits", cfg.mc.n_bits}, {"seed", cfg.mc.seed}};
  return doc;
}

std::string config_hash(const RunConfig& cfg) {
  const std::string text = to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace uwoc::config
