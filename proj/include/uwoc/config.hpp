#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "uwoc/channel.hpp"

namespace uwoc::config {

struct WaterConfig {
  std::string preset = "coastal";  // empty when fully explicit
  channel::WaterProperties properties = channel::WaterProperties::preset("coastal");

  bool operator==(const WaterConfig&) const = default;
};

/// Either explicit sigma_X^2 (one value for every hop, or one per hop), or
/// spectrum parameters from which each hop's scintillation index is computed.
struct TurbulenceConfig {
  std::vector<double> sigma_x_sq;
  double chi_t = 2e-7;
  double epsilon = 1.5e-5;
  double w = -2.5;
  double kinematic_viscosity = 1e-6;

  bool explicit_sigma() const { return !sigma_x_sq.empty(); }
  bool operator==(const TurbulenceConfig&) const = default;
};

struct NoiseConfig {
  double quantum_efficiency = 0.8;
  double temperature_k = 290.0;
  double load_resistance_ohm = 100.0;
  double dark_current_a = 1.226e-9;
  double background_rate_per_s = 1.8094e8;

  bool operator==(const NoiseConfig&) const = default;
};

struct PowerSweep {
  double start_dbm = -10.0;
  double stop_dbm = 50.0;
  double step_db = 1.0;

  /// start, start + step, ... up to stop inclusive (within step/1e6).
  std::vector<double> points() const;
  bool operator==(const PowerSweep&) const = default;
};

struct McSettings {
  std::uint64_t n_photons = 1'000'000;
  std::uint64_t n_bits = 100'000;
  std::uint64_t seed = 1;

  bool operator==(const McSettings&) const = default;
};

inline constexpr std::string_view kMethodNames[] = {"awgn_ghqf", "saddle_point", "gaussian",
                                                    "montecarlo"};

struct RunConfig {
  WaterConfig water;
  channel::LinkGeometry geometry;  // distance unused; hops carry their own length

  // Configuration points: explicit hop lengths, or every (distance, relays)
  // pair split into relays + 1 equal hops.
  std::vector<double> distances_m;
  std::vector<int> relays{0};
  std::vector<std::vector<double>> hop_lengths_m;

  TurbulenceConfig turbulence;
  NoiseConfig noise;
  std::vector<double> data_rates_bps;
  PowerSweep power_sweep;
  std::vector<std::string> methods{"awgn_ghqf"};
  int ghq_order = 30;
  std::vector<double> power_shares;  // empty = equal split
  double tail_epsilon = 1e-6;
  std::optional<double> bin_width_s;  // default: smallest bit duration / 10
  std::string detector = "awgn";      // bit simulator detector for "montecarlo"
  McSettings mc;

  /// Hop lengths of every configuration point.
  std::vector<std::vector<double>> hop_sets() const;
  double resolved_bin_width() const;

  bool operator==(const RunConfig&) const = default;
};

/// Every violated invariant, with the offending field path.
std::vector<std::string> validate(const RunConfig& cfg);

/// Builds a config from a JSON document, filling defaults. Throws ConfigError
/// listing unknown fields, type errors and every violated invariant.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_text(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical form with every default resolved.
nlohmann::json to_json(const RunConfig& cfg);

/// Stable 64-bit FNV-1a of the canonical JSON, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

}  // namespace uwoc::config
