#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uwoc/channel.hpp"
#include "uwoc/config.hpp"

namespace uwoc::sweep {

/// Computed BERs below this are reported as 0 and counted in the metadata.
inline constexpr double kBerFloor = 1e-300;

struct MissingPoint {
  double power_dbm = 0.0;
  std::string reason;
};

struct HopMetadata {
  double length_m = 0.0;
  std::size_t memory = 0;            // channel memory L
  double sigma_x_sq = 0.0;
  double scintillation_index = 0.0;
  double received_fraction = 0.0;   // total of the impulse response
  double signal_fraction = 0.0;     // e_signal
};

/// One BER-versus-power curve for a method at one configuration point.
struct BerCurve {
  std::string id;      // file-name friendly, unique within a run
  std::string method;  // awgn_ghqf, saddle_point, gaussian or montecarlo
  std::vector<double> x;        // average transmitted power per bit, dBm
  std::vector<double> y;        // end-to-end BER (exact parity form)
  std::vector<double> y_upper;  // all-hops-correct upper bound; empty for montecarlo
  std::vector<double> ci_low;   // montecarlo only
  std::vector<double> ci_high;
  std::vector<MissingPoint> missing;

  // Metadata.
  std::string config_hash;
  std::uint64_t seed = 0;
  double data_rate_bps = 0.0;
  std::size_t relays = 0;
  std::vector<HopMetadata> hops;
  bool isi_sampled = false;
  std::size_t floor_clamped = 0;
  std::string detector;  // montecarlo only
};

struct SweepOptions {
  unsigned threads = 1;
  bool cache_channels = true;
};

struct CacheStats {
  std::size_t hits = 0;
  std::size_t misses = 0;
};

struct SweepResult {
  std::vector<BerCurve> curves;
  CacheStats cache;
};

/// Impulse-response seed for a hop of the given length. Hops of equal length
/// share a response.
std::uint64_t channel_seed(std::uint64_t seed, double length_m);

/// Impulse response of one hop under the run's water, geometry and MC settings.
channel::ImpulseResponse hop_impulse_response(const config::RunConfig& cfg, double length_m,
                                              unsigned threads = 1);

/// One curve per (configuration point, data rate, method), in that nesting order.
SweepResult run_sweep(const config::RunConfig& cfg, const SweepOptions& options = {});

/// Linear interpolation of log10(BER) against dBm; nullopt if the curve never
/// crosses `target`.
std::optional<double> power_at_ber(const BerCurve& curve, double target);

enum class Format { csv, json };

/// csv: one `<id>.csv` per curve with header method,power_dBm,ber,ci_low,ci_high.
/// json: a single report.json with the config, tool version and all curves.
/// Returns the written paths. Throws IoError.
std::vector<std::filesystem::path> emit_curves(const std::vector<BerCurve>& curves, Format format,
                                               const std::filesystem::path& out_dir,
                                               const config::RunConfig& cfg);

std::string curves_csv(const BerCurve& curve);
nlohmann::json report_json(const std::vector<BerCurve>& curves, const config::RunConfig& cfg);

}  // namespace uwoc::sweep
