#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace uwoc::channel {

/// Inherent optical properties of the water column.
struct WaterProperties {
  double absorption = 0.179;        // a, 1/m
  double scattering = 0.219;        // b, 1/m
  double hg_asymmetry = 0.924;      // g of the Henyey-Greenstein phase function
  double refractive_index = 1.331;  // n at 532 nm

  double extinction() const { return absorption + scattering; }
  double albedo() const;
  void validate() const;

  /// Named water types: "coastal", "clear_ocean", "harbor".
  static WaterProperties preset(std::string_view name);

  bool operator==(const WaterProperties&) const = default;
};

/// On-axis transmitter/receiver pair separated by `distance`.
struct LinkGeometry {
  double distance = 0.0;               // d, m
  double aperture_diameter = 0.2;      // D0, m
  double fov_half_angle_deg = 40.0;    // receiver half-angle field of view
  double beam_divergence_deg = 0.02;   // full divergence angle of the source
  double wavelength = 532e-9;          // m

  void validate() const;

  bool operator==(const LinkGeometry&) const = default;
};

/// Fading-free impulse response, binned in time from the earliest possible
/// arrival. Bin j covers [t_start + j*bin_width, t_start + (j+1)*bin_width)
/// and holds the fraction of transmitted energy that arrived in it.
struct ImpulseResponse {
  double bin_width = 0.0;
  double t_start = 0.0;
  std::vector<double> energy_fraction;

  std::uint64_t n_photons = 0;
  double standard_error = 0.0;  // MC standard error of total()
  double late_fraction = 0.0;   // energy received after the time window, not binned
  bool no_photons_received = false;
  double earliest_arrival = std::numeric_limits<double>::infinity();  // first recorded packet, s

  double total() const;
};

struct TraceOptions {
  std::uint64_t n_photons = 1'000'000;
  double bin_width = 1e-10;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  double weight_floor = 1e-6;
  std::uint32_t max_scatterings = 10'000;
  double time_window = 500e-9;  // arrivals later than t_start + window are not binned
  // Score the unscattered flight analytically and force the first
  // interaction before the receiver plane. Unbiased; removes the sampling
  // noise of the on-time component, which dominates at long range.
  bool forced_first_flight = true;
  // Photons per batch. Batch b draws from derive_seed(seed, b), so the
  // result does not depend on the thread count.
  std::uint64_t batch_size = 1 << 16;
};

/// Traces photon packets from the source to the receiver plane.
///
/// Free paths are drawn from Exp(c); at each interaction the packet weight is
/// multiplied by the albedo b/c and the direction is resampled from the
/// Henyey-Greenstein phase function. Packets below `weight_floor` are dropped.
/// A packet is recorded when it crosses the receiver plane inside the
/// aperture with an incidence angle inside the field of view; packets that
/// cross the plane anywhere else are lost.
/// With `forced_first_flight` the unscattered component is scored exactly.
ImpulseResponse simulate_impulse_response(const LinkGeometry& geometry,
                                          const WaterProperties& water,
                                          const TraceOptions& options);

/// Energy captured by the integrate-and-dump receiver in each bit slot.
struct BitEnergies {
  double signal = 0.0;        // slot 0, the bit's own slot
  std::vector<double> isi;    // isi[k-1]: leakage into the k-th later slot, k = 1..L
  double truncated = 0.0;     // energy beyond slot L, dropped from the model

  std::size_t memory() const { return isi.size(); }
  double captured() const;
};

/// Reduces an impulse response to per-slot energies for a rectangular pulse
/// of `pulse_duration` seconds (defaults to the full bit, NRZ). Slot 0 starts
/// at t_start; each bin is treated as uniform over its width.
BitEnergies bit_frame_energies(const ImpulseResponse& ir, double bit_duration,
                               double tail_epsilon, double pulse_duration = 0.0);

/// Energy of a unit pulse response falling into each bit slot.
std::vector<double> slot_energies(const ImpulseResponse& ir, double bit_duration,
                                  double pulse_duration = 0.0);

/// Smallest L such that the energy in slots > L is below
/// tail_epsilon * total energy.
std::size_t channel_memory(std::span<const double> slot_energy, double tail_epsilon);

/// `bin_start_s,energy_fraction`, one row per bin.
void write_csv(std::ostream& out, const ImpulseResponse& ir);

}  // namespace uwoc::channel
