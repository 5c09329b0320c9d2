#include "uwoc/channel.hpp"

#include "uwoc/constants.hpp"
#include "uwoc/parallel.hpp"
#include "uwoc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

namespace uwoc::channel {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

bool finite_all(std::initializer_list<double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

struct Direction {
  double x, y, z;
};

double sample_hg_cosine(double g, double xi) {
  if (std::abs(g) < 1e-6) return 2.0 * xi - 1.0;
  const double s = (1.0 - g * g) / (1.0 - g + 2.0 * g * xi);
  return std::clamp((1.0 + g * g - s * s) / (2.0 * g), -1.0, 1.0);
}

// Rotates `u` by polar angle acos(cos_theta) and azimuth phi about itself.
Direction rotate(const Direction& u, double cos_theta, double phi) {
  const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
  const double cos_phi = std::cos(phi);
  const double sin_phi = std::sin(phi);
  if (std::abs(u.z) > 0.99999) {
    return {sin_theta * cos_phi, sin_theta * sin_phi, std::copysign(cos_theta, u.z)};
  }
  const double t = std::sqrt(1.0 - u.z * u.z);
  Direction v{
      sin_theta * (u.x * u.z * cos_phi - u.y * sin_phi) / t + u.x * cos_theta,
      sin_theta * (u.y * u.z * cos_phi + u.x * sin_phi) / t + u.y * cos_theta,
      -sin_theta * cos_phi * t + u.z * cos_theta,
  };
  const double norm = std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
  return {v.x / norm, v.y / norm, v.z / norm};
}

struct BatchTally {
  std::vector<double> bins;
  double weight_sum = 0.0;
  double weight_sq_sum = 0.0;
  double late = 0.0;
  double earliest = std::numeric_limits<double>::infinity();
};

BatchTally trace_batch(const LinkGeometry& geo, const WaterProperties& water,
                       const TraceOptions& opt, std::uint64_t count, std::uint64_t batch_seed) {
  Rng rng(batch_seed);
  BatchTally tally;

  const double c = water.extinction();
  const double albedo = water.albedo();
  const double radius_sq = 0.25 * geo.aperture_diameter * geo.aperture_diameter;
  const double cos_fov = std::cos(geo.fov_half_angle_deg * kDegToRad);
  const double cos_div = std::cos(0.5 * geo.beam_divergence_deg * kDegToRad);
  const double speed = constants::speed_of_light / water.refractive_index;
  const double t_start = geo.distance / speed;
  const std::size_t max_bins =
      static_cast<std::size_t>(std::ceil(opt.time_window / opt.bin_width)) + 1;

  for (std::uint64_t p = 0; p < count; ++p) {
    // Launch inside the divergence cone, uniform in solid angle.
    const double cos_launch = 1.0 - uniform01(rng) * (1.0 - cos_div);
    const double phi0 = 2.0 * std::numbers::pi * uniform01(rng);
    const double sin_launch = std::sqrt(std::max(0.0, 1.0 - cos_launch * cos_launch));
    Direction u{sin_launch * std::cos(phi0), sin_launch * std::sin(phi0), cos_launch};
    double x = 0.0, y = 0.0, z = 0.0;
    double weight = 1.0;
    double path = 0.0;
    double photon_total = 0.0;

    auto record = [&](double w, double total_path) {
      const double raw_delay = total_path / speed - t_start;
      tally.earliest = std::min(tally.earliest, raw_delay);
      // Rounding only: a packet cannot beat the straight path.
      const double delay = std::max(0.0, raw_delay);
      photon_total += w;
      const auto bin = static_cast<std::size_t>(delay / opt.bin_width);
      if (bin >= max_bins) {
        tally.late += w;
      } else {
        if (bin >= tally.bins.size()) tally.bins.resize(bin + 1, 0.0);
        tally.bins[bin] += w;
      }
    };
    auto captured = [&](double px, double py, double uz) {
      return px * px + py * py <= radius_sq && uz >= cos_fov;
    };

    for (std::uint32_t scatterings = 0;; ++scatterings) {
      double step;
      if (scatterings == 0 && opt.forced_first_flight && c > 0.0 && u.z > 0.0) {
        // Score the unscattered flight exactly, then force the first
        // interaction in front of the receiver plane.
        const double to_plane = geo.distance / u.z;
        const double through = std::exp(-c * to_plane);
        if (captured(u.x * to_plane, u.y * to_plane, u.z)) record(weight * through, to_plane);
        weight *= 1.0 - through;
        step = -std::log1p(-uniform01(rng) * (1.0 - through)) / c;
      } else {
        step = c > 0.0 ? -std::log1p(-uniform01(rng)) / c : std::numeric_limits<double>::infinity();
      }
      if (u.z > 0.0) {
        const double to_plane = (geo.distance - z) / u.z;
        if (step >= to_plane) {
          if (captured(x + u.x * to_plane, y + u.y * to_plane, u.z)) record(weight, path + to_plane);
          break;
        }
      }
      if (!std::isfinite(step)) break;
      x += u.x * step;
      y += u.y * step;
      z += u.z * step;
      path += step;

      weight *= albedo;
      if (weight < opt.weight_floor || scatterings >= opt.max_scatterings) break;
      const double cos_theta = sample_hg_cosine(water.hg_asymmetry, uniform01(rng));
      u = rotate(u, cos_theta, 2.0 * std::numbers::pi * uniform01(rng));
    }
    tally.weight_sum += photon_total;
    tally.weight_sq_sum += photon_total * photon_total;
  }
  return tally;
}

}  // namespace

double WaterProperties::albedo() const {
  const double c = extinction();
  return c > 0.0 ? scattering / c : 0.0;
}

void WaterProperties::validate() const {
  if (!finite_all({absorption, scattering, hg_asymmetry, refractive_index}))
    throw std::invalid_argument("water properties must be finite");
  if (absorption < 0.0) throw std::invalid_argument("absorption coefficient must be >= 0");
  if (scattering < 0.0) throw std::invalid_argument("scattering coefficient must be >= 0");
  if (!(hg_asymmetry > -1.0 && hg_asymmetry < 1.0))
    throw std::invalid_argument("HG asymmetry g must lie in (-1, 1)");
  if (refractive_index < 1.0) throw std::invalid_argument("refractive index must be >= 1");
}

WaterProperties WaterProperties::preset(std::string_view name) {
  if (name == "coastal") return {0.179, 0.219, 0.924, 1.331};
  if (name == "clear_ocean") return {0.114, 0.037, 0.924, 1.331};
  if (name == "harbor") return {0.295, 1.875, 0.924, 1.331};
  throw std::invalid_argument("unknown water preset '" + std::string(name) +
                              "' (expected coastal, clear_ocean or harbor)");
}

void LinkGeometry::validate() const {
  if (!finite_all({distance, aperture_diameter, fov_half_angle_deg, beam_divergence_deg,
                   wavelength}))
    throw std::invalid_argument("link geometry must be finite");
  if (distance <= 0.0) throw std::invalid_argument("link distance must be > 0");
  if (aperture_diameter <= 0.0) throw std::invalid_argument("aperture diameter must be > 0");
  if (!(fov_half_angle_deg > 0.0 && fov_half_angle_deg <= 90.0))
    throw std::invalid_argument("field of view half angle must lie in (0, 90] degrees");
  if (beam_divergence_deg < 0.0 || beam_divergence_deg >= 180.0)
    throw std::invalid_argument("beam divergence must lie in [0, 180) degrees");
  if (wavelength <= 0.0) throw std::invalid_argument("wavelength must be > 0");
}

double ImpulseResponse::total() const {
  double sum = 0.0;
  for (double e : energy_fraction) sum += e;
  return sum;
}

ImpulseResponse simulate_impulse_response(const LinkGeometry& geometry,
                                          const WaterProperties& water,
                                          const TraceOptions& options) {
  geometry.validate();
  water.validate();
  if (options.n_photons < 1) throw std::invalid_argument("n_photons must be >= 1");
  if (!(options.bin_width > 0.0) || !std::isfinite(options.bin_width))
    throw std::invalid_argument("bin_width must be finite and > 0");
  if (!(options.time_window > 0.0)) throw std::invalid_argument("time_window must be > 0");
  if (options.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");

  const std::uint64_t n_batches =
      (options.n_photons + options.batch_size - 1) / options.batch_size;
  std::vector<BatchTally> tallies(n_batches);
  parallel_for(n_batches, options.threads, [&](std::size_t b) {
    const std::uint64_t first = b * options.batch_size;
    const std::uint64_t count = std::min(options.batch_size, options.n_photons - first);
    tallies[b] = trace_batch(geometry, water, options, count, derive_seed(options.seed, b));
  });

  ImpulseResponse ir;
  ir.bin_width = options.bin_width;
  ir.t_start = geometry.distance * water.refractive_index / constants::speed_of_light;
  ir.n_photons = options.n_photons;

  std::size_t n_bins = 0;
  for (const auto& t : tallies) n_bins = std::max(n_bins, t.bins.size());
  ir.energy_fraction.assign(n_bins, 0.0);
  double weight_sum = 0.0, weight_sq_sum = 0.0, late = 0.0;
  for (const auto& t : tallies) {
    for (std::size_t j = 0; j < t.bins.size(); ++j) ir.energy_fraction[j] += t.bins[j];
    weight_sum += t.weight_sum;
    weight_sq_sum += t.weight_sq_sum;
    late += t.late;
    ir.earliest_arrival = std::min(ir.earliest_arrival, ir.t_start + t.earliest);
  }

  const double n = static_cast<double>(options.n_photons);
  for (double& e : ir.energy_fraction) e /= n;
  ir.late_fraction = late / n;
  const double mean = weight_sum / n;
  const double variance = std::max(0.0, weight_sq_sum / n - mean * mean);
  ir.standard_error = std::sqrt(variance / n);
  ir.no_photons_received = weight_sum == 0.0;
  return ir;
}

double BitEnergies::captured() const {
  double sum = signal + truncated;
  for (double e : isi) sum += e;
  return sum;
}

namespace {

// Area of {x in [0, width], y in [0, pulse] : x + y < s}.
double ramp_area(double s, double width, double pulse) {
  auto r = [](double u) { return u > 0.0 ? 0.5 * u * u : 0.0; };
  return r(s) - r(s - width) - r(s - pulse) + r(s - width - pulse);
}

}  // namespace

std::vector<double> slot_energies(const ImpulseResponse& ir, double bit_duration,
                                  double pulse_duration) {
  if (ir.energy_fraction.empty()) throw std::invalid_argument("impulse response is empty");
  if (!(bit_duration > 0.0) || !std::isfinite(bit_duration))
    throw std::invalid_argument("bit duration must be finite and > 0");
  if (pulse_duration == 0.0) pulse_duration = bit_duration;
  if (!(pulse_duration > 0.0) || pulse_duration > bit_duration)
    throw std::invalid_argument("pulse duration must lie in (0, bit duration]");
  if (!(ir.bin_width > 0.0)) throw std::invalid_argument("impulse response bin width must be > 0");

  // Work in units of the bit duration.
  const double width = ir.bin_width / bit_duration;
  const double pulse = pulse_duration / bit_duration;
  const double span_area = width * pulse;

  std::vector<double> slots;
  for (std::size_t j = 0; j < ir.energy_fraction.size(); ++j) {
    const double energy = ir.energy_fraction[j];
    if (energy == 0.0) continue;
    const double start = static_cast<double>(j) * width;
    const double end = start + width + pulse;
    const auto first_slot = static_cast<std::size_t>(std::floor(start));
    const auto last_slot = static_cast<std::size_t>(std::ceil(end));
    if (slots.size() < last_slot) slots.resize(last_slot, 0.0);
    double previous = 0.0;
    for (std::size_t m = first_slot; m < last_slot; ++m) {
      const double upper = ramp_area(static_cast<double>(m + 1) - start, width, pulse);
      slots[m] += energy * (upper - previous) / span_area;
      previous = upper;
    }
  }
  while (slots.size() > 1 && slots.back() == 0.0) slots.pop_back();
  if (slots.empty()) slots.push_back(0.0);
  return slots;
}

BitEnergies bit_frame_energies(const ImpulseResponse& ir, double bit_duration,
                               double tail_epsilon, double pulse_duration) {
  if (!(tail_epsilon > 0.0 && tail_epsilon < 1.0))
    throw std::invalid_argument("tail_epsilon must lie in (0, 1)");
  const auto slots = slot_energies(ir, bit_duration, pulse_duration);
  const std::size_t memory = channel_memory(slots, tail_epsilon);

  BitEnergies out;
  out.signal = slots[0];
  const std::size_t kept = std::min(memory + 1, slots.size());
  out.isi.assign(slots.begin() + 1, slots.begin() + static_cast<std::ptrdiff_t>(kept));
  out.isi.resize(memory, 0.0);
  for (std::size_t k = kept; k < slots.size(); ++k) out.truncated += slots[k];
  return out;
}

std::size_t channel_memory(std::span<const double> slot_energy, double tail_epsilon) {
  if (!(tail_epsilon > 0.0 && tail_epsilon < 1.0))
    throw std::invalid_argument("tail_epsilon must lie in (0, 1)");
  double total = 0.0;
  for (double e : slot_energy) {
    if (!(e >= 0.0) || !std::isfinite(e))
      throw std::invalid_argument("slot energies must be finite and >= 0");
    total += e;
  }
  if (total == 0.0) return 0;
  // tail[L] = energy in slots > L, accumulated from the end.
  const double limit = tail_epsilon * total;
  double tail = 0.0;
  std::size_t memory = slot_energy.size() - 1;
  for (std::size_t l = slot_energy.size() - 1; l-- > 0;) {
    tail += slot_energy[l + 1];
    if (tail < limit)
      memory = l;
    else
      break;
  }
  return memory;
}

void write_csv(std::ostream& out, const ImpulseResponse& ir) {
  out << "bin_start_s,energy_fraction\n";
  char line[64];
  for (std::size_t j = 0; j < ir.energy_fraction.size(); ++j) {
    const double start = ir.t_start + static_cast<double>(j) * ir.bin_width;
    std::snprintf(line, sizeof line, "%.17g,%.17g\n", start, ir.energy_fraction[j]);
    out << line;
  }
}

}  // namespace uwoc::channel
