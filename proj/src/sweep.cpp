#include "uwoc/sweep.hpp"

#include "uwoc/ber.hpp"
#include "uwoc/error.hpp"
#include "uwoc/parallel.hpp"
#include "uwoc/relay.hpp"
#include "uwoc/rng.hpp"
#include "uwoc/simulate.hpp"
#include "uwoc/turbulence.hpp"

#include <spdlog/spdlog.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

namespace uwoc::sweep {

namespace {

using nlohmann::json;

std::string format_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string format_exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string point_label(const std::vector<double>& hops, double rate) {
  bool equal = true;
  double total = 0.0;
  for (double h : hops) {
    total += h;
    equal = equal && h == hops.front();
  }
  std::string label;
  if (equal) {
    label = "d" + format_g(total) + "m_N" + std::to_string(hops.size() - 1);
  } else {
    label = "hops";
    for (std::size_t i = 0; i < hops.size(); ++i) label += (i ? "-" : "") + format_g(hops[i]);
    label += "m";
  }
  return label + "_" + format_g(rate / 1e6) + "Mbps";
}

struct PointResult {
  bool ok = false;
  double y = 0.0, upper = 0.0, ci_low = 0.0, ci_high = 0.0;
  bool clamped = false;
  bool isi_sampled = false;
  std::string reason;
};

double clamp_floor(double v, bool& clamped) {
  if (v < kBerFloor) {
    if (v != 0.0) clamped = true;
    return 0.0;
  }
  return v;
}

}  // namespace

std::uint64_t channel_seed(std::uint64_t seed, double length_m) {
  return derive_seed(seed, std::bit_cast<std::uint64_t>(length_m));
}

channel::ImpulseResponse hop_impulse_response(const config::RunConfig& cfg, double length_m,
                                              unsigned threads) {
  channel::LinkGeometry geometry = cfg.geometry;
  geometry.distance = length_m;
  channel::TraceOptions trace;
  trace.n_photons = cfg.mc.n_photons;
  trace.bin_width = cfg.resolved_bin_width();
  trace.seed = channel_seed(cfg.mc.seed, length_m);
  trace.threads = threads;
  return channel::simulate_impulse_response(geometry, cfg.water.properties, trace);
}

SweepResult run_sweep(const config::RunConfig& cfg, const SweepOptions& options) {
  if (const auto errors = config::validate(cfg); !errors.empty()) {
    std::string message = "invalid configuration:";
    for (const auto& e : errors) message += "\n  - " + e;
    throw ConfigError(message);
  }

  const auto rule = turbulence::ghq_rule(cfg.ghq_order);
  const std::string hash = config::config_hash(cfg);
  const auto powers = cfg.power_sweep.points();
  const auto sets = cfg.hop_sets();

  SweepResult result;
  std::map<double, channel::ImpulseResponse> ir_cache;
  std::map<double, double> si_cache;

  auto impulse_response = [&](double length) -> channel::ImpulseResponse {
    if (options.cache_channels) {
      if (auto it = ir_cache.find(length); it != ir_cache.end()) {
        ++result.cache.hits;
        return it->second;
      }
    }
    ++result.cache.misses;
    spdlog::info("tracing {} photons over {} m", cfg.mc.n_photons, length);
    auto ir = hop_impulse_response(cfg, length, options.threads);
    if (ir.no_photons_received)
      spdlog::warn("no photons reached the receiver over {} m; the hop is dark", length);
    if (options.cache_channels) ir_cache.emplace(length, ir);
    return ir;
  };

  auto scintillation = [&](double length) {
    if (auto it = si_cache.find(length); it != si_cache.end()) return it->second;
    turbulence::TurbulenceParams p;
    p.chi_t = cfg.turbulence.chi_t;
    p.epsilon = cfg.turbulence.epsilon;
    p.w = cfg.turbulence.w;
    p.kinematic_viscosity = cfg.turbulence.kinematic_viscosity;
    p.wavelength = cfg.geometry.wavelength;
    p.distance = length;
    const double si = turbulence::scintillation_index_plane_wave(p);
    si_cache.emplace(length, si);
    return si;
  };

  std::uint64_t curve_counter = 0;
  for (const auto& hops : sets) {
    std::vector<channel::ImpulseResponse> irs;
    for (double length : hops) irs.push_back(impulse_response(length));

    for (double rate : cfg.data_rates_bps) {
      relay::RelayChain chain;
      chain.data_rate = rate;
      chain.power_shares = cfg.power_shares;
      chain.wavelength = cfg.geometry.wavelength;
      chain.quantum_efficiency = cfg.noise.quantum_efficiency;

      ber::NoiseModel noise;
      noise.background_rate = cfg.noise.background_rate_per_s;
      noise.dark_rate = ber::NoiseModel::dark_rate_from_current(cfg.noise.dark_current_a);
      noise.temperature = cfg.noise.temperature_k;
      noise.load_resistance = cfg.noise.load_resistance_ohm;
      noise.bit_duration = 1.0 / rate;

      std::vector<HopMetadata> meta;
      for (std::size_t i = 0; i < hops.size(); ++i) {
        HopMetadata m;
        m.length_m = hops[i];
        if (cfg.turbulence.explicit_sigma()) {
          const auto& s = cfg.turbulence.sigma_x_sq;
          m.sigma_x_sq = s.size() == 1 ? s[0] : s[i];
          m.scintillation_index = turbulence::si_from_sigma_x_sq(m.sigma_x_sq);
        } else {
          m.scintillation_index = scintillation(hops[i]);
          m.sigma_x_sq = turbulence::sigma_x_sq_from_si(m.scintillation_index);
        }
        relay::HopLink link;
        link.energies = channel::bit_frame_energies(irs[i], 1.0 / rate, cfg.tail_epsilon);
        link.fading = turbulence::FadingModel(m.sigma_x_sq);
        link.noise = noise;
        m.memory = link.energies.memory();
        m.received_fraction = irs[i].total();
        m.signal_fraction = link.energies.signal;
        chain.hops.push_back(std::move(link));
        meta.push_back(m);
      }

      const std::string label = point_label(hops, rate);
      for (const auto& method : cfg.methods) {
        const std::uint64_t curve_index = curve_counter++;
        BerCurve curve;
        curve.id = method + "_" + label;
        curve.method = method;
        curve.config_hash = hash;
        curve.seed = cfg.mc.seed;
        curve.data_rate_bps = rate;
        curve.relays = hops.size() - 1;
        curve.hops = meta;
        const bool montecarlo = method == "montecarlo";
        if (montecarlo) curve.detector = cfg.detector;

        std::vector<PointResult> points(powers.size());
        parallel_for(powers.size(), options.threads, [&](std::size_t i) {
          PointResult& pr = points[i];
          relay::RelayChain at_power = chain;
          at_power.total_power_per_bit = 1e-3 * std::pow(10.0, powers[i] / 10.0);
          try {
            if (montecarlo) {
              simulate::SimOptions sim;
              sim.n_bits = cfg.mc.n_bits;
              sim.seed = derive_seed(cfg.mc.seed, (curve_index << 24) | i);
              sim.detector = cfg.detector == "awgn" ? simulate::Detector::awgn
                                                    : simulate::Detector::photon_counting;
              const auto r = simulate::run_bit_simulation(at_power, sim);
              pr.y = r.ber_hat;
              pr.ci_low = r.ci95_low;
              pr.ci_high = r.ci95_high;
            } else {
              const auto r = relay::chain_average_ber(at_power, ber::method_from_string(method), rule);
              pr.y = clamp_floor(r.exact, pr.clamped);
              pr.upper = clamp_floor(r.upper, pr.clamped);
              pr.isi_sampled = r.isi_sampled;
            }
            pr.ok = std::isfinite(pr.y);
            if (!pr.ok) pr.reason = "non-finite BER";
          } catch (const NumericalError& e) {
            pr.reason = e.what();
          } catch (const std::invalid_argument& e) {
            pr.reason = e.what();
          }
        });

        for (std::size_t i = 0; i < powers.size(); ++i) {
          const auto& pr = points[i];
          if (!pr.ok) {
            spdlog::warn("{} at {} dBm: {}", curve.id, powers[i], pr.reason);
            curve.missing.push_back({powers[i], pr.reason});
            continue;
          }
          curve.x.push_back(powers[i]);
          curve.y.push_back(pr.y);
          if (montecarlo) {
            curve.ci_low.push_back(pr.ci_low);
            curve.ci_high.push_back(pr.ci_high);
          } else {
            curve.y_upper.push_back(pr.upper);
          }
          curve.isi_sampled = curve.isi_sampled || pr.isi_sampled;
          if (pr.clamped) ++curve.floor_clamped;
        }
        if (curve.isi_sampled)
          spdlog::info("{}: channel memory above {} bits, ISI averaged over {} sampled patterns",
                       curve.id, ber::kMaxEnumeratedMemory, ber::kSampledPatterns);
        spdlog::info("{}: {} points, {} missing", curve.id, curve.x.size(), curve.missing.size());
        result.curves.push_back(std::move(curve));
      }
    }
  }
  spdlog::info("channel cache: {} hits, {} misses", result.cache.hits, result.cache.misses);
  return result;
}

std::optional<double> power_at_ber(const BerCurve& curve, double target) {
  auto lg = [](double v) { return std::log10(std::max(v, 1e-320)); };
  const double t = lg(target);
  for (std::size_t i = 0; i + 1 < curve.x.size(); ++i) {
    const double a = lg(curve.y[i]), b = lg(curve.y[i + 1]);
    if ((a >= t && b <= t) || (a <= t && b >= t)) {
      if (a == b) return curve.x[i];
      return curve.x[i] + (t - a) / (b - a) * (curve.x[i + 1] - curve.x[i]);
    }
  }
  return std::nullopt;
}

std::string curves_csv(const BerCurve& curve) {
  std::string out = "method,power_dBm,ber,ci_low,ci_high\n";
  const bool has_ci = !curve.ci_low.empty();
  for (std::size_t i = 0; i < curve.x.size(); ++i) {
    out += curve.method + "," + format_exact(curve.x[i]) + "," + format_exact(curve.y[i]) + ",";
    if (has_ci) out += format_exact(curve.ci_low[i]) + "," + format_exact(curve.ci_high[i]);
    else out += ",";
    out += "\n";
  }
  return out;
}

json report_json(const std::vector<BerCurve>& curves, const config::RunConfig& cfg) {
  json doc;
  doc["tool"] = "uwoc-relay-sim";
  doc["version"] = UWOC_VERSION;
  doc["config"] = config::to_json(cfg);
  doc["config_hash"] = config::config_hash(cfg);
  doc["bin_width_s"] = cfg.resolved_bin_width();
  json list = json::array();
  for (const auto& c : curves) {
    json hops = json::array();
    for (const auto& h : c.hops) {
      hops.push_back({{"length_m", h.length_m},
                      {"memory", h.memory},
                      {"sigma_x_sq", h.sigma_x_sq},
                      {"scintillation_index", h.scintillation_index},
                      {"received_fraction", h.received_fraction},
                      {"signal_fraction", h.signal_fraction}});
    }
    json missing = json::array();
    for (const auto& m : c.missing) missing.push_back({{"power_dBm", m.power_dbm}, {"reason", m.reason}});
    json entry = {{"id", c.id},
                  {"method", c.method},
                  {"power_dBm", c.x},
                  {"ber", c.y},
                  {"missing", missing},
                  {"metadata",
                   {{"config_hash", c.config_hash},
                    {"seed", c.seed},
                    {"data_rate_bps", c.data_rate_bps},
                    {"relays", c.relays},
                    {"hops", hops},
                    {"isi_sampled", c.isi_sampled},
                    {"floor_clamped", c.floor_clamped}}}};
    if (!c.y_upper.empty()) entry["ber_upper"] = c.y_upper;
    if (!c.ci_low.empty()) {
      entry["ci_low"] = c.ci_low;
      entry["ci_high"] = c.ci_high;
      entry["metadata"]["detector"] = c.detector;
    }
    list.push_back(std::move(entry));
  }
  doc["curves"] = std::move(list);
  return doc;
}

std::vector<std::filesystem::path> emit_curves(const std::vector<BerCurve>& curves, Format format,
                                               const std::filesystem::path& out_dir,
                                               const config::RunConfig& cfg) {
  if (curves.empty()) throw std::invalid_argument("no curves to emit");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "': " + ec.message());

  auto write = [](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
  };

  std::vector<std::filesystem::path> written;
  if (format == Format::csv) {
    for (const auto& c : curves) {
      auto path = out_dir / (c.id + ".csv");
      write(path, curves_csv(c));
      written.push_back(std::move(path));
    }
  } else {
    auto path = out_dir / "report.json";
    write(path, report_json(curves, cfg).dump(2) + "\n");
    written.push_back(std::move(path));
  }
  return written;
}

}  // namespace uwoc::sweep
