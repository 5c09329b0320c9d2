#include "uwoc/simulate.hpp"

#include "uwoc/parallel.hpp"
#include "uwoc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace uwoc::simulate {

namespace {

struct BlockTally {
  std::uint64_t errors = 0;
  std::vector<std::uint64_t> per_hop;
};

// Per-hop constants resolved once.
struct HopState {
  const ber::HopBerInputs* in;
  double signal;       // N_ph e_signal
  double awgn_sigma;   // sigma_Tb
  double thermal_sigma;
  double dark;         // n_bd
};

double draw_poisson(double mean, Rng& rng) {
  if (mean <= 0.0) return 0.0;
  if (mean > kPoissonGaussianSwitch)
    return std::normal_distribution<double>(mean, std::sqrt(mean))(rng);
  return static_cast<double>(std::poisson_distribution<long long>(mean)(rng));
}

BlockTally run_block(const std::vector<HopState>& hops, std::size_t warmup, std::uint64_t bits,
                     Detector detector, std::uint64_t block_seed) {
  Rng rng(block_seed);
  std::normal_distribution<double> standard_normal(0.0, 1.0);
  BlockTally tally;
  tally.per_hop.assign(hops.size(), 0);

  // Ring buffer per transmitter: slot t is stored at t % size.
  std::vector<std::vector<std::uint8_t>> history(hops.size());
  for (std::size_t i = 0; i < hops.size(); ++i)
    history[i].assign(std::max<std::size_t>(1, hops[i].in->energies.memory()), 0);

  const std::uint64_t total = warmup + bits;
  for (std::uint64_t t = 0; t < total; ++t) {
    const std::uint8_t source_bit = static_cast<std::uint8_t>(rng() & 1U);
    std::uint8_t sent = source_bit;
    const bool counted = t >= warmup;
    for (std::size_t i = 0; i < hops.size(); ++i) {
      const HopState& hop = hops[i];
      const auto& e = hop.in->energies;
      auto& hist = history[i];
      const std::size_t memory = e.memory();

      double isi = 0.0;
      for (std::size_t k = 0; k < memory; ++k) {
        // Bit sent k + 1 slots ago.
        if (hist[(t + hist.size() - 1 - k) % hist.size()]) isi += e.isi[k];
      }
      isi *= hop.in->scale.photons_per_bit;

      const double h = turbulence::sample_fading(hop.in->fading, rng);
      std::uint8_t detected;
      if (detector == Detector::awgn) {
        const double r = h * ((sent ? hop.signal : 0.0) + isi) +
                         hop.awgn_sigma * standard_normal(rng);
        detected = r > 0.5 * h * hop.signal ? 1 : 0;
      } else {
        const double mean = h * ((sent ? hop.signal : 0.0) + isi) + hop.dark;
        const double count = draw_poisson(mean, rng) + hop.thermal_sigma * standard_normal(rng);
        detected = count > hop.dark + 0.5 * h * hop.signal ? 1 : 0;
      }
      if (counted && detected != sent) ++tally.per_hop[i];

      if (memory > 0) hist[t % hist.size()] = sent;
      sent = detected;
    }
    if (counted && sent != source_bit) ++tally.errors;
  }
  return tally;
}

}  // namespace

std::string_view to_string(Detector d) {
  return d == Detector::awgn ? "awgn" : "photon_counting";
}

std::pair<double, double> wilson_interval(std::uint64_t k, std::uint64_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {k == 0 ? 0.0 : std::max(0.0, centre - half), k == n ? 1.0 : std::min(1.0, centre + half)};
}

SimResult run_bit_simulation(std::span<const ber::HopBerInputs> hops, const SimOptions& options) {
  if (options.n_bits < 1) throw std::invalid_argument("n_bits must be >= 1");
  if (options.block_bits < 1) throw std::invalid_argument("block_bits must be >= 1");
  if (hops.empty()) throw std::invalid_argument("simulation needs at least one hop");

  std::vector<HopState> states;
  std::size_t warmup = 0;
  for (std::size_t i = 0; i < hops.size(); ++i) {
    hops[i].validate();
    const std::size_t memory = hops[i].energies.memory();
    if (memory > kMaxHistory)
      throw std::invalid_argument("hop " + std::to_string(i) + " channel memory " +
                                  std::to_string(memory) + " exceeds the simulator cap " +
                                  std::to_string(kMaxHistory));
    warmup = std::max(warmup, memory);
    states.push_back({&hops[i], hops[i].scale.photons_per_bit * hops[i].energies.signal,
                      std::sqrt(hops[i].noise.awgn_variance()),
                      std::sqrt(hops[i].noise.thermal_variance()), hops[i].noise.noise_counts()});
  }

  const std::uint64_t n_blocks = (options.n_bits + options.block_bits - 1) / options.block_bits;
  std::vector<BlockTally> tallies(n_blocks);
  parallel_for(n_blocks, options.threads, [&](std::size_t b) {
    const std::uint64_t first = b * options.block_bits;
    const std::uint64_t bits = std::min(options.block_bits, options.n_bits - first);
    tallies[b] = run_block(states, warmup, bits, options.detector, derive_seed(options.seed, b));
  });

  SimResult result;
  result.n_bits = options.n_bits;
  result.seed = options.seed;
  result.per_hop_error_counts.assign(hops.size(), 0);
  for (const auto& t : tallies) {
    result.n_errors += t.errors;
    for (std::size_t i = 0; i < hops.size(); ++i) result.per_hop_error_counts[i] += t.per_hop[i];
  }
  result.ber_hat = static_cast<double>(result.n_errors) / static_cast<double>(result.n_bits);
  std::tie(result.ci95_low, result.ci95_high) = wilson_interval(result.n_errors, result.n_bits);
  return result;
}

SimResult run_bit_simulation(const relay::RelayChain& chain, const SimOptions& options) {
  chain.validate();
  const auto inputs = chain.hop_inputs();
  return run_bit_simulation(std::span<const ber::HopBerInputs>(inputs), options);
}

}  // namespace uwoc::simulate
