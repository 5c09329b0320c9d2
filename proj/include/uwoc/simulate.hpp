#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "uwoc/ber.hpp"
#include "uwoc/relay.hpp"

namespace uwoc::simulate {

enum class Detector {
  // Analytical AWGN receiver: h*(b0 gamma_s + ISI) + N(0, sigma_Tb^2) against
  // the CSI threshold h gamma_s / 2.
  awgn,
  // Poisson(m) + N(0, sigma_th^2) photoelectron counts against the midpoint of
  // the zero-ISI means, n_bd + h N_ph e_signal / 2.
  photon_counting,
};

std::string_view to_string(Detector d);

struct SimOptions {
  std::uint64_t n_bits = 100'000;
  std::uint64_t seed = 1;
  Detector detector = Detector::awgn;
  unsigned threads = 1;
  // Counted bits per block; block b draws from derive_seed(seed, b) and starts
  // with zeroed ISI history plus max(L) uncounted warm-up bits.
  std::uint64_t block_bits = 1 << 16;
};

/// Poisson draws with a larger mean use N(m, m) instead.
inline constexpr double kPoissonGaussianSwitch = 1e4;
/// Longest ISI history the simulator carries per hop.
inline constexpr std::size_t kMaxHistory = 4096;

struct SimResult {
  std::uint64_t n_bits = 0;
  std::uint64_t n_errors = 0;
  double ber_hat = 0.0;
  double ci95_low = 0.0;
  double ci95_high = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> per_hop_error_counts;
};

/// Wilson score interval for k successes in n trials.
std::pair<double, double> wilson_interval(std::uint64_t k, std::uint64_t n,
                                          double z = 1.959963984540054);

/// Sends random equiprobable bits through the hops in order; every relay
/// detects and forwards its decision. Fading is redrawn per bit and per hop.
SimResult run_bit_simulation(std::span<const ber::HopBerInputs> hops, const SimOptions& options);
SimResult run_bit_simulation(const relay::RelayChain& chain, const SimOptions& options);

}  // namespace uwoc::simulate
