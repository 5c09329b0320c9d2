#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "uwoc/ber.hpp"

namespace uwoc::relay {

// End-to-end error of a serial bit detect-and-forward chain. A bit arrives
// correctly iff an even number of hops flipped it, so everything here is a
// function of the per-hop average BERs p_i only (hops fade independently).

/// Pr(U = u) for u = 0..p.size(), U the number of hops in error.
/// Poisson-binomial dynamic program over the hops.
std::vector<double> error_count_distribution(std::span<const double> p);

/// Pr(exactly u of the hops detect incorrectly).
double prob_u_incorrect(std::span<const double> p, std::size_t u);

/// Probability of an odd number of hop errors, 1 - sum_{u even} Pr(U = u).
/// Summed over odd u directly so small BERs keep full relative precision.
double e2e_ber_exact(std::span<const double> p);

/// 1 - prod(1 - p_i): treats any hop error as an end-to-end error.
double e2e_ber_upper(std::span<const double> p);

/// Exact end-to-end BER for n_links hops sharing the same BER p.
double e2e_ber_identical(double p, std::size_t n_links);

/// Channel-dependent parts of one hop; the count scale comes from the chain.
struct HopLink {
  channel::BitEnergies energies;
  turbulence::FadingModel fading;
  ber::NoiseModel noise;
};

struct RelayChain {
  std::vector<HopLink> hops;          // N + 1 hops, source first
  double total_power_per_bit = 0.0;   // P_b, W
  std::vector<double> power_shares;   // fractions of P_b per transmitter; empty = equal split
  double data_rate = 1e9;             // bit/s
  double wavelength = 532e-9;
  double quantum_efficiency = 0.8;

  std::size_t relays() const { return hops.empty() ? 0 : hops.size() - 1; }
  double bit_duration() const { return 1.0 / data_rate; }
  std::vector<double> shares() const;
  void validate() const;
  /// Per-hop receiver inputs with N_ph derived from each transmitter's share.
  std::vector<ber::HopBerInputs> hop_inputs() const;
};

struct ChainBer {
  double exact = 0.0;
  double upper = 0.0;
  std::vector<double> per_hop;
  bool isi_sampled = false;
};

ChainBer chain_average_ber(const RelayChain& chain, ber::Method method,
                           const turbulence::GhqRule& rule);

}  // namespace uwoc::relay
