#include "uwoc/relay.hpp"

#include "uwoc/error.hpp"

#include <boost/math/special_functions/binomial.hpp>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace uwoc::relay {

namespace {

void check_probabilities(std::span<const double> p) {
  for (double x : p) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("hop BERs must lie in [0, 1]");
  }
}

bool same_hop(const ber::HopBerInputs& a, const ber::HopBerInputs& b) {
  return a.energies.signal == b.energies.signal && a.energies.isi == b.energies.isi &&
         a.fading == b.fading && a.scale.photons_per_bit == b.scale.photons_per_bit &&
         a.noise.background_rate == b.noise.background_rate &&
         a.noise.dark_rate == b.noise.dark_rate && a.noise.temperature == b.noise.temperature &&
         a.noise.load_resistance == b.noise.load_resistance &&
         a.noise.bit_duration == b.noise.bit_duration;
}

}  // namespace

std::vector<double> error_count_distribution(std::span<const double> p) {
  check_probabilities(p);
  std::vector<double> dist(p.size() + 1, 0.0);
  dist[0] = 1.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t u = i + 1; u > 0; --u) dist[u] = dist[u] * (1.0 - p[i]) + dist[u - 1] * p[i];
    dist[0] *= 1.0 - p[i];
  }
  return dist;
}

double prob_u_incorrect(std::span<const double> p, std::size_t u) {
  if (u > p.size())
    throw std::invalid_argument("u = " + std::to_string(u) + " exceeds the hop count " +
                                std::to_string(p.size()));
  return error_count_distribution(p)[u];
}

double e2e_ber_exact(std::span<const double> p) {
  const auto dist = error_count_distribution(p);
  double odd = 0.0;
  for (std::size_t u = 1; u < dist.size(); u += 2) odd += dist[u];
  return odd;
}

double e2e_ber_upper(std::span<const double> p) {
  // 1 - P(U = 0), summed as the odd terms plus the even terms u >= 2 so the
  // bound never rounds below the exact value and tiny BERs keep their
  // relative precision.
  const auto dist = error_count_distribution(p);
  double odd = 0.0, even = 0.0;
  for (std::size_t u = 1; u < dist.size(); u += 2) odd += dist[u];
  for (std::size_t u = 2; u < dist.size(); u += 2) even += dist[u];
  return odd + even;
}

double e2e_ber_identical(double p, std::size_t n_links) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
  if (n_links < 1) throw std::invalid_argument("n_links must be >= 1");
  double odd = 0.0;
  const auto n = static_cast<unsigned>(n_links);
  for (unsigned u = 1; u <= n; u += 2) {
    odd += boost::math::binomial_coefficient<double>(n, u) * std::pow(p, u) *
           std::pow(1.0 - p, static_cast<double>(n - u));
  }
  return odd;
}

std::vector<double> RelayChain::shares() const {
  if (!power_shares.empty()) return power_shares;
  return std::vector<double>(hops.size(), 1.0 / static_cast<double>(hops.size()));
}

void RelayChain::validate() const {
  if (hops.empty()) throw std::invalid_argument("relay chain needs at least one hop");
  if (!(total_power_per_bit >= 0.0) || !std::isfinite(total_power_per_bit))
    throw std::invalid_argument("total power per bit must be finite and >= 0");
  if (!(data_rate > 0.0)) throw std::invalid_argument("data rate must be > 0");
  if (!power_shares.empty()) {
    if (power_shares.size() != hops.size())
      throw std::invalid_argument("power_shares must have one entry per hop");
    double sum = 0.0;
    for (double s : power_shares) {
      if (!(s >= 0.0)) throw std::invalid_argument("power shares must be >= 0");
      sum += s;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("power shares must sum to 1");
  }
  for (std::size_t i = 0; i < hops.size(); ++i) {
    if (std::abs(hops[i].noise.bit_duration * data_rate - 1.0) > 1e-9)
      throw std::invalid_argument("hop " + std::to_string(i) +
                                  " noise bit duration does not match the data rate");
  }
}

std::vector<ber::HopBerInputs> RelayChain::hop_inputs() const {
  const auto s = shares();
  std::vector<ber::HopBerInputs> inputs;
  inputs.reserve(hops.size());
  for (std::size_t i = 0; i < hops.size(); ++i) {
    inputs.push_back({hops[i].energies, hops[i].fading, hops[i].noise,
                      ber::CountScale::from_power(total_power_per_bit * s[i], bit_duration(),
                                                  wavelength, quantum_efficiency)});
  }
  return inputs;
}

ChainBer chain_average_ber(const RelayChain& chain, ber::Method method,
                           const turbulence::GhqRule& rule) {
  chain.validate();
  ChainBer out;
  const auto inputs = chain.hop_inputs();
  out.per_hop.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    // Identical hops (equal split over equal lengths) share one evaluation.
    bool reused = false;
    for (std::size_t j = 0; j < i && !reused; ++j) {
      if (same_hop(inputs[i], inputs[j])) {
        out.per_hop.push_back(out.per_hop[j]);
        reused = true;
      }
    }
    if (reused) continue;
    try {
      const auto avg = ber::hop_average_ber(inputs[i], method, rule);
      out.per_hop.push_back(avg.ber);
      out.isi_sampled = out.isi_sampled || avg.isi_sampled;
    } catch (const NumericalError& e) {
      throw NumericalError("hop " + std::to_string(i) + ": " + e.what());
    }
  }
  out.exact = e2e_ber_exact(out.per_hop);
  out.upper = e2e_ber_upper(out.per_hop);
  return out;
}

}  // namespace uwoc::relay
