#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "uwoc/relay.hpp"

using namespace uwoc;
using namespace uwoc::relay;

namespace {

std::vector<double> random_bers(std::mt19937_64& rng, std::size_t n, double max_p = 0.5) {
  std::uniform_real_distribution<double> u(0.0, max_p);
  std::vector<double> p(n);
  for (double& x : p) x = u(rng);
  return p;
}

double parity_closed_form(const std::vector<double>& p) {
  double prod = 1.0;
  for (double x : p) prod *= 1.0 - 2.0 * x;
  return 0.5 * (1.0 - prod);
}

// Literal sum over every error pattern of the hops.
std::vector<double> subset_distribution(const std::vector<double>& p) {
  std::vector<double> dist(p.size() + 1, 0.0);
  for (std::size_t mask = 0; mask < (std::size_t{1} << p.size()); ++mask) {
    double prob = 1.0;
    std::size_t u = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (mask >> i & 1U) {
        prob *= p[i];
        ++u;
      } else {
        prob *= 1.0 - p[i];
      }
    }
    dist[u] += prob;
  }
  return dist;
}

HopLink hop(double signal, double sigma_x_sq, double rate) {
  HopLink h;
  h.energies.signal = signal;
  h.fading = turbulence::FadingModel(sigma_x_sq);
  h.noise = ber::NoiseModel::reference(1.0 / rate);
  return h;
}

}  // namespace

TEST_CASE("error count distribution") {
  const std::vector<double> p{0.1, 0.2};
  CHECK(prob_u_incorrect(p, 0) == doctest::Approx(0.9 * 0.8).epsilon(1e-15));
  CHECK(prob_u_incorrect(p, 1) == doctest::Approx(0.26).epsilon(1e-15));
  CHECK(prob_u_incorrect(p, 2) == doctest::Approx(0.02).epsilon(1e-15));
  CHECK_THROWS_AS(prob_u_incorrect(p, 3), std::invalid_argument);

  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto q = random_bers(rng, 1 + trial % 12);
    const auto dp = error_count_distribution(q);
    const auto literal = subset_distribution(q);
    double total = 0.0;
    for (std::size_t u = 0; u < dp.size(); ++u) {
      CHECK(std::abs(dp[u] - literal[u]) < 1e-14);
      total += dp[u];
    }
    CHECK(std::abs(total - 1.0) < 1e-14);
  }
}

TEST_CASE("exact end-to-end error is the parity of hop errors") {
  CHECK(e2e_ber_exact(std::vector<double>{0.013}) == 0.013);
  CHECK(e2e_ber_exact(std::vector<double>{0.0, 0.0, 0.0}) == 0.0);
  CHECK(e2e_ber_exact(std::vector<double>{0.1, 0.1}) == doctest::Approx(0.18).epsilon(1e-15));

  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto p = random_bers(rng, 1 + trial % 10);
    const double exact = e2e_ber_exact(p);
    CHECK(std::abs(exact - parity_closed_form(p)) < 1e-12);
    CHECK(exact <= 0.5 + 1e-15);
    if (p.size() <= 5) {
      const auto literal = subset_distribution(p);
      double odd = 0.0;
      for (std::size_t u = 1; u < literal.size(); u += 2) odd += literal[u];
      CHECK(std::abs(exact - odd) < 1e-14);
    }
  }
}

TEST_CASE("exact form keeps relative precision for tiny hop errors") {
  const std::vector<double> p{1e-20, 3e-20, 2e-20};
  CHECK(e2e_ber_exact(p) == doctest::Approx(6e-20).epsilon(1e-12));
  CHECK(e2e_ber_upper(p) == doctest::Approx(6e-20).epsilon(1e-12));
}

TEST_CASE("upper bound") {
  CHECK(e2e_ber_upper(std::vector<double>{0.25}) == 0.25);
  CHECK(e2e_ber_upper(std::vector<double>{0.1, 0.1}) == doctest::Approx(0.19).epsilon(1e-15));
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto p = random_bers(rng, 1 + trial % 10);
    CHECK(e2e_ber_upper(p) >= e2e_ber_exact(p));
  }
  // Equality with at most one erring hop.
  CHECK(e2e_ber_upper(std::vector<double>{0.0, 0.3, 0.0}) == doctest::Approx(e2e_ber_exact(std::vector<double>{0.0, 0.3, 0.0})).epsilon(1e-15));
  // Relative gap vanishes with the hop errors.
  double previous = 1.0;
  for (double scale : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const std::vector<double> p{scale, 0.5 * scale, 2.0 * scale};
    const double gap = (e2e_ber_upper(p) - e2e_ber_exact(p)) / e2e_ber_exact(p);
    CHECK(gap < previous);
    previous = gap;
  }
  CHECK(previous < 1e-3);
}

TEST_CASE("identical hops") {
  CHECK(e2e_ber_identical(0.07, 1) == doctest::Approx(0.07).epsilon(1e-15));
  CHECK(e2e_ber_identical(0.1, 2) == doctest::Approx(0.18).epsilon(1e-15));
  for (std::size_t n = 1; n <= 10; ++n) {
    for (double p : {1e-9, 1e-4, 0.03, 0.2, 0.5}) {
      const std::vector<double> v(n, p);
      CHECK(std::abs(e2e_ber_identical(p, n) - e2e_ber_exact(v)) < 1e-14);
    }
  }
  CHECK_THROWS_AS(e2e_ber_identical(0.1, 0), std::invalid_argument);
}

TEST_CASE("monotone and symmetric in the hop errors") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    auto p = random_bers(rng, 2 + trial % 6);
    const double exact = e2e_ber_exact(p);
    const double upper = e2e_ber_upper(p);
    auto bumped = p;
    bumped[trial % bumped.size()] = std::min(0.5, bumped[trial % bumped.size()] + 0.01);
    CHECK(e2e_ber_exact(bumped) >= exact - 1e-15);
    std::shuffle(p.begin(), p.end(), rng);
    CHECK(e2e_ber_exact(p) == doctest::Approx(exact).epsilon(1e-13));
    CHECK(e2e_ber_upper(p) == doctest::Approx(upper).epsilon(1e-13));
  }
}

TEST_CASE("relay chain power split and averaging") {
  const auto rule = turbulence::ghq_rule(30);
  RelayChain single;
  single.hops = {hop(1e-4, 0.02, 1e9)};
  single.total_power_per_bit = 1e-1;
  const auto one = chain_average_ber(single, ber::Method::awgn_ghqf, rule);
  CHECK(one.exact == one.upper);
  CHECK(one.exact == one.per_hop[0]);

  // Fig. 5 layout: four hops of different lengths, evaluated at their own share.
  RelayChain chain;
  chain.hops = {hop(2e-4, 0.01, 1e9), hop(1e-4, 0.015, 1e9), hop(5e-5, 0.02, 1e9),
                hop(2e-5, 0.025, 1e9)};
  chain.total_power_per_bit = 4e-1;
  const auto inputs = chain.hop_inputs();
  const auto reference = ber::CountScale::from_power(1e-1, 1e-9, 532e-9, 0.8);
  for (const auto& in : inputs) CHECK(in.scale.photons_per_bit == doctest::Approx(reference.photons_per_bit));
  const auto r = chain_average_ber(chain, ber::Method::awgn_ghqf, rule);
  REQUIRE(r.per_hop.size() == 4);
  const auto dist = error_count_distribution(r.per_hop);
  CHECK(r.exact == doctest::Approx(1.0 - (dist[0] + dist[2] + dist[4])).epsilon(1e-12));
  CHECK(r.upper >= r.exact);
  for (std::size_t i = 0; i < 4; ++i) {
    const double alone = ber::hop_average_ber(inputs[i], ber::Method::awgn_ghqf, rule).ber;
    CHECK(r.per_hop[i] == alone);
  }

  chain.power_shares = {0.4, 0.3, 0.2, 0.1};
  CHECK(chain.hop_inputs()[0].scale.photons_per_bit == doctest::Approx(1.6 * reference.photons_per_bit));
  chain.power_shares = {0.5, 0.5};
  CHECK_THROWS_AS(chain.validate(), std::invalid_argument);
  chain.power_shares = {0.5, 0.3, 0.3, 0.1};
  CHECK_THROWS_AS(chain.validate(), std::invalid_argument);
}

TEST_CASE("upper bound holds for random chains") {
  const auto rule = turbulence::ghq_rule(20);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    RelayChain chain;
    const int hops = 1 + trial % 5;
    for (int i = 0; i < hops; ++i) chain.hops.push_back(hop(1e-5 + 1e-3 * u(rng), 0.2 * u(rng), 1e9));
    chain.total_power_per_bit = std::pow(10.0, -4.0 + 3.0 * u(rng));
    const auto r = chain_average_ber(chain, ber::Method::gaussian, rule);
    CHECK(r.upper >= r.exact);
  }
}
