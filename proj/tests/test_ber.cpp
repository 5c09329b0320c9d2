#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "uwoc/ber.hpp"
#include "uwoc/error.hpp"
#include "oracles.hpp"

using namespace uwoc;
using namespace uwoc::ber;

namespace {

using oracle::q_exact;

HopBerInputs make_inputs(double photons, std::vector<double> isi, double sigma_x_sq,
                         double bit_duration = 1e-9) {
  HopBerInputs in;
  in.energies.signal = 1.0;
  in.energies.isi = std::move(isi);
  in.fading = turbulence::FadingModel(sigma_x_sq);
  in.noise = NoiseModel::reference(bit_duration);
  in.scale.photons_per_bit = photons;
  return in;
}

// Photon count giving conditional BER Q(x) at h = 1 with no ISI.
double photons_for_q_argument(double x, const NoiseModel& noise) {
  return 2.0 * x * std::sqrt(noise.awgn_variance());
}

}  // namespace

TEST_CASE("noise model in count units") {
  const auto n = NoiseModel::reference(1e-9);
  const double q = 1.602e-19;
  CHECK(n.thermal_variance() == doctest::Approx(2.0 * 1.380649e-23 * 290.0 * 1e-9 / (100.0 * q * q)));
  CHECK(n.noise_counts() == doctest::Approx((1.8094e8 + 1.226e-9 / q) * 1e-9));
  CHECK(n.awgn_variance() == doctest::Approx(n.thermal_variance() + n.noise_counts()));
  NoiseModel bad = n;
  bad.load_resistance = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("photon count scale") {
  const auto s = CountScale::from_power(1e-3, 1e-9, 532e-9, 0.8);
  const double f = 299792458.0 / 532e-9;
  CHECK(s.photons_per_bit == doctest::Approx(0.8 * 1e-3 * 1e-9 / (6.626e-34 * f)));
}

TEST_CASE("conditional AWGN error") {
  auto in = make_inputs(0.0, {}, 0.0);
  const std::vector<std::uint8_t> none;
  CHECK(conditional_ber_awgn(0, none, 1.0, in) == 0.5);
  CHECK(conditional_ber_awgn(1, none, 1.0, in) == 0.5);

  in.scale.photons_per_bit = photons_for_q_argument(5.0, in.noise);
  const double q5 = q_exact(5.0);
  CHECK(q5 == doctest::Approx(2.87e-7).epsilon(2e-3));
  CHECK(conditional_ber_awgn(1, none, 1.0, in) == doctest::Approx(q5).epsilon(1e-12));
  CHECK(conditional_ber_awgn(0, none, 1.0, in) == conditional_ber_awgn(1, none, 1.0, in));

  for (double x : {0.1, 1.0, 3.0, 8.0, 20.0}) CHECK(q_function(x) == doctest::Approx(q_exact(x)).epsilon(1e-13));

  auto with_isi = make_inputs(in.scale.photons_per_bit, {0.1, 0.05}, 0.0);
  const std::vector<std::uint8_t> bits{1, 0};
  CHECK_THROWS_AS(conditional_ber_awgn(1, none, 1.0, with_isi), std::invalid_argument);
  // ISI helps a transmitted one and hurts a zero.
  CHECK(conditional_ber_awgn(1, bits, 1.0, with_isi) < conditional_ber_awgn(0, bits, 1.0, with_isi));
  const double sigma = std::sqrt(with_isi.noise.awgn_variance());
  const double gs = with_isi.scale.photons_per_bit;
  CHECK(conditional_ber_awgn(0, bits, 0.7, with_isi) ==
        doctest::Approx(q_exact(0.7 * (gs - 2.0 * 0.1 * gs) / (2.0 * sigma))).epsilon(1e-12));
}

TEST_CASE("conditional AWGN error is invariant to a common scale") {
  auto a = make_inputs(3000.0, {0.2}, 0.0);
  a.noise.background_rate = 0.0;
  a.noise.dark_rate = 0.0;
  auto b = a;
  b.scale.photons_per_bit *= 7.0;
  b.noise.temperature *= 49.0;  // sigma_th scales by 7
  const std::vector<std::uint8_t> bits{1};
  for (int b0 : {0, 1})
    CHECK(conditional_ber_awgn(b0, bits, 0.9, b) == doctest::Approx(conditional_ber_awgn(b0, bits, 0.9, a)).epsilon(1e-12));
}

TEST_CASE("Poisson means") {
  auto in = make_inputs(500.0, {0.1, 0.3}, 0.0);
  const double nbd = in.noise.noise_counts();
  CHECK(poisson_means(0, std::vector<std::uint8_t>{0, 0}, 1.3, in) == nbd);
  auto single = make_inputs(500.0, {}, 0.0);
  CHECK(poisson_means(1, std::vector<std::uint8_t>{}, 1.0, single) == doctest::Approx(500.0 + nbd));
  const std::vector<std::uint8_t> bits{1, 1};
  const double m1 = poisson_means(1, bits, 1.0, in) - nbd;
  const double m2 = poisson_means(1, bits, 2.5, in) - nbd;
  CHECK(m2 == doctest::Approx(2.5 * m1).epsilon(1e-14));
  CHECK(m1 == doctest::Approx(500.0 * 1.4));
}

TEST_CASE("saddle point against the exact Poisson plus Gaussian tail") {
  const auto s = saddle_point_ber(2.0, 20.0, 1.0);
  CHECK(s.s0 > 0.0);
  CHECK(s.s1 < 0.0);
  CHECK(s.beta > 2.0);
  CHECK(s.beta < 20.0);
  const double exact = oracle::mixed_error(2.0, 20.0, 1.0, s.beta);
  MESSAGE("saddle " << s.ber << " exact " << exact);
  CHECK(std::abs(s.ber - exact) / exact < 0.15);

  // The roots satisfy their defining equations.
  CHECK(std::abs(2.0 * std::exp(s.s0) + s.s0 - s.beta - 1.0 / s.s0) < 1e-9 * s.beta);
  CHECK(std::abs(20.0 * std::exp(s.s1) + s.s1 - s.beta - 1.0 / s.s1) < 1e-9 * s.beta);
}

TEST_CASE("saddle point error falls as the ON mean grows") {
  double previous = 1.0;
  for (double m1 : {10.0, 20.0, 40.0, 80.0}) {
    const double ber = saddle_point_ber(3.0, m1, 4.0).ber;
    CHECK(ber < previous);
    previous = ber;
  }
}

TEST_CASE("saddle point in the thermal-noise limit") {
  // Shot noise is a small correction here, so the count is close to Gaussian
  // with variance sigma^2 + m on each side.
  for (auto [m0, m1, var] : {std::tuple{10.0, 1000.0, 1e5}, std::tuple{50.0, 1e4, 4e6},
                             std::tuple{5.0, 12005.0, 1e6}, std::tuple{5.0, 14005.0, 1e6}}) {
    const double ber = saddle_point_ber(m0, m1, var).ber;
    const double limit = q_exact((m1 - m0) / (std::sqrt(var + m0) + std::sqrt(var + m1)));
    CHECK(std::abs(ber - limit) / limit < 0.05);
  }
}

TEST_CASE("saddle point rejects degenerate inputs") {
  CHECK_THROWS_AS(saddle_point_ber(5.0, 5.0, 1.0), NumericalError);
  CHECK_THROWS_AS(saddle_point_ber(5.0, 10.0, 0.0), NumericalError);
}

TEST_CASE("Gaussian approximation") {
  CHECK(gaussian_ber(7.0, 7.0, 3.0) == 0.5);
  const double arg = 300.0 / (std::sqrt(500.0) + std::sqrt(200.0));
  CHECK(arg == doctest::Approx(8.218544).epsilon(1e-7));
  CHECK(gaussian_ber(100.0, 400.0, 100.0) == doctest::Approx(q_exact(arg)).epsilon(1e-12));
  CHECK_THROWS_AS(gaussian_ber(10.0, 5.0, 1.0), std::invalid_argument);
}

TEST_CASE("quantum-limited corner") {
  for (double m1 : {25.0, 50.0, 100.0}) {
    CHECK(gaussian_ber(0.0, m1, 1e-12) == doctest::Approx(q_exact(std::sqrt(m1))).epsilon(1e-6));
    // A silent OFF slot: the only error is an ON slot with no photoelectrons,
    // about exp(-m1) / 2, far below the Gaussian estimate.
    const auto sp = saddle_point_ber(0.0, m1, 1e-6);
    const double exact = oracle::mixed_error(0.0, m1, 1e-6, sp.beta);
    MESSAGE("m1 " << m1 << ": saddle " << sp.ber << " exact " << exact << " exp(-m1)/2 " << 0.5 * std::exp(-m1));
    CHECK(std::abs(sp.ber - exact) / exact < 0.15);
    CHECK(sp.ber < 1e-3 * gaussian_ber(0.0, m1, 1e-6));
  }
}

TEST_CASE("hop average reduces to the conditional error without fading") {
  auto in = make_inputs(photons_for_q_argument(3.0, NoiseModel::reference(1e-9)), {}, 0.0);
  const auto rule = turbulence::ghq_rule(30);
  const std::vector<std::uint8_t> none;
  CHECK(hop_average_ber(in, Method::awgn_ghqf, rule).ber ==
        doctest::Approx(0.5 * (conditional_ber_awgn(0, none, 1.0, in) + conditional_ber_awgn(1, none, 1.0, in))).epsilon(1e-15));

  const double m0 = in.noise.noise_counts();
  const double m1 = m0 + in.scale.photons_per_bit;
  CHECK(hop_average_ber(in, Method::gaussian, rule).ber == doctest::Approx(gaussian_ber(m0, m1, in.noise.thermal_variance())).epsilon(1e-15));
  CHECK(hop_average_ber(in, Method::saddle_point, rule).ber ==
        doctest::Approx(saddle_point_ber(m0, m1, in.noise.thermal_variance()).ber).epsilon(1e-12));
}

TEST_CASE("inert ISI slots do not change the average") {
  const auto rule = turbulence::ghq_rule(30);
  const double photons = photons_for_q_argument(2.5, NoiseModel::reference(1e-9));
  const auto plain = make_inputs(photons, {}, 0.1);
  const auto zeros = make_inputs(photons, {0.0, 0.0}, 0.1);
  for (Method m : {Method::awgn_ghqf, Method::gaussian, Method::saddle_point}) {
    const double a = hop_average_ber(plain, m, rule).ber;
    const double b = hop_average_ber(zeros, m, rule).ber;
    CHECK(b == doctest::Approx(a).epsilon(1e-12));
  }
}

TEST_CASE("GHQ average against adaptive quadrature") {
  const auto rule = turbulence::ghq_rule(30);
  for (double var : {0.01, 0.05}) {
    for (std::vector<double> isi : {std::vector<double>{}, std::vector<double>{0.08, 0.03}}) {
      for (double x : {0.2, 1.0, 2.0, 3.5}) {
        const auto in = make_inputs(photons_for_q_argument(x, NoiseModel::reference(1e-9)), isi, var);
        const double oracle = oracle::awgn_fading_average(in);
        const double ghq = hop_average_ber(in, Method::awgn_ghqf, rule).ber;
        CHECK(std::abs(ghq - oracle) / oracle < 1e-3);
      }
    }
  }
}

TEST_CASE("hop average monotonicity") {
  const auto rule = turbulence::ghq_rule(30);
  const auto ref = NoiseModel::reference(1e-9);
  for (Method m : {Method::awgn_ghqf, Method::gaussian, Method::saddle_point}) {
    double previous = 0.5;
    for (double x : {0.0, 0.5, 1.0, 2.0, 3.0, 4.0}) {
      const double ber = hop_average_ber(make_inputs(photons_for_q_argument(x, ref), {0.1}, 0.05), m, rule).ber;
      CHECK(ber >= 0.0);
      CHECK(ber <= 0.5 + 1e-15);
      CHECK(ber <= previous * (1.0 + 1e-12));
      previous = ber;
    }
    previous = 0.0;
    for (double var : {0.0, 0.01, 0.05, 0.1, 0.25}) {
      const double ber = hop_average_ber(make_inputs(photons_for_q_argument(3.0, ref), {}, var), m, rule).ber;
      CHECK(ber >= previous);
      previous = ber;
    }
  }
}

TEST_CASE("long channel memory switches to sampled patterns") {
  const auto rule = turbulence::ghq_rule(10);
  std::vector<double> isi(20, 1e-3);
  const auto in = make_inputs(photons_for_q_argument(2.0, NoiseModel::reference(1e-9)), isi, 0.01);
  const auto avg = hop_average_ber(in, Method::awgn_ghqf, rule);
  CHECK(avg.isi_sampled);
  CHECK(avg.isi_patterns == kSampledPatterns);
  CHECK(avg.ber == hop_average_ber(in, Method::awgn_ghqf, rule).ber);

  isi.resize(16);
  const auto exact = hop_average_ber(make_inputs(in.scale.photons_per_bit, isi, 0.01), Method::awgn_ghqf, rule);
  CHECK_FALSE(exact.isi_sampled);
  CHECK(exact.isi_patterns == 65536);
}

TEST_CASE("method names") {
  for (Method m : {Method::awgn_ghqf, Method::saddle_point, Method::gaussian})
    CHECK(method_from_string(to_string(m)) == m);
  CHECK_THROWS_AS(method_from_string("montecarlo"), std::invalid_argument);
}
