#include "uwoc/ber.hpp"

#include "uwoc/constants.hpp"
#include "uwoc/error.hpp"
#include "uwoc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace uwoc::ber {

namespace {

constexpr std::uintmax_t kMaxRootIterations = 200;

void check_isi_length(std::span<const std::uint8_t> isi_bits, const HopBerInputs& in) {
  if (isi_bits.size() != in.energies.memory()) {
    throw std::invalid_argument("ISI pattern has " + std::to_string(isi_bits.size()) +
                                " bits but the channel memory is " +
                                std::to_string(in.energies.memory()));
  }
}

double isi_energy(std::span<const std::uint8_t> isi_bits, const channel::BitEnergies& e) {
  double sum = 0.0;
  for (std::size_t k = 0; k < isi_bits.size(); ++k) {
    if (isi_bits[k]) sum += e.isi[k];
  }
  return sum;
}

// ISI energy (unscaled) of every pattern considered by the average.
struct PatternSet {
  std::vector<double> energy;
  bool sampled = false;
};

PatternSet isi_patterns(const channel::BitEnergies& e) {
  PatternSet set;
  const std::size_t memory = e.memory();
  if (memory <= kMaxEnumeratedMemory) {
    set.energy.assign(std::size_t{1} << memory, 0.0);
    for (std::size_t k = 0; k < memory; ++k) {
      const std::size_t half = std::size_t{1} << k;
      for (std::size_t j = 0; j < half; ++j) set.energy[j + half] = set.energy[j] + e.isi[k];
    }
    std::sort(set.energy.begin(), set.energy.end());
    return set;
  }
  set.sampled = true;
  set.energy.reserve(kSampledPatterns);
  Rng rng(derive_seed(0x15A15A15ULL, memory));
  for (std::size_t p = 0; p < kSampledPatterns; ++p) {
    double sum = 0.0;
    for (std::size_t k = 0; k < memory; k += 64) {
      std::uint64_t bits = rng();
      for (std::size_t b = k; b < std::min(memory, k + 64); ++b, bits >>= 1) {
        if (bits & 1U) sum += e.isi[b];
      }
    }
    set.energy.push_back(sum);
  }
  std::sort(set.energy.begin(), set.energy.end());
  return set;
}

SaddlePointSolution solve_saddle_point(double m0, double m1, double var,
                                       const SaddlePointSolution* hint);

double pattern_average(const HopBerInputs& in, Method method, double h,
                       const std::vector<double>& patterns) {
  const double signal = in.scale.photons_per_bit * in.energies.signal;
  double total = 0.0;
  switch (method) {
    case Method::awgn_ghqf: {
      const double two_sigma = 2.0 * std::sqrt(in.noise.awgn_variance());
      for (double e : patterns) {
        const double interference = 2.0 * in.scale.photons_per_bit * e;
        total += 0.5 * (q_function(h * (signal - interference) / two_sigma) +
                        q_function(h * (signal + interference) / two_sigma));
      }
      break;
    }
    case Method::saddle_point:
    case Method::gaussian: {
      const double var = in.noise.thermal_variance();
      const double dark = in.noise.noise_counts();
      if (method == Method::saddle_point && !(var > 0.0))
        throw NumericalError("saddle point requires sigma_th^2 > 0");
      // Patterns are sorted by energy, so the previous solution is a close
      // starting point for the next.
      SaddlePointSolution previous;
      bool have_previous = false;
      for (double e : patterns) {
        const double m0 = h * in.scale.photons_per_bit * e + dark;
        const double m1 = m0 + h * signal;
        if (!(m1 > m0)) {
          total += 0.5;
        } else if (method == Method::gaussian) {
          total += gaussian_ber(m0, m1, var);
        } else {
          previous = solve_saddle_point(m0, m1, var, have_previous ? &previous : nullptr);
          have_previous = true;
          total += previous.ber;
        }
      }
      break;
    }
  }
  return total / static_cast<double>(patterns.size());
}

// Saddle-point equation f(s) = m e^s + var s - beta - 1/s. f is increasing
// on each half-line, so each side has exactly one root.
// m e^s, which is exactly 0 for a noiseless OFF slot even when e^s overflows.
double poisson_term(double m, double s) { return m == 0.0 ? 0.0 : m * std::exp(s); }

struct SaddleEquation {
  double m, var, beta;
  double operator()(double s) const { return poisson_term(m, s) + var * s - beta - 1.0 / s; }
  double slope(double s) const { return poisson_term(m, s) + var + 1.0 / (s * s); }
  double curvature(double s) const { return poisson_term(m, s) - 2.0 / (s * s * s); }
  double relative_residual(double s) const {
    const double scale =
        poisson_term(m, s) + std::abs(var * s) + std::abs(beta) + std::abs(1.0 / s);
    return std::abs((*this)(s)) / scale;
  }
};

// Root of e(s) on the positive (s0) or negative (s1) half-line by Newton's
// method, falling back to bisection or bracket expansion whenever a step
// leaves the current bracket.
double solve_saddle(const SaddleEquation& eq, bool positive, double guess) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  double lo = positive ? 0.0 : -inf;
  double hi = positive ? inf : 0.0;
  double x = guess;
  if (!(positive ? x > 0.0 : x < 0.0) || !std::isfinite(x)) {
    // Root of the quadratic obtained with e^s ~ 1 + s.
    const double a = eq.m + eq.var, b = eq.beta - eq.m;
    const double disc = std::sqrt(b * b + 4.0 * a);
    x = positive ? (b + disc) / (2.0 * a) : (b - disc) / (2.0 * a);
    if (!(positive ? x > 0.0 : x < 0.0)) x = positive ? 1.0 : -1.0;
  }
  for (std::uintmax_t it = 0; it < kMaxRootIterations; ++it) {
    double next;
    const double fx = x > 700.0 && eq.m > 0.0 ? inf : eq(x);
    if (fx == 0.0) return x;
    (fx < 0.0 ? lo : hi) = x;
    next = x - fx / eq.slope(x);
    if (!(next > lo && next < hi) || !std::isfinite(next)) {
      if (std::isfinite(lo) && std::isfinite(hi)) next = 0.5 * (lo + hi);
      else if (positive) next = 2.0 * lo;
      else next = 2.0 * hi;
      if (!std::isfinite(next)) throw NumericalError("saddle point could not be bracketed");
    }
    if (std::abs(next - x) <= 8.0 * std::numeric_limits<double>::epsilon() * std::abs(x) ||
        next == lo || next == hi) {
      return std::abs(eq(next)) < std::abs(fx) ? next : x;
    }
    x = next;
  }
  return x;
}

// ln q(beta, s) for the tail of a Poisson(m) + N(0, var) statistic, and the
// magnitude of its terms (for relative residuals).
double log_tail(double m, double var, double beta, double s) {
  const double poisson = m == 0.0 ? 0.0 : m * std::expm1(s);
  return poisson + 0.5 * s * s * var - s * beta - std::log(std::abs(s)) -
         0.5 * std::log(2.0 * std::numbers::pi * (poisson_term(m, s) + var + 1.0 / (s * s)));
}

double log_tail_scale(double m, double var, double beta, double s) {
  return (m == 0.0 ? 0.0 : std::abs(m * std::expm1(s))) + std::abs(0.5 * s * s * var) +
         std::abs(s * beta) + std::abs(std::log(std::abs(s))) +
         std::abs(0.5 * std::log(2.0 * std::numbers::pi * (poisson_term(m, s) + var + 1.0 / (s * s))));
}

struct ThresholdState {
  double beta = 0.0, s0 = 0.0, s1 = 0.0, log_q_plus = 0.0, log_q_minus = 0.0;
  double residual = 0.0;  // ln(s0 q+) - ln(-s1 q-), decreasing in beta
  double slope = 0.0;     // d residual / d beta
  double scale = 1.0;
};

ThresholdState evaluate_threshold(double m0, double m1, double var, double beta, double s0_guess,
                                  double s1_guess) {
  ThresholdState st;
  st.beta = beta;
  const SaddleEquation e0{m0, var, beta}, e1{m1, var, beta};
  st.s0 = solve_saddle(e0, true, s0_guess);
  st.s1 = solve_saddle(e1, false, s1_guess);
  st.log_q_plus = log_tail(m0, var, beta, st.s0);
  st.log_q_minus = log_tail(m1, var, beta, st.s1);
  st.residual = (std::log(st.s0) + st.log_q_plus) - (std::log(-st.s1) + st.log_q_minus);
  // ds/dbeta = 1/f'(s); the exponent is stationary in s, leaving -s plus the
  // prefactor terms.
  auto side = [](const SaddleEquation& e, double s) {
    const double fp = e.slope(s);
    return 1.0 / (s * fp) - s - 0.5 * e.curvature(s) / (fp * fp);
  };
  st.slope = side(e0, st.s0) - side(e1, st.s1);
  st.scale = std::max(1.0, std::abs(std::log(st.s0)) + std::abs(std::log(-st.s1)) +
                               log_tail_scale(m0, var, beta, st.s0) +
                               log_tail_scale(m1, var, beta, st.s1));
  return st;
}

SaddlePointSolution solve_saddle_point(double m0, double m1, double var,
                                       const SaddlePointSolution* hint) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double gap = m1 - m0;
  double beta;
  double s0_guess = 0.0, s1_guess = 0.0;
  if (hint && hint->beta > m0 - gap && hint->beta < m1 + gap) {
    beta = hint->beta;
    s0_guess = hint->s0;
    s1_guess = hint->s1;
  } else {
    const double sd0 = std::sqrt(m0 + var), sd1 = std::sqrt(m1 + var);
    beta = (m0 * sd1 + m1 * sd0) / (sd0 + sd1);
  }

  double lo = -inf, hi = inf;
  ThresholdState st = evaluate_threshold(m0, m1, var, beta, s0_guess, s1_guess);
  ThresholdState best = st;
  for (std::uintmax_t it = 0; it < kMaxRootIterations; ++it) {
    if (std::abs(st.residual) < std::abs(best.residual)) best = st;
    if (st.residual == 0.0) break;
    (st.residual > 0.0 ? lo : hi) = st.beta;
    double next = st.beta - st.residual / st.slope;
    if (!(next > lo && next < hi) || !std::isfinite(next)) {
      if (std::isfinite(lo) && std::isfinite(hi)) next = 0.5 * (lo + hi);
      else if (std::isfinite(lo)) next = lo + gap * std::ldexp(1.0, static_cast<int>(it));
      else next = hi - gap * std::ldexp(1.0, static_cast<int>(it));
    }
    if (std::abs(next - st.beta) <= 4.0 * std::numeric_limits<double>::epsilon() *
                                         std::max(std::abs(st.beta), 1.0) ||
        next == lo || next == hi)
      break;
    st = evaluate_threshold(m0, m1, var, next, st.s0, st.s1);
  }
  if (std::abs(st.residual) < std::abs(best.residual)) best = st;

  const double r0 = SaddleEquation{m0, var, best.beta}.relative_residual(best.s0);
  const double r1 = SaddleEquation{m1, var, best.beta}.relative_residual(best.s1);
  const double r_beta = std::abs(best.residual) / best.scale;
  if (!(r0 < 1e-10 && r1 < 1e-10 && r_beta < 1e-10)) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "saddle point system did not converge (m0=%.6g, m1=%.6g, sigma^2=%.6g, "
                  "relative residuals %.3g, %.3g, %.3g)",
                  m0, m1, var, r0, r1, r_beta);
    throw NumericalError(buf);
  }

  SaddlePointSolution out;
  out.s0 = best.s0;
  out.s1 = best.s1;
  out.beta = best.beta;
  out.ber = 0.5 * (std::exp(best.log_q_minus) + std::exp(best.log_q_plus));
  return out;
}

}  // namespace

double NoiseModel::thermal_variance() const {
  const double q = constants::electron_charge;
  return 2.0 * constants::boltzmann * temperature * bit_duration / (load_resistance * q * q);
}

double NoiseModel::noise_counts() const { return (background_rate + dark_rate) * bit_duration; }

double NoiseModel::awgn_variance() const { return thermal_variance() + noise_counts(); }

void NoiseModel::validate() const {
  for (double v : {background_rate, dark_rate, temperature, load_resistance, bit_duration}) {
    if (!std::isfinite(v)) throw std::invalid_argument("noise parameters must be finite");
  }
  if (background_rate < 0.0 || dark_rate < 0.0)
    throw std::invalid_argument("background and dark count rates must be >= 0");
  if (temperature <= 0.0) throw std::invalid_argument("receiver temperature must be > 0");
  if (load_resistance <= 0.0) throw std::invalid_argument("load resistance must be > 0");
  if (bit_duration <= 0.0) throw std::invalid_argument("bit duration must be > 0");
}

double NoiseModel::dark_rate_from_current(double dark_current_amps) {
  return dark_current_amps / constants::electron_charge;
}

NoiseModel NoiseModel::reference(double bit_duration) {
  NoiseModel n;
  n.background_rate = 1.8094e8;
  n.dark_rate = dark_rate_from_current(1.226e-9);
  n.temperature = 290.0;
  n.load_resistance = 100.0;
  n.bit_duration = bit_duration;
  return n;
}

CountScale CountScale::from_power(double power_per_bit_watts, double bit_duration,
                                  double wavelength, double quantum_efficiency) {
  if (!(power_per_bit_watts >= 0.0)) throw std::invalid_argument("power must be >= 0");
  const double frequency = constants::speed_of_light / wavelength;
  return {quantum_efficiency * power_per_bit_watts * bit_duration /
          (constants::planck * frequency)};
}

void HopBerInputs::validate() const {
  noise.validate();
  if (!(scale.photons_per_bit >= 0.0) || !std::isfinite(scale.photons_per_bit))
    throw std::invalid_argument("photons per bit must be finite and >= 0");
  if (!(energies.signal >= 0.0)) throw std::invalid_argument("signal energy must be >= 0");
  for (double e : energies.isi) {
    if (!(e >= 0.0)) throw std::invalid_argument("ISI energies must be >= 0");
  }
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::awgn_ghqf: return "awgn_ghqf";
    case Method::saddle_point: return "saddle_point";
    case Method::gaussian: return "gaussian";
  }
  return "unknown";
}

Method method_from_string(std::string_view name) {
  if (name == "awgn_ghqf") return Method::awgn_ghqf;
  if (name == "saddle_point") return Method::saddle_point;
  if (name == "gaussian") return Method::gaussian;
  throw std::invalid_argument("unknown BER method '" + std::string(name) + "'");
}

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double conditional_ber_awgn(int b0, std::span<const std::uint8_t> isi_bits, double h,
                            const HopBerInputs& in) {
  check_isi_length(isi_bits, in);
  if (!(h > 0.0)) throw std::invalid_argument("fading gain must be > 0");
  const double signal = in.scale.photons_per_bit * in.energies.signal;
  const double interference = 2.0 * in.scale.photons_per_bit * isi_energy(isi_bits, in.energies);
  const double sign = b0 ? 1.0 : -1.0;
  return q_function(h * (signal + sign * interference) /
                    (2.0 * std::sqrt(in.noise.awgn_variance())));
}

double poisson_means(int b0, std::span<const std::uint8_t> isi_bits, double h,
                     const HopBerInputs& in) {
  check_isi_length(isi_bits, in);
  const double energy = (b0 ? in.energies.signal : 0.0) + isi_energy(isi_bits, in.energies);
  return h * in.scale.photons_per_bit * energy + in.noise.noise_counts();
}

SaddlePointSolution saddle_point_ber(double m0, double m1, double sigma_th_sq) {
  if (!(m0 >= 0.0) || !std::isfinite(m1)) throw std::invalid_argument("means must be finite, m0 >= 0");
  if (!(m1 > m0)) throw NumericalError("saddle point requires m1 > m0");
  if (!(sigma_th_sq > 0.0)) throw NumericalError("saddle point requires sigma_th^2 > 0");
  return solve_saddle_point(m0, m1, sigma_th_sq, nullptr);
}

double gaussian_ber(double m0, double m1, double sigma_th_sq) {
  if (!(m0 >= 0.0) || !(sigma_th_sq >= 0.0)) throw std::invalid_argument("m0 and sigma^2 must be >= 0");
  if (m1 < m0) throw std::invalid_argument("gaussian_ber requires m1 >= m0");
  if (m1 == m0) return 0.5;
  return q_function((m1 - m0) / (std::sqrt(m1 + sigma_th_sq) + std::sqrt(m0 + sigma_th_sq)));
}

double fading_conditional_ber(const HopBerInputs& in, Method method, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("fading gain must be > 0");
  return pattern_average(in, method, h, isi_patterns(in.energies).energy);
}

HopAverage hop_average_ber(const HopBerInputs& in, Method method,
                           const turbulence::GhqRule& rule) {
  in.validate();
  if (rule.order() < 1) throw std::invalid_argument("Gauss-Hermite rule is empty");
  const PatternSet patterns = isi_patterns(in.energies);

  HopAverage out;
  out.isi_patterns = patterns.energy.size();
  out.isi_sampled = patterns.sampled;

  auto at_node = [&](std::size_t q, double h) {
    try {
      return pattern_average(in, method, h, patterns.energy);
    } catch (const NumericalError& e) {
      throw NumericalError("GHQ node " + std::to_string(q) + " (h = " + std::to_string(h) +
                           "): " + e.what());
    }
  };

  if (in.fading.degenerate()) {
    out.ber = at_node(0, 1.0);
    return out;
  }
  const double spread = std::sqrt(2.0 * in.fading.sigma_x_sq());
  double total = 0.0;
  for (std::size_t q = 0; q < rule.order(); ++q) {
    const double h = std::exp(2.0 * rule.nodes[q] * spread + 2.0 * in.fading.mu_x());
    total += rule.weights[q] * at_node(q, h);
  }
  out.ber = total / std::sqrt(std::numbers::pi);
  return out;
}

}  // namespace uwoc::ber
