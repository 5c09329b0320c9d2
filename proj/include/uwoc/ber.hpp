#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "uwoc/channel.hpp"
#include "uwoc/turbulence.hpp"

namespace uwoc::ber {

/// Receiver noise, expressed in photoelectron counts per bit.
struct NoiseModel {
  double background_rate = 1.8094e8;  // n_b, photoelectrons/s
  double dark_rate = 0.0;             // n_d, photoelectrons/s
  double temperature = 290.0;         // T_r, K
  double load_resistance = 100.0;     // R_L, ohm
  double bit_duration = 1e-9;         // T_b, s

  /// sigma_th^2 = 2 K_b T_r T_b / (R_L q^2).
  double thermal_variance() const;
  /// n_bd = (n_b + n_d) T_b.
  double noise_counts() const;
  /// Integrated noise variance of the analytical AWGN receiver:
  /// sigma_Tb^2 = sigma_th^2 + n_bd.
  double awgn_variance() const;

  void validate() const;

  static double dark_rate_from_current(double dark_current_amps);
  /// Table I receiver at the given bit duration.
  static NoiseModel reference(double bit_duration);
};

/// Mean signal photoelectrons per bit at the hop's transmit power.
struct CountScale {
  double photons_per_bit = 0.0;

  /// N_ph = eta P_b T_b / (h f), f = c / lambda.
  static CountScale from_power(double power_per_bit_watts, double bit_duration,
                               double wavelength, double quantum_efficiency);
};

struct HopBerInputs {
  channel::BitEnergies energies;
  turbulence::FadingModel fading;
  NoiseModel noise;
  CountScale scale;

  void validate() const;
};

enum class Method { awgn_ghqf, saddle_point, gaussian };

std::string_view to_string(Method m);
Method method_from_string(std::string_view name);

/// Gaussian tail probability Q(x).
double q_function(double x);

/// Eq. (5)-style conditional error with the CSI threshold h gamma_s / 2.
/// isi_bits[k-1] is the bit sent k slots earlier.
double conditional_ber_awgn(int b0, std::span<const std::uint8_t> isi_bits, double h,
                            const HopBerInputs& in);

/// Mean photoelectron count in the current slot.
double poisson_means(int b0, std::span<const std::uint8_t> isi_bits, double h,
                     const HopBerInputs& in);

struct SaddlePointSolution {
  double ber = 0.0;
  double s0 = 0.0;    // > 0, saddle point of the OFF tail
  double s1 = 0.0;    // < 0, saddle point of the ON tail
  double beta = 0.0;  // decision threshold, photoelectrons
};

/// Saddle-point approximation of the error probability for a Poisson count
/// plus Gaussian thermal noise, at the threshold that minimizes it.
///
/// s0, s1 are the roots of m e^s + sigma^2 s - beta - 1/s = 0 on each side of
/// zero; beta makes s0 q+ + s1 q- vanish. All three equations are solved by
/// safeguarded Newton iteration; NumericalError is thrown if any relative
/// residual stays above 1e-10 (and for m1 <= m0 or sigma^2 <= 0).
SaddlePointSolution saddle_point_ber(double m0, double m1, double sigma_th_sq);

/// Q((m1 - m0) / (sqrt(m1 + sigma^2) + sqrt(m0 + sigma^2))).
double gaussian_ber(double m0, double m1, double sigma_th_sq);

/// Patterns are enumerated exhaustively up to this channel memory; beyond it
/// `kSampledPatterns` uniformly drawn patterns are used.
inline constexpr std::size_t kMaxEnumeratedMemory = 16;
inline constexpr std::size_t kSampledPatterns = std::size_t{1} << 16;

struct HopAverage {
  double ber = 0.0;
  std::size_t isi_patterns = 0;
  bool isi_sampled = false;
};

/// Average BER of one hop over both transmitted bits, all ISI patterns
/// (equiprobable) and the log-normal fading, the latter by Gauss-Hermite
/// quadrature with h = exp(2 x_q sqrt(2 sigma_X^2) + 2 mu_X).
HopAverage hop_average_ber(const HopBerInputs& in, Method method,
                           const turbulence::GhqRule& rule);

/// Conditional BER for one fading value, averaged over b0 and ISI patterns.
double fading_conditional_ber(const HopBerInputs& in, Method method, double h);

}  // namespace uwoc::ber
