#pragma once

#include <cstddef>
#include <vector>

#include "uwoc/rng.hpp"

namespace uwoc::turbulence {

/// Oceanic turbulence along one hop.
struct TurbulenceParams {
  double chi_t = 2e-7;                // K^2/s, dissipation rate of mean-square temperature
  double epsilon = 1.5e-5;            // m^2/s^3, kinetic energy dissipation rate per unit mass
  double w = -2.5;                    // temperature/salinity relative strength
  double wavelength = 532e-9;         // m
  double distance = 0.0;              // m
  double kinematic_viscosity = 1e-6;  // m^2/s, sets the Kolmogorov microscale

  void validate() const;
  /// Kolmogorov microscale (nu^3 / epsilon)^(1/4), m.
  double kolmogorov_scale() const;
};

/// Nikishov & Nikishov spectrum of refractive-index fluctuations for
/// oceanic turbulence, Phi_n(kappa) in m^3:
///
///   Phi_n = 0.388e-8 eps^(-1/3) kappa^(-11/3) [1 + 2.35 (kappa eta)^(2/3)]
///           * (chi_T / w^2) [w^2 e^{-A_T delta} + e^{-A_S delta} - 2 w e^{-A_TS delta}]
///
/// with delta = 8.284 (kappa eta)^(4/3) + 12.978 (kappa eta)^2,
/// A_T = 1.863e-2, A_S = 1.9e-4, A_TS = 9.41e-3.
double nikishov_spectrum(double kappa, const TurbulenceParams& p);

/// Weak-turbulence scintillation index of a plane wave,
///
///   S.I. = 8 pi^2 k^2 d \int_0^1 \int_0^inf kappa Phi_n(kappa) [1 - cos(d kappa^2 xi / k)] dkappa dxi.
///
/// The xi integral is taken in closed form; the kappa integral is adaptive
/// Gauss-Kronrod in log(kappa) with relative tolerance 1e-6. Throws
/// NumericalError if that tolerance is not met. Logs a warning above 1.0,
/// where the log-normal model stops being justified.
double scintillation_index_plane_wave(const TurbulenceParams& p);

/// sigma_X^2 = ln(S.I. + 1) / 4.
double sigma_x_sq_from_si(double si);
/// S.I. = exp(4 sigma_X^2) - 1.
double si_from_sigma_x_sq(double sigma_x_sq);

/// Log-normal fading of the channel gain h = exp(2X), X ~ N(mu_X, sigma_X^2),
/// normalized to E[h] = 1 (mu_X = -sigma_X^2).
class FadingModel {
 public:
  FadingModel() = default;
  explicit FadingModel(double sigma_x_sq);

  double sigma_x_sq() const { return sigma_x_sq_; }
  double mu_x() const { return -sigma_x_sq_; }
  /// sigma_X^2 == 0: the gain is the point mass h = 1.
  bool degenerate() const { return sigma_x_sq_ == 0.0; }

  bool operator==(const FadingModel&) const = default;

 private:
  double sigma_x_sq_ = 0.0;
};

double fading_pdf(double h, const FadingModel& f);
double fading_cdf(double h, const FadingModel& f);
double sample_fading(const FadingModel& f, Rng& rng);

/// Gauss-Hermite rule for \int e^{-x^2} g(x) dx ~ sum w_q g(x_q).
struct GhqRule {
  std::vector<double> nodes;    // ascending
  std::vector<double> weights;

  std::size_t order() const { return nodes.size(); }
};

/// Nodes are the roots of the physicists' Hermite polynomial H_V, found by
/// Newton iteration on the orthonormal recurrence. Supports 1 <= V <= 64.
GhqRule ghq_rule(int order);

}  // namespace uwoc::turbulence
