#include "uwoc/turbulence.hpp"

#include "uwoc/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace uwoc::turbulence {

namespace {

constexpr double kAT = 1.863e-2;
constexpr double kAS = 1.9e-4;
constexpr double kATS = 9.41e-3;

// 1 - sin(a)/a without cancellation for small a.
double one_minus_sinc(double a) {
  if (std::abs(a) < 1e-3) {
    const double a2 = a * a;
    return a2 / 6.0 - a2 * a2 / 120.0;
  }
  return 1.0 - std::sin(a) / a;
}

}  // namespace

void TurbulenceParams::validate() const {
  for (double v : {chi_t, epsilon, w, wavelength, distance, kinematic_viscosity}) {
    if (!std::isfinite(v)) throw std::invalid_argument("turbulence parameters must be finite");
  }
  if (chi_t < 0.0) throw std::invalid_argument("chi_T must be >= 0");
  if (epsilon <= 0.0) throw std::invalid_argument("epsilon must be > 0");
  if (w >= 0.0) throw std::invalid_argument("w must be < 0");
  if (wavelength <= 0.0) throw std::invalid_argument("wavelength must be > 0");
  if (distance <= 0.0) throw std::invalid_argument("distance must be > 0");
  if (kinematic_viscosity <= 0.0) throw std::invalid_argument("kinematic viscosity must be > 0");
}

double TurbulenceParams::kolmogorov_scale() const {
  return std::pow(kinematic_viscosity * kinematic_viscosity * kinematic_viscosity / epsilon,
                  0.25);
}

double nikishov_spectrum(double kappa, const TurbulenceParams& p) {
  if (kappa <= 0.0 || p.chi_t == 0.0) return 0.0;
  const double ke = kappa * p.kolmogorov_scale();
  const double delta = 8.284 * std::pow(ke, 4.0 / 3.0) + 12.978 * ke * ke;
  const double mix = p.w * p.w * std::exp(-kAT * delta) + std::exp(-kAS * delta) -
                     2.0 * p.w * std::exp(-kATS * delta);
  return 0.388e-8 * std::pow(p.epsilon, -1.0 / 3.0) * std::pow(kappa, -11.0 / 3.0) *
         (1.0 + 2.35 * std::pow(ke, 2.0 / 3.0)) * (p.chi_t / (p.w * p.w)) * mix;
}

double scintillation_index_plane_wave(const TurbulenceParams& p) {
  p.validate();
  if (p.chi_t == 0.0) return 0.0;

  const double k = 2.0 * std::numbers::pi / p.wavelength;
  const double eta = p.kolmogorov_scale();
  // Integrand in u = ln(kappa): kappa^2 Phi_n(kappa) [1 - sinc(d kappa^2 / k)].
  auto integrand = [&](double u) {
    const double kappa = std::exp(u);
    return kappa * kappa * nikishov_spectrum(kappa, p) * one_minus_sinc(p.distance * kappa * kappa / k);
  };

  // Break points at the Fresnel scale and the inner scale help the adaptive rule.
  const double fresnel = std::log(std::sqrt(k / p.distance));
  std::array<double, 5> edges{std::log(1e-6 / eta), std::min(fresnel, std::log(1.0 / eta)),
                              std::max(fresnel, std::log(1.0 / eta)), std::log(30.0 / eta),
                              std::log(1e3 / eta)};
  std::sort(edges.begin(), edges.end());

  double sum = 0.0, error = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (edges[i + 1] <= edges[i]) continue;
    double piece_error = 0.0;
    sum += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        integrand, edges[i], edges[i + 1], 20, 1e-9, &piece_error);
    error += piece_error;
  }
  if (!std::isfinite(sum) || error > 1e-6 * std::abs(sum)) {
    throw NumericalError("scintillation index integral did not converge (estimated error " +
                         std::to_string(error) + " on " + std::to_string(sum) + ")");
  }

  const double si = 8.0 * std::numbers::pi * std::numbers::pi * k * k * p.distance * sum;
  if (si > 1.0) {
    spdlog::warn("scintillation index {:.3g} at d = {} m exceeds 1; the weak-turbulence "
                 "log-normal model is outside its range",
                 si, p.distance);
  }
  return si;
}

double sigma_x_sq_from_si(double si) {
  if (!(si >= 0.0) || !std::isfinite(si))
    throw std::invalid_argument("scintillation index must be finite and >= 0");
  return std::log1p(si) / 4.0;
}

double si_from_sigma_x_sq(double sigma_x_sq) {
  if (!(sigma_x_sq >= 0.0)) throw std::invalid_argument("sigma_x_sq must be >= 0");
  return std::expm1(4.0 * sigma_x_sq);
}

FadingModel::FadingModel(double sigma_x_sq) : sigma_x_sq_(sigma_x_sq) {
  if (!(sigma_x_sq >= 0.0) || !std::isfinite(sigma_x_sq))
    throw std::invalid_argument("sigma_x_sq must be finite and >= 0");
}

double fading_pdf(double h, const FadingModel& f) {
  if (!(h > 0.0)) throw std::invalid_argument("fading_pdf requires h > 0");
  if (f.degenerate())
    throw std::invalid_argument("fading_pdf is undefined for sigma_x_sq = 0 (point mass at 1)");
  const double var = f.sigma_x_sq();
  const double z = std::log(h) - 2.0 * f.mu_x();
  return std::exp(-z * z / (8.0 * var)) / (2.0 * h * std::sqrt(2.0 * std::numbers::pi * var));
}

double fading_cdf(double h, const FadingModel& f) {
  if (f.degenerate()) return h >= 1.0 ? 1.0 : 0.0;
  if (h <= 0.0) return 0.0;
  const double z = (std::log(h) - 2.0 * f.mu_x()) / (2.0 * std::sqrt(f.sigma_x_sq()));
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double sample_fading(const FadingModel& f, Rng& rng) {
  if (f.degenerate()) return 1.0;
  std::normal_distribution<double> normal(f.mu_x(), std::sqrt(f.sigma_x_sq()));
  return std::exp(2.0 * normal(rng));
}

GhqRule ghq_rule(int order) {
  if (order < 1 || order > 64)
    throw std::invalid_argument("Gauss-Hermite order must lie in [1, 64], got " +
                                std::to_string(order));
  const int n = order;
  const double pim4 = std::pow(std::numbers::pi, -0.25);
  std::vector<double> x(n), w(n);

  double z = 0.0;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    if (i == 0)
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    else if (i == 1)
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * x[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * x[1];
    else
      z = 2.0 * z - x[i - 2];

    double pp = 0.0;
    bool converged = false;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double previous = z;
      z = previous - p1 / pp;
      if (std::abs(z - previous) <= 1e-15 * std::max(1.0, std::abs(z))) {
        converged = true;
        break;
      }
    }
    if (!converged) throw NumericalError("Gauss-Hermite root iteration did not converge");
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = 2.0 / (pp * pp);
    w[n - 1 - i] = w[i];
  }
  if (n % 2 == 1) x[n / 2] = 0.0;

  GhqRule rule;
  rule.nodes.assign(x.rbegin(), x.rend());
  rule.weights.assign(w.rbegin(), w.rend());
  return rule;
}

}  // namespace uwoc::turbulence
