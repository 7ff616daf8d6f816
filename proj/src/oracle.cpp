#include "franson/oracle.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace franson::oracle {

namespace {
using cplx = std::complex<double>;
}

double g2_closed_form(double tau, const AnalyticParams& p) {
  const double ga = p.gamma_a, gb = p.gamma_b, T = p.T, phi = p.phi_t;
  if (tau < -T) return 0.0;
  if (tau < 0.0) {
    return std::exp(-gb * (tau + T)) / (4.0 * ga);
  }
  if (tau < T) {
    const double bracket = 1.0 + 0.5 * std::exp(-gb * T) +
                           std::exp(-ga * T / 2.0) * std::cos(2.0 * phi) +
                           (std::exp(-gb * T / 2.0) + std::exp(-(ga + gb) * T / 2.0)) *
                               std::cos(phi);
    return std::exp(-gb * tau) * bracket / (2.0 * ga);
  }
  const double bracket =
      1.0 + 0.5 * (std::exp(-gb * T) + std::exp(gb * T)) + std::exp(-ga * T / 2.0) +
      std::exp(-ga * T / 2.0) * std::cos(2.0 * phi) +
      (1.0 + std::exp(-ga * T / 2.0)) * (std::exp(-gb * T / 2.0) + std::exp(gb * T / 2.0)) *
          std::cos(phi);
  return std::exp(-gb * tau) * bracket / (2.0 * ga);
}

double visibility_closed_form(double gamma_a_T, double gamma_b_T) {
  const double A = 1.0 + 0.5 * std::exp(-gamma_b_T);
  const double B = std::exp(-gamma_a_T / 2.0);
  const double C = std::exp(-gamma_b_T / 2.0) + std::exp(-(gamma_a_T + gamma_b_T) / 2.0);
  return (2.0 * B + C) / (2.0 * A + C);
}

double central_peak_limit(double phi_t, double gamma_a_T) {
  return 0.25 * (1.0 + std::exp(-gamma_a_T / 2.0) * std::cos(2.0 * phi_t));
}

cplx two_photon_amplitude(double t1, double t2, double r1_delay, double r2_delay,
                          const AnalyticParams& p) {
  const double u1 = t1 - r1_delay;
  const double u2 = t2 - r2_delay;
  if (u1 < 0.0 || u2 - u1 < 0.0) return {};
  // Detuned coordinates: omega_a = omega_b = 0.
  const cplx first = std::exp(-(p.gamma_a / 2.0) * u1);
  const cplx second = std::exp(-(p.gamma_b / 2.0) * (u2 - u1));
  return first * second;
}

cplx spectral_amplitude(double omega, double omega_prime, const AnalyticParams& p) {
  const double gagb = std::sqrt(p.gamma_a * p.gamma_b) / (2.0 * std::numbers::pi);
  const cplx f1 = cplx(0.0, omega + omega_prime) - p.gamma_a / 2.0;
  const cplx f2 = cplx(0.0, omega_prime) - p.gamma_b / 2.0;
  return -gagb / (f1 * f2);
}

Populations ww_populations(double t, const AnalyticParams& p) {
  if (t < 0.0) throw std::invalid_argument("ww_populations: t must be >= 0");
  Populations out;
  out.pop_a = std::exp(-p.gamma_a * t);
  if (std::abs(p.gamma_a - p.gamma_b) < 1e-12 * std::max(p.gamma_a, p.gamma_b)) {
    out.pop_b = p.gamma_a * t * std::exp(-p.gamma_a * t);
  } else {
    out.pop_b = p.gamma_a * (std::exp(-p.gamma_b * t) - std::exp(-p.gamma_a * t)) /
                (p.gamma_a - p.gamma_b);
  }
  return out;
}

std::vector<double> dde_population_cascade(const std::vector<double>& t_grid,
                                           double gamma_a, double gamma_b,
                                           double tau_fb, double phi_fb) {
  if (tau_fb <= 0.0) throw std::invalid_argument("dde_population: tau_fb must be positive");
  for (size_t i = 1; i < t_grid.size(); ++i) {
    if (t_grid[i] < t_grid[i - 1]) {
      throw std::invalid_argument("dde_population: grid must be nondecreasing");
    }
  }
  // Method of steps in closed form:
  //   c(t) = e^{-Ga t/2} sum_{n=0}^{floor(t/tau)} K^n (t - n tau)^n / n!
  // with K = (Ga/2) e^{i phi} e^{(Ga - Gb) tau / 2}. The e^{-Gb tau/2} factor
  // accounts for the decay of the intermediate level during the round trip;
  // the memoryless delay equation is recovered at gamma_b = 0.
  const cplx K = 0.5 * gamma_a * std::exp(cplx(0.0, phi_fb)) *
                 std::exp(0.5 * (gamma_a - gamma_b) * tau_fb);
  std::vector<double> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    if (t < 0.0) throw std::invalid_argument("dde_population: t must be >= 0");
    const int n_max = static_cast<int>(std::floor(t / tau_fb + 1e-12));
    cplx sum = 0.0;
    for (int n = 0; n <= n_max; ++n) {
      cplx term = 1.0;
      for (int j = 1; j <= n; ++j) {
        term *= K * (t - n * tau_fb) / static_cast<double>(j);
      }
      sum += term;
    }
    const cplx c = std::exp(-0.5 * gamma_a * t) * sum;
    out.push_back(std::norm(c));
  }
  return out;
}

std::vector<double> dde_population(const std::vector<double>& t_grid, double gamma_a,
                                   double tau_fb, double phi_fb) {
  return dde_population_cascade(t_grid, gamma_a, 0.0, tau_fb, phi_fb);
}

}  // namespace franson::oracle
