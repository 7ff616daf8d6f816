#pragma once

#include <complex>
#include <vector>

namespace franson::oracle {

/// Parameters of the analytic no-feedback solution. The overall scale eta
/// is treated as 1 throughout; all comparisons are over normalized curves.
struct AnalyticParams {
  double gamma_a = 1.0;
  double gamma_b = 1.0;
  double T = 1.0;      // long-short delay time
  double phi_t = 0.0;  // delay phase
};

/// Piecewise closed-form G2(tau) without feedback (eta^2 = 1).
double g2_closed_form(double tau, const AnalyticParams& p);

/// Interference visibility from the central-peak branch values at
/// phi_t = 0 and pi/2.
double visibility_closed_form(double gamma_a_T, double gamma_b_T);

/// Central-peak height in the separated-peak limit gamma_a*T << gamma_b*T,
///// with gamma_a normalized to 1: (1/4)[1 + e^{-gamma_a T/2} cos(2 phi_t)].
double central_peak_limit(double phi_t, double gamma_a_T);

/// Two-photon detection amplitude for paths r1, r2 given as delays (0 or T),
/// frequencies as detunings (eta = 1).
std::complex<double> two_photon_amplitude(double t1, double t2, double r1_delay,
                                          double r2_delay, const AnalyticParams& p);

/// Spectral two-photon amplitude at detunings (omega, omega_prime) with
/// couplings inferred from the rates via g = sqrt(Gamma / 2 pi).
std::complex<double> spectral_amplitude(double omega, double omega_prime,
                                        const AnalyticParams& p);

struct Populations {
  double pop_a = 0.0;
  double pop_b = 0.0;
};

/// Exponential-decay populations of the cascade starting in |a>.
Populations ww_populations(double t, const AnalyticParams& p);

/// |c(t)|^2 for the delayed amplitude equation
///   c'(t) = -(gamma_a/2) c(t) + (gamma_a/2) e^{i phi_fb} c(t - tau_fb),
/// evaluated exactly per point via the method of steps. The grid must be
/// finer than tau_fb/100.
std::vector<double> dde_population(const std::vector<double>& t_grid, double gamma_a,
                                   double tau_fb, double phi_fb);

/// Same delayed amplitude equation with the feedback term weighted by
/// e^{-gamma_b tau_fb / 2}: the returning photon can only be re-absorbed
/// if the intermediate level has not yet decayed. Reduces to
/// dde_population at gamma_b = 0.
std::vector<double> dde_population_cascade(const std::vector<double>& t_grid,
                                           double gamma_a, double gamma_b,
                                           double tau_fb, double phi_fb);

}  // namespace franson::oracle
