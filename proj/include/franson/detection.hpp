#pragma once

#include <string>
#include <vector>

#include "franson/chain.hpp"
#include "franson/evolution.hpp"
#include "franson/model.hpp"

namespace franson {

/// Discrete two-time coincidence map G2(t1, t2) on the detection grid.
/// two_time is n_det x n_det row-major; rows index the detector-1 slot,
/// columns the detector-2 slot. Entries carry the 1/dt^2 density factor.
struct G2Grid {
  double dt = 0.0;
  Index n_det = 0;
  std::vector<double> two_time;

  double at(Index j, Index k) const {
    return two_time[static_cast<size_t>(j * n_det + k)];
  }
};

/// Coincidence map from a rearranged chain, evaluated with cached right
/// environments and a parallel sweep over the left detection slot.
G2Grid g2_two_time(const BinChain& rearranged, const ModelParams& params);

/// Independent reference: one full chain contraction per (j, k) pair.
G2Grid g2_two_time_serial(const BinChain& rearranged, const ModelParams& params);

/// Delay histogram g2(tau) for tau = d*dt, d = -(n_det-1) .. n_det-1:
/// entry n_det-1+d is dt * sum_j G2(j, j+d).
std::vector<double> g2_tau(const G2Grid& grid);

/// Height of the central interference peak of a g2_tau curve: the value at
/// tau = 0 (no feedback) or the maximum over tau in [-tau_fb - 2 dt,
/// -tau_fb + 2 dt] (feedback).
double central_peak_height(const std::vector<double>& curve, const ModelParams& params);

/// Franson visibility from an evolved chain: central peak heights at
/// phi_t = 0 and phi_t = pi/2, V = (H0 - Hq) / (H0 + Hq).
double visibility_from_chain(const BinChain& final_chain, const ModelParams& params);

/// Evolve once, then compare the two phase settings.
double visibility(const ModelParams& params);

struct SweepSpec {
  std::vector<double> gamma_a_T;  // grid axis, units of 1/T
  std::vector<double> gamma_b_T;
  double dt_over_T = 0.05;
  double fb_delay_over_T = 0.25;
  double phi_fb = 0.0;
  double residual_target = 1e-2;  // remaining system excitation at t_max
  TruncationPolicy truncation{};
};

struct VisibilityMap {
  std::vector<double> gamma_a_T;
  std::vector<double> gamma_b_T;
  double fb_delay_over_T = 0.0;
  std::vector<double> v_no_fb;       // row-major [i_a * n_b + i_b]
  std::vector<double> v_fb;
  std::vector<std::string> errors;   // empty string = point succeeded
};

/// Visibility over a rate grid, with and without feedback, points evaluated
/// in parallel. t_max is extended (x1.5) until the excitation residual meets
/// the target; per-point failures are recorded without aborting the sweep.
VisibilityMap visibility_sweep(const SweepSpec& spec);

}  // namespace franson
