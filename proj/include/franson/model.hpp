#pragma once

#include <vector>

#include "franson/chain.hpp"
#include "franson/tensor.hpp"

namespace franson {

/// System levels: |a> (upper), |b> (middle), |c> (ground).
inline constexpr int kLevelA = 0;
inline constexpr int kLevelB = 1;
inline constexpr int kLevelC = 2;
inline constexpr Index kSystemDim = 3;

struct ModelParams {
  double gamma_a = 1.0;  // decay rate of |a> -> |b>
  double gamma_b = 1.0;  // decay rate of |b> -> |c>
  double dt = 0.05;      // time step
  int n_steps = 200;     // N
  int m = 0;             // feedback delay in steps, tau_FB = m*dt
  double phi_fb = 0.0;   // feedback round-trip phase
  int n_t = 1;           // interferometer delay in steps, T = n_t*dt
  double phi_t = 0.0;    // short/long delay phase
  bool feedback_enabled = false;
  TruncationPolicy truncation{};
  Index photon_cutoff = 2;  // physical dim p per sub-bin (p-1 photons max)

  double t_max() const { return n_steps * dt; }
  double delay_T() const { return n_t * dt; }
  double tau_fb() const { return m * dt; }
};

/// Checks every invariant and returns params with phases reduced to
/// [0, 2*pi). Throws std::invalid_argument listing all violations.
ModelParams validate(const ModelParams& raw);

/// Role of a gate leg, resolved to a concrete chain label only at
/// application time (current step k).
enum class GateSiteRole {
  System,
  Feedback1Short,  // channel-1 sub-bins of step k-m
  Feedback1Long,
  Current1Short,  // channel-1 sub-bins of step k
  Current1Long,
  Current2Short,  // channel-2 sub-bins of step k
  Current2Long,
};

struct StroboscopicGate {
  std::vector<GateSiteRole> sites;  // chain order, left to right
  ComplexTensor matrix;             // unitary over the combined physical index

  Index n_sites() const { return static_cast<Index>(sites.size()); }
};

/// Per-step unitary. With feedback: 7 sites (2 feedback sub-bins, system,
/// 4 current sub-bins); without: 5 sites (system, 4 current sub-bins).
StroboscopicGate build_gate(const ModelParams& params);

/// Resolve a gate role to the concrete label expected at evolution step k.
SiteLabel expected_label(GateSiteRole role, const ModelParams& params, int step);

///// Fresh chain: system in |a>, and (feedback mode) m vacuum channel-1
/// sub-bin pairs priming the initially empty loop, ordered oldest to newest
/// left of the system site.
BinChain new_chain(const ModelParams& params);

/// 3x3 projector |level><level| as a tensor.
ComplexTensor system_projector(int level);

/// Photon number operator on a bin with physical dimension p.
ComplexTensor number_operator(Index p);

}  // namespace franson
