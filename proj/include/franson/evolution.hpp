#pragma once

#include <string>
#include <vector>

#include "franson/chain.hpp"
#include "franson/model.hpp"

namespace franson {

struct EvolutionRecord {
  std::vector<double> times;  // t_k = k*dt, length n_steps+1
  std::vector<double> pop_a;  // <sigma_aa>
  std::vector<double> pop_b;  // <sigma_bb>
  std::vector<double> norms;  // ||psi|| after each recorded step
  BinChain final_chain;
  double norm_drift = 0.0;        // max |1 - ||psi|||
  double discarded_total = 0.0;   // accumulated relative truncation weight
  bool truncation_warning = false;
  std::string warning;
};

/// Default alarm threshold on the accumulated truncation weight.
inline constexpr double kDiscardedAlarm = 1e-6;

/// Run the full time evolution: per step, the feedback sub-bins of step k-m
/// are brought next to the system site (feedback mode), the stroboscopic
/// gate is applied, output bins are parked to the left, and populations are
/// recorded.
EvolutionRecord evolve(const ModelParams& params, double discarded_alarm = kDiscardedAlarm);

/// Arrival slot of a bin at the detectors: channel-1 signals leave the loop
/// m steps after their bin index (feedback mode), long paths add n_t steps.
int arrival_slot(const BinLabel& bin, const ModelParams& params);

/// Number of detection slots after rearrangement.
int detection_slots(const ModelParams& params);

/// Reorder the evolved chain so that each detection slot u holds, adjacent
/// and in fixed order (ch1-S, ch1-L, ch2-S, ch2-L), the four bins arriving
/// at the detectors at step u, with vacuum pad bins where no signal exists,
/// and multiply every short-path bin by the delay phase e^{i phi_t} per
/// photon. The system site ends at position 0.
BinChain rearrange_for_detection(BinChain chain, const ModelParams& params);

/// <sigma_aa> + <sigma_bb> at t_max.
double excitation_residual(const EvolutionRecord& record);

}  // namespace franson
