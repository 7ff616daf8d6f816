#include "franson/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace franson {

namespace {

BinLabel bin_of(int channel, Path path, int step, BinKind kind = BinKind::Emission) {
  return BinLabel{channel, path, step, kind};
}

// Sub-slot order within a detection slot: ch1-S, ch1-L, ch2-S, ch2-L.
int sub_slot(const BinLabel& bin) {
  int base = bin.channel == 1 ? 0 : 2;
  return base + (bin.path == Path::Long ? 1 : 0);
}

}  // namespace

EvolutionRecord evolve(const ModelParams& params, double discarded_alarm) {
  const ModelParams p = validate(params);
  const StroboscopicGate gate = build_gate(p);

  BinChain chain = new_chain(p);
  const ComplexTensor proj_a = system_projector(kLevelA);
  const ComplexTensor proj_b = system_projector(kLevelB);

  EvolutionRecord rec{
      {}, {}, {}, {}, std::move(chain), 0.0, 0.0, false, {}};
  BinChain& c = rec.final_chain;

  auto record_point = [&](int k) {
    const Index sys = c.system_pos();
    rec.times.push_back(k * p.dt);
    rec.pop_a.push_back(std::real(c.local_expectation(sys, proj_a)));
    rec.pop_b.push_back(std::real(c.local_expectation(sys, proj_b)));
    const double nrm = c.norm();
    rec.norms.push_back(nrm);
    rec.norm_drift = std::max(rec.norm_drift, std::abs(1.0 - nrm));
  };

  record_point(0);

  std::vector<Index> out_order;
  if (p.feedback_enabled) {
    // Input [fbS, fbL, SYS, c1S, c1L, c2S, c2L] leaves the chain as
    // [fbS, fbL, c2S, c2L, c1S, c1L, SYS]; the four leading bins are then
    // parked left of the loop window.
    out_order = {0, 1, 5, 6, 3, 4, 2};
  } else {
    // Input [SYS, c1S, c1L, c2S, c2L] -> [c1S, c1L, c2S, c2L, SYS]: no
    // swaps needed afterwards.
    out_order = {1, 2, 3, 4, 0};
  }

  for (int k = 0; k < p.n_steps; ++k) {
    Index sys = c.system_pos();

    if (p.feedback_enabled) {
      // Bring the oldest loop pair (step k-m) next to the system site.
      const Index pos_l = c.find(bin_of(1, Path::Long, k - p.m));
      if (pos_l < 0) throw std::logic_error("evolve: feedback bin missing from loop window");
      c.move_bin(pos_l, sys - 1);
      const Index pos_s = c.find(bin_of(1, Path::Short, k - p.m));
      c.move_bin(pos_s, sys - 2);
    }

    // Fresh vacuum sub-bins of step k, just right of the system site.
    sys = c.system_pos();
    c.insert_vacuum_bin(sys + 1, bin_of(1, Path::Short, k));
    c.insert_vacuum_bin(sys + 2, bin_of(1, Path::Long, k));
    c.insert_vacuum_bin(sys + 3, bin_of(2, Path::Short, k));
    c.insert_vacuum_bin(sys + 4, bin_of(2, Path::Long, k));

    const Index first = p.feedback_enabled ? sys - 2 : sys;
    for (Index i = 0; i < gate.n_sites(); ++i) {
      const SiteLabel want = expected_label(gate.sites[static_cast<size_t>(i)], p, k);
      if (!(c.label(first + i) == want)) {
        throw std::logic_error("evolve: gate leg mismatch at " + to_string(c.label(first + i)) +
                               ", expected " + to_string(want));
      }
    }
    c.apply_unitary(gate.matrix, first, gate.n_sites(), out_order);

    if (p.feedback_enabled && p.m > 1) {
      // Park the four finished bins (feedback pair of k-m, channel 2 of k)
      // left of the remaining m-1 loop pairs.
      const Index shift = 2 * (p.m - 1);
      const BinLabel done[] = {bin_of(1, Path::Short, k - p.m), bin_of(1, Path::Long, k - p.m),
                               bin_of(2, Path::Short, k), bin_of(2, Path::Long, k)};
      for (const BinLabel& b : done) {
        const Index pos = c.find(b);
        c.move_bin(pos, pos - shift);
      }
    }

    c.assert_finite("evolve step");
    record_point(k + 1);
  }

  rec.discarded_total = c.discarded_weight_total();
  if (rec.discarded_total > discarded_alarm) {
    rec.truncation_warning = true;
    rec.warning = "accumulated truncation weight " + std::to_string(rec.discarded_total) +
                  " exceeds alarm threshold " + std::to_string(discarded_alarm);
  }
  return rec;
}

int arrival_slot(const BinLabel& bin, const ModelParams& params) {
  const int m_eff = params.feedback_enabled ? params.m : 0;
  int slot = bin.step + (bin.path == Path::Long ? params.n_t : 0);
  if (bin.channel == 1) slot += m_eff;
  return slot;
}

int detection_slots(const ModelParams& params) {
  const int m_eff = params.feedback_enabled ? params.m : 0;
  return params.n_steps + m_eff + params.n_t;
}

BinChain rearrange_for_detection(BinChain chain, const ModelParams& params) {
  const ModelParams& p = params;
  const int n_slots = detection_slots(p);
  const int m_eff = p.feedback_enabled ? p.m : 0;

  // The chain must hold the full set of emitted bins.
  for (int ch : {1, 2}) {
    for (Path path : {Path::Short, Path::Long}) {
      const int first_step = ch == 1 ? -m_eff : 0;
      for (int s : {first_step, p.n_steps - 1}) {
        if (s >= p.n_steps) continue;
        if (chain.find(bin_of(ch, path, s)) < 0) {
          throw std::logic_error("rearrange_for_detection: chain is missing bin " +
                                 to_string(SiteLabel::of(bin_of(ch, path, s))));
        }
      }
    }
  }

  // Pad every (slot, sub-slot) cell that has no emitted bin with vacuum.
  // Channel 1 covers slots [path offset + 0 .. n_steps + m_eff - 1 + offset],
  // channel 2 covers [offset .. n_steps - 1 + offset], offset = n_t for Long.
  auto covered = [&](int ch, Path path, int slot) {
    const int off = path == Path::Long ? p.n_t : 0;
    const int hi = (ch == 1 ? p.n_steps + m_eff : p.n_steps) - 1 + off;
    return slot >= off && slot <= hi;
  };
  for (int u = 0; u < n_slots; ++u) {
    for (int ch : {1, 2}) {
      for (Path path : {Path::Short, Path::Long}) {
        if (covered(ch, path, u)) continue;
        const int off = path == Path::Long ? p.n_t : 0;
        const int step = u - off - (ch == 1 ? m_eff : 0);
        chain.insert_vacuum_bin(chain.size(), bin_of(ch, path, step, BinKind::VacuumPad));
      }
    }
  }

  // Target rank: system first, then slots in order, four sub-slots each.
  auto rank = [&](const SiteLabel& label) -> Index {
    if (label.is_system) return 0;
    return 1 + 4 * static_cast<Index>(arrival_slot(label.bin, p)) + sub_slot(label.bin);
  };

  // Selection sort by rank; each placement is a sequence of adjacent swaps.
  const Index n = chain.size();
  if (n != 1 + 4 * static_cast<Index>(n_slots)) {
    throw std::logic_error("rearrange_for_detection: unexpected chain size");
  }
  for (Index i = 0; i < n; ++i) {
    Index best = i;
    for (Index j = i + 1; j < n; ++j) {
      if (rank(chain.label(j)) < rank(chain.label(best))) best = j;
    }
    if (best != i) chain.move_bin(best, i);
  }

  // Short-path delay phase: e^{i phi_t} per photon.
  if (p.phi_t != 0.0) {
    std::vector<cplx> diag(static_cast<size_t>(chain.bin_dim()));
    for (Index j = 0; j < chain.bin_dim(); ++j) {
      diag[static_cast<size_t>(j)] =
          std::exp(cplx(0.0, p.phi_t * static_cast<double>(j)));
    }
    for (Index pos = 0; pos < n; ++pos) {
      const SiteLabel& label = chain.label(pos);
      if (!label.is_system && label.bin.path == Path::Short) chain.scale_physical(pos, diag);
    }
  }

  chain.assert_finite("rearrange_for_detection");
  return chain;
}

double excitation_residual(const EvolutionRecord& record) {
  if (record.pop_a.empty()) throw std::logic_error("excitation_residual: empty record");
  return record.pop_a.back() + record.pop_b.back();
}

}  // namespace franson
