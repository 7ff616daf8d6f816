#include "franson/detection.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace franson {

namespace {

using MatrixXc =
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<MatrixXc>;
using ConstMapMat = Eigen::Map<const MatrixXc>;

// b (annihilation) on one sub-bin of physical dimension p.
ComplexTensor annihilation(Index p) {
  ComplexTensor b({p, p});
  for (Index j = 1; j < p; ++j) b.at({j - 1, j}) = std::sqrt(static_cast<double>(j));
  return b;
}

// Detector operator A = (b_S + b_L) / 2 on a short/long sub-bin pair, and
// the coincidence observable O = A^dagger A, as a (p,p,p,p) tensor with
// axes (out_S, out_L, in_S, in_L).
ComplexTensor detector_observable(Index p) {
  const ComplexTensor b = annihilation(p);
  const ComplexTensor id = ComplexTensor::identity(p);
  ComplexTensor a({p * p, p * p});
  for (Index os = 0; os < p; ++os)
    for (Index ol = 0; ol < p; ++ol)
      for (Index is = 0; is < p; ++is)
        for (Index il = 0; il < p; ++il) {
          const cplx v = 0.5 * (b.at({os, is}) * id.at({ol, il}) + id.at({os, is}) * b.at({ol, il}));
          a.at({os * p + ol, is * p + il}) = v;
        }
  ComplexTensor o({p * p, p * p});
  for (Index r = 0; r < p * p; ++r)
    for (Index c = 0; c < p * p; ++c) {
      cplx acc = 0.0;
      for (Index q = 0; q < p * p; ++q) acc += std::conj(a.at({q, r})) * a.at({q, c});
      o.at({r, c}) = acc;
    }
  return o.reshaped({p, p, p, p});
}

// Environment E_{l ket, l' bra} advanced past one site. Everything stays in
// row-major matricizations (no axis permutations): with the site viewed as
// (l x pr) and (lp x r), the update is two plain matrix products.
ComplexTensor transfer_identity(const ComplexTensor& e, const ComplexTensor& site) {
  const Index l = site.dim(0), p = site.dim(1), r = site.dim(2);
  ConstMapMat me(e.data().data(), l, l);             // (l ket, l' bra)
  ConstMapMat ms_lr(site.data().data(), l, p * r);
  MatrixXc tmp = me.transpose() * ms_lr;             // (l', p*r)
  ConstMapMat mt(tmp.data(), l * p, r);
  ConstMapMat ms_br(site.data().data(), l * p, r);
  ComplexTensor out({r, r});
  MapMat mo(out.data().data(), r, r);
  mo.noalias() = mt.transpose() * ms_br.conjugate();  // (r ket, r' bra)
  return out;
}

// Environment advanced past a sub-bin pair with the two-site observable
// applied on the ket layer. op has axes (out_S, out_L, in_S, in_L).
ComplexTensor transfer_observable(const ComplexTensor& e, const ComplexTensor& s1,
                                  const ComplexTensor& s2, const ComplexTensor& op) {
  const Index l = s1.dim(0), p = s1.dim(1), b = s1.dim(2), r = s2.dim(2);
  const Index pp = p * p;
  // theta(l, pS, pL, r) = sum_b s1(l, pS, b) s2(b, pL, r)
  ConstMapMat m1(s1.data().data(), l * p, b);
  ConstMapMat m2(s2.data().data(), b, p * r);
  MatrixXc theta = m1 * m2;                           // (l*pS, pL*r)
  // ket layer: apply op over the combined (pS, pL) index of theta.
  // ket(l, oSoL, r) = sum_{iSiL} op(oSoL, iSiL) theta(l, iSiL, r)
  ConstMapMat mop(op.data().data(), pp, pp);
  MatrixXc ket(l * pp, r);
  for (Index li = 0; li < l; ++li) {
    ConstMapMat th_i(theta.data() + li * pp * r, pp, r);
    MapMat ket_i(ket.data() + li * pp * r, pp, r);
    ket_i.noalias() = mop * th_i;
  }
  // advance the environment along the ket layer, close with conj(theta).
  ConstMapMat me(e.data().data(), l, l);
  Eigen::Map<MatrixXc> ket_lr(ket.data(), l, pp * r);
  MatrixXc tmp = me.transpose() * ket_lr;             // (l', pS*pL*r)
  Eigen::Map<MatrixXc> tmp_flat(tmp.data(), l * pp, r);
  Eigen::Map<MatrixXc> theta_flat(theta.data(), l * pp, r);
  ComplexTensor out({r, r});
  MapMat mo(out.data().data(), r, r);
  mo.noalias() = tmp_flat.transpose() * theta_flat.conjugate();  // (r ket, r' bra)
  return out;
}

cplx close_environment(const ComplexTensor& e, const ComplexTensor& r_env) {
  return contract(e, r_env, {{0, 0}, {1, 1}}).data()[0];
}

// Left-canonical copy of the chain plus cached right environments:
// r_envs[pos] sums out all sites at >= pos (r_envs[size] = scalar 1).
struct Prepared {
  std::vector<ComplexTensor> sites;
  std::vector<ComplexTensor> r_envs;
  std::vector<Index> pair_pos;  // pair_pos[4*... ] unused; see slot_pos
  Index n_det = 0;
  Index p = 0;
  std::vector<Index> slot_pos;  // position of the ch1-S site of slot u
};

Prepared prepare(const BinChain& rearranged, const ModelParams& params) {
  BinChain chain = rearranged;
  const Index n = chain.size();
  if (n < 1) throw std::logic_error("g2: empty chain");
  chain.move_ortho(n - 1);
  const double nrm = chain.norm();
  if (nrm > 0.0) {
    // Work with the normalized state so that G2 is a proper density.
    ComplexTensor last = chain.site(n - 1);
    last *= cplx(1.0 / nrm, 0.0);
    // Rebuild through scale_physical is not applicable; copy sites below.
    Prepared prep;
    prep.n_det = detection_slots(params);
    prep.p = chain.bin_dim();
    prep.sites.reserve(static_cast<size_t>(n));
    for (Index i = 0; i < n; ++i) prep.sites.push_back(chain.site(i));
    prep.sites.back() = std::move(last);

    if (!chain.label(0).is_system) throw std::logic_error("g2: chain not rearranged (system not first)");
    prep.slot_pos.assign(static_cast<size_t>(prep.n_det), -1);
    for (Index pos = 1; pos < n; ++pos) {
      const SiteLabel& label = chain.label(pos);
      if (label.is_system) throw std::logic_error("g2: chain not rearranged");
      const int u = arrival_slot(label.bin, params);
      const int sub = (label.bin.channel == 1 ? 0 : 2) + (label.bin.path == Path::Long ? 1 : 0);
      if (u < 0 || u >= prep.n_det || pos != 1 + 4 * static_cast<Index>(u) + sub) {
        throw std::logic_error("g2: chain not rearranged (unexpected site order)");
      }
      if (sub == 0) prep.slot_pos[static_cast<size_t>(u)] = pos;
    }

    prep.r_envs.resize(static_cast<size_t>(n) + 1);
    prep.r_envs[static_cast<size_t>(n)] = ComplexTensor::identity(1);
    for (Index pos = n - 1; pos >= 0; --pos) {
      const ComplexTensor& t = prep.sites[static_cast<size_t>(pos)];
      ComplexTensor tmp = contract(t, prep.r_envs[static_cast<size_t>(pos) + 1], {{2, 0}});
      prep.r_envs[static_cast<size_t>(pos)] = contract(tmp, t.conj(), {{1, 1}, {2, 2}});
    }
    return prep;
  }
  throw std::logic_error("g2: zero-norm chain");
}

}  // namespace

G2Grid g2_two_time(const BinChain& rearranged, const ModelParams& params) {
  const Prepared prep = prepare(rearranged, params);
  const Index u_max = prep.n_det;
  const ComplexTensor obs = detector_observable(prep.p);
  const double scale = 1.0 / (params.dt * params.dt);

  G2Grid grid;
  grid.dt = params.dt;
  grid.n_det = u_max;
  grid.two_time.assign(static_cast<size_t>(u_max * u_max), 0.0);

  const double imag_tol = 1e-8;
  bool bad_imag = false;

#pragma omp parallel for schedule(dynamic) reduction(|| : bad_imag)
  for (Index a = 0; a < u_max; ++a) {
    const Index start = prep.slot_pos[static_cast<size_t>(a)];
    auto site = [&](Index pos) -> const ComplexTensor& {
      return prep.sites[static_cast<size_t>(pos)];
    };
    auto put = [&](Index j, Index k, cplx v) {
      if (std::abs(v.imag()) > imag_tol * std::max(1.0, std::abs(v.real()))) bad_imag = true;
      grid.two_time[static_cast<size_t>(j * u_max + k)] = v.real() * scale;
    };

    // Detector 1 fires in slot a; detector 2 in slot b >= a.
    {
      ComplexTensor e = ComplexTensor::identity(site(start).dim(0));
      e = transfer_observable(e, site(start), site(start + 1), obs);
      put(a, a, close_environment(transfer_observable(e, site(start + 2), site(start + 3), obs),
                                  prep.r_envs[static_cast<size_t>(start) + 4]));
      e = transfer_identity(e, site(start + 2));
      e = transfer_identity(e, site(start + 3));
      for (Index b = a + 1; b < u_max; ++b) {
        const Index pb = prep.slot_pos[static_cast<size_t>(b)];
        e = transfer_identity(e, site(pb));
        e = transfer_identity(e, site(pb + 1));
        put(a, b, close_environment(transfer_observable(e, site(pb + 2), site(pb + 3), obs),
                                    prep.r_envs[static_cast<size_t>(pb) + 4]));
        e = transfer_identity(e, site(pb + 2));
        e = transfer_identity(e, site(pb + 3));
      }
    }

    // Detector 2 fires in slot a; detector 1 in slot b > a.
    {
      ComplexTensor e = ComplexTensor::identity(site(start).dim(0));
      e = transfer_identity(e, site(start));
      e = transfer_identity(e, site(start + 1));
      e = transfer_observable(e, site(start + 2), site(start + 3), obs);
      for (Index b = a + 1; b < u_max; ++b) {
        const Index pb = prep.slot_pos[static_cast<size_t>(b)];
        put(b, a, close_environment(transfer_observable(e, site(pb), site(pb + 1), obs),
                                    prep.r_envs[static_cast<size_t>(pb) + 2]));
        e = transfer_identity(e, site(pb));
        e = transfer_identity(e, site(pb + 1));
        e = transfer_identity(e, site(pb + 2));
        e = transfer_identity(e, site(pb + 3));
      }
    }
  }

  if (bad_imag) throw std::runtime_error("g2_two_time: correlation has a non-real value");
  return grid;
}

G2Grid g2_two_time_serial(const BinChain& rearranged, const ModelParams& params) {
  const Prepared prep = prepare(rearranged, params);
  const Index u_max = prep.n_det;
  const Index n = static_cast<Index>(prep.sites.size());
  const ComplexTensor obs = detector_observable(prep.p);
  const double scale = 1.0 / (params.dt * params.dt);

  G2Grid grid;
  grid.dt = params.dt;
  grid.n_det = u_max;
  grid.two_time.assign(static_cast<size_t>(u_max * u_max), 0.0);

  for (Index j = 0; j < u_max; ++j) {
    for (Index k = 0; k < u_max; ++k) {
      const Index p1 = prep.slot_pos[static_cast<size_t>(j)];      // ch1 pair of slot j
      const Index p2 = prep.slot_pos[static_cast<size_t>(k)] + 2;  // ch2 pair of slot k
      ComplexTensor e = ComplexTensor::identity(1);
      Index pos = 0;
      while (pos < n) {
        if (pos == p1 || pos == p2) {
          e = transfer_observable(e, prep.sites[static_cast<size_t>(pos)],
                                  prep.sites[static_cast<size_t>(pos + 1)], obs);
          pos += 2;
        } else {
          e = transfer_identity(e, prep.sites[static_cast<size_t>(pos)]);
          pos += 1;
        }
      }
      const cplx v = e.at({0, 0});
      grid.two_time[static_cast<size_t>(j * u_max + k)] = v.real() * scale;
    }
  }
  return grid;
}

std::vector<double> g2_tau(const G2Grid& grid) {
  const Index u = grid.n_det;
  std::vector<double> curve(static_cast<size_t>(2 * u - 1), 0.0);
  for (Index d = -(u - 1); d <= u - 1; ++d) {
    double acc = 0.0;
    const Index j_lo = std::max<Index>(0, -d);
    const Index j_hi = std::min<Index>(u - 1, u - 1 - d);
    for (Index j = j_lo; j <= j_hi; ++j) acc += grid.at(j, j + d);
    curve[static_cast<size_t>(u - 1 + d)] = grid.dt * acc;
  }
  return curve;
}

double central_peak_height(const std::vector<double>& curve, const ModelParams& params) {
  if (curve.empty() || curve.size() % 2 == 0) {
    throw std::invalid_argument("central_peak_height: curve length must be odd");
  }
  const Index u = (static_cast<Index>(curve.size()) + 1) / 2;
  const Index center = u - 1;
  // The tau = 0 grid cell holds the same-slot coincidence (an ordered
  // integral over the triangle t2 > t1 of one cell), which undercounts the
  // tau -> 0+ branch value; the first full cell to its right is the faithful
  // discrete stand-in for the central-peak height.
  if (!params.feedback_enabled) {
    if (center + 1 >= static_cast<Index>(curve.size())) {
      throw std::invalid_argument("central_peak_height: curve too short");
    }
    return curve[static_cast<size_t>(center + 1)];
  }
  // With feedback the interference peak sits at tau = -tau_fb; allow a
  // two-step search window around it.
  double best = 0.0;
  bool any = false;
  for (Index d = -params.m - 2; d <= -params.m + 2; ++d) {
    const Index idx = center + d;
    if (idx < 0 || idx >= static_cast<Index>(curve.size())) continue;
    best = any ? std::max(best, curve[static_cast<size_t>(idx)]) : curve[static_cast<size_t>(idx)];
    any = true;
  }
  if (!any) throw std::invalid_argument("central_peak_height: curve too short for feedback window");
  return best;
}

double visibility_from_chain(const BinChain& final_chain, const ModelParams& params) {
  double h[2] = {0.0, 0.0};
  const double phases[2] = {0.0, std::numbers::pi / 2.0};
  for (int i = 0; i < 2; ++i) {
    ModelParams p = params;
    p.phi_t = phases[i];
    const BinChain det = rearrange_for_detection(final_chain, p);
    h[i] = central_peak_height(g2_tau(g2_two_time(det, p)), p);
  }
  const double denom = h[0] + h[1];
  if (denom <= 0.0 || !std::isfinite(denom)) {
    throw std::runtime_error("visibility: degenerate peak heights");
  }
  return (h[0] - h[1]) / denom;
}

double visibility(const ModelParams& params) {
  return visibility_from_chain(evolve(params).final_chain, params);
}

namespace {

// Visibility at one sweep point, extending t_max until the system has
// decayed to the residual target.
double sweep_point(const SweepSpec& spec, double ga, double gb, bool feedback) {
  ModelParams p;
  p.gamma_a = ga;  // time unit: T = 1
  p.gamma_b = gb;
  p.dt = spec.dt_over_T;
  p.n_t = static_cast<int>(std::llround(1.0 / spec.dt_over_T));
  p.feedback_enabled = feedback;
  p.truncation = spec.truncation;
  if (feedback) {
    p.m = static_cast<int>(std::llround(spec.fb_delay_over_T / spec.dt_over_T));
    p.phi_fb = spec.phi_fb;
  }
  const double decay = std::min(ga, gb);
  int n_steps = static_cast<int>(std::ceil(12.0 / (decay * p.dt)));
  n_steps = std::max(n_steps, 2 * p.n_t + 2 * std::max(p.m, 1));
  for (int attempt = 0; attempt < 8; ++attempt) {
    p.n_steps = n_steps;
    EvolutionRecord rec = evolve(validate(p));
    if (excitation_residual(rec) <= spec.residual_target) {
      return visibility_from_chain(rec.final_chain, p);
    }
    n_steps = static_cast<int>(std::ceil(1.5 * n_steps));
  }
  throw std::runtime_error("visibility_sweep: residual target not reached");
}

}  // namespace

VisibilityMap visibility_sweep(const SweepSpec& spec) {
  const Index na = static_cast<Index>(spec.gamma_a_T.size());
  const Index nb = static_cast<Index>(spec.gamma_b_T.size());
  if (na == 0 || nb == 0) throw std::invalid_argument("visibility_sweep: empty grid");

  VisibilityMap map;
  map.gamma_a_T = spec.gamma_a_T;
  map.gamma_b_T = spec.gamma_b_T;
  map.fb_delay_over_T = spec.fb_delay_over_T;
  map.v_no_fb.assign(static_cast<size_t>(na * nb), 0.0);
  map.v_fb.assign(static_cast<size_t>(na * nb), 0.0);
  map.errors.assign(static_cast<size_t>(na * nb), std::string{});

#pragma omp parallel for collapse(2) schedule(dynamic)
  for (Index ia = 0; ia < na; ++ia) {
    for (Index ib = 0; ib < nb; ++ib) {
      const size_t idx = static_cast<size_t>(ia * nb + ib);
      try {
        map.v_no_fb[idx] = sweep_point(spec, spec.gamma_a_T[static_cast<size_t>(ia)],
                                       spec.gamma_b_T[static_cast<size_t>(ib)], false);
        map.v_fb[idx] = sweep_point(spec, spec.gamma_a_T[static_cast<size_t>(ia)],
                                    spec.gamma_b_T[static_cast<size_t>(ib)], true);
      } catch (const std::exception& ex) {
        map.errors[idx] = ex.what();
      }
    }
  }
  return map;
}

}  // namespace franson
