#include "franson/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace franson {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_phase(double phi) {
  double w = std::fmod(phi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w;
}

ComplexTensor kron(const ComplexTensor& a, const ComplexTensor& b) {
  const Index ar = a.dim(0), ac = a.dim(1), br = b.dim(0), bc = b.dim(1);
  ComplexTensor out({ar * br, ac * bc});
  for (Index i = 0; i < ar; ++i) {
    for (Index j = 0; j < ac; ++j) {
      const cplx av = a.at({i, j});
      if (av == cplx{}) continue;
      for (Index k = 0; k < br; ++k) {
        for (Index l = 0; l < bc; ++l) {
          out.at({i * br + k, j * bc + l}) = av * b.at({k, l});
        }
      }
    }
  }
  return out;
}

// Operator acting as `op` on one leg and identity elsewhere.
ComplexTensor embed(const std::vector<Index>& dims, size_t leg, const ComplexTensor& op) {
  ComplexTensor out = ComplexTensor::identity(1);
  for (size_t i = 0; i < dims.size(); ++i) {
    out = kron(out, i == leg ? op : ComplexTensor::identity(dims[i]));
  }
  return out;
}

ComplexTensor annihilation(Index p) {
  ComplexTensor b({p, p});
  for (Index n = 1; n < p; ++n) b.at({n - 1, n}) = std::sqrt(static_cast<double>(n));
  return b;
}

ComplexTensor matrix_unit(Index n, Index i, Index j) {
  ComplexTensor e({n, n});
  e.at({i, j}) = 1.0;
  return e;
}

void add_scaled(ComplexTensor& acc, const ComplexTensor& t, cplx factor) {
  for (Index i = 0; i < acc.size(); ++i) {
    acc.data()[static_cast<size_t>(i)] += factor * t.data()[static_cast<size_t>(i)];
  }
}

ComplexTensor dagger(const ComplexTensor& m) {
  ComplexTensor out({m.dim(1), m.dim(0)});
  for (Index i = 0; i < m.dim(0); ++i) {
    for (Index j = 0; j < m.dim(1); ++j) {
      out.at({j, i}) = std::conj(m.at({i, j}));
    }
  }
  return out;
}

}  // namespace

ModelParams validate(const ModelParams& raw) {
  std::vector<std::string> errors;
  if (!(raw.gamma_a > 0.0)) errors.push_back("gamma_a must be positive");
  if (!(raw.gamma_b > 0.0)) errors.push_back("gamma_b must be positive");
  if (!(raw.dt > 0.0)) errors.push_back("dt must be positive");
  if (raw.n_steps < 0) errors.push_back("n_steps must be nonnegative");
  if (raw.feedback_enabled && raw.m < 1) {
    errors.push_back("m must be >= 1 when feedback is enabled");
  }
  if (raw.m < 0) errors.push_back("m must be nonnegative");
  if (raw.n_t < 1) errors.push_back("n_t must be >= 1");
  if (raw.gamma_a * raw.dt > 0.25) {
    errors.push_back("gamma_a*dt must be <= 0.25 (discretization sanity bound)");
  }
  if (raw.gamma_b * raw.dt > 0.25) {
    errors.push_back("gamma_b*dt must be <= 0.25 (discretization sanity bound)");
  }
  if (raw.photon_cutoff < 2) errors.push_back("photon_cutoff must be >= 2");
  if (!(raw.truncation.epsilon >= 0.0)) errors.push_back("epsilon must be >= 0");
  if (raw.truncation.max_bond && *raw.truncation.max_bond < 1) {
    errors.push_back("max_bond must be >= 1");
  }
  if (!errors.empty()) {
    std::string msg = "invalid parameters:";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw std::invalid_argument(msg);
  }
  ModelParams ok = raw;
  ok.phi_fb = wrap_phase(raw.phi_fb);
  ok.phi_t = wrap_phase(raw.phi_t);
  return ok;
}

StroboscopicGate build_gate(const ModelParams& params) {
  const Index p = params.photon_cutoff;
  if (p < 2 && (params.gamma_a > 0.0 || params.gamma_b > 0.0)) {
    throw std::invalid_argument("build_gate: photon cutoff too small for emission");
  }

  StroboscopicGate gate;
  if (params.feedback_enabled) {
    gate.sites = {GateSiteRole::Feedback1Short, GateSiteRole::Feedback1Long,
                  GateSiteRole::System,         GateSiteRole::Current1Short,
                  GateSiteRole::Current1Long,   GateSiteRole::Current2Short,
                  GateSiteRole::Current2Long};
  } else {
    gate.sites = {GateSiteRole::System, GateSiteRole::Current1Short,
                  GateSiteRole::Current1Long, GateSiteRole::Current2Short,
                  GateSiteRole::Current2Long};
  }

  std::vector<Index> dims;
  size_t sys_leg = 0;
  for (size_t i = 0; i < gate.sites.size(); ++i) {
    if (gate.sites[i] == GateSiteRole::System) {
      dims.push_back(kSystemDim);
      sys_leg = i;
    } else {
      dims.push_back(p);
    }
  }
  Index total = 1;
  for (Index d : dims) total *= d;

  const ComplexTensor b = annihilation(p);
  const ComplexTensor sp1 = matrix_unit(kSystemDim, kLevelA, kLevelB);  // |a><b|
  const ComplexTensor sp2 = matrix_unit(kSystemDim, kLevelB, kLevelC);  // |b><c|
  const ComplexTensor sys_up1 = embed(dims, sys_leg, sp1);
  const ComplexTensor sys_up2 = embed(dims, sys_leg, sp2);

  auto leg_of = [&](GateSiteRole role) {
    for (size_t i = 0; i < gate.sites.size(); ++i) {
      if (gate.sites[i] == role) return i;
    }
    throw std::logic_error("build_gate: missing role");
  };

  // Per sub-bin emission amplitudes. The feedback coupling addresses two
  // increment pairs (current and returning) at once, so its sub-bin weight
  // carries an extra 1/sqrt(2) to keep the physical decay rate gamma_a.
  const double w1 = params.feedback_enabled
                        ? std::sqrt(params.gamma_a * params.dt) / 2.0
                        : std::sqrt(params.gamma_a * params.dt / 2.0);
  const double w2 = std::sqrt(params.gamma_b * params.dt / 2.0);

  // K1 = sigma_+^(1) (x) [w1 (b_c1S + b_c1L) - w1 e^{i phi} (b_fS + b_fL)]
  ComplexTensor k1({total, total});
  {
    ComplexTensor mode({total, total});
    add_scaled(mode, embed(dims, leg_of(GateSiteRole::Current1Short), b), w1);
    add_scaled(mode, embed(dims, leg_of(GateSiteRole::Current1Long), b), w1);
    if (params.feedback_enabled) {
      const cplx ph = -w1 * std::exp(cplx(0.0, params.phi_fb));
      add_scaled(mode, embed(dims, leg_of(GateSiteRole::Feedback1Short), b), ph);
      add_scaled(mode, embed(dims, leg_of(GateSiteRole::Feedback1Long), b), ph);
    }
    k1 = contract(sys_up1, mode, {{1, 0}});
  }
  ComplexTensor k2({total, total});
  {
    ComplexTensor mode({total, total});
    add_scaled(mode, embed(dims, leg_of(GateSiteRole::Current2Short), b), w2);
    add_scaled(mode, embed(dims, leg_of(GateSiteRole::Current2Long), b), w2);
    k2 = contract(sys_up2, mode, {{1, 0}});
  }

  ComplexTensor gen({total, total});
  if (params.feedback_enabled) {
    // sqrt(Ga)[sp (dR_k - dR_{k-m} e^{i phi}) - h.c.] - i sqrt(Gb)[sp2 dR2 + h.c.]
    add_scaled(gen, k1, 1.0);
    add_scaled(gen, dagger(k1), -1.0);
  } else {
    add_scaled(gen, k1, cplx(0.0, -1.0));
    add_scaled(gen, dagger(k1), cplx(0.0, -1.0));
  }
  add_scaled(gen, k2, cplx(0.0, -1.0));
  add_scaled(gen, dagger(k2), cplx(0.0, -1.0));

  gate.matrix = expm_antihermitian(gen);
  return gate;
}

SiteLabel expected_label(GateSiteRole role, const ModelParams& params, int step) {
  switch (role) {
    case GateSiteRole::System:
      return SiteLabel::system();
    case GateSiteRole::Feedback1Short:
      return SiteLabel::of({1, Path::Short, step - params.m, BinKind::Emission});
    case GateSiteRole::Feedback1Long:
      return SiteLabel::of({1, Path::Long, step - params.m, BinKind::Emission});
    case GateSiteRole::Current1Short:
      return SiteLabel::of({1, Path::Short, step, BinKind::Emission});
    case GateSiteRole::Current1Long:
      return SiteLabel::of({1, Path::Long, step, BinKind::Emission});
    case GateSiteRole::Current2Short:
      return SiteLabel::of({2, Path::Short, step, BinKind::Emission});
    case GateSiteRole::Current2Long:
      return SiteLabel::of({2, Path::Long, step, BinKind::Emission});
  }
  throw std::logic_error("expected_label: bad role");
}

BinChain new_chain(const ModelParams& params) {
  BinChain chain(kSystemDim, params.photon_cutoff, kLevelA, params.truncation);
  if (params.feedback_enabled) {
    // Vacuum pairs priming the empty loop, oldest leftmost, system at the
    // right end. They become real output once the loop reuses them.
    for (int j = -params.m; j < 0; ++j) {
      chain.insert_vacuum_bin(chain.size() - 1, {1, Path::Short, j, BinKind::Emission});
      chain.insert_vacuum_bin(chain.size() - 1, {1, Path::Long, j, BinKind::Emission});
    }
  }
  return chain;
}

ComplexTensor system_projector(int level) {
  ComplexTensor proj({kSystemDim, kSystemDim});
  proj.at({level, level}) = 1.0;
  return proj;
}

ComplexTensor number_operator(Index p) {
  ComplexTensor n({p, p});
  for (Index i = 0; i < p; ++i) n.at({i, i}) = static_cast<double>(i);
  return n;
}

}  // namespace franson
