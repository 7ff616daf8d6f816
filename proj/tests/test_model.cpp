#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "franson/model.hpp"

using namespace franson;

namespace {

// Flat index into the gate matrix for the given per-site physical levels,
// ordered as gate.sites (slowest first).
Index gate_index(const StroboscopicGate& g, const std::vector<Index>& levels) {
  REQUIRE(levels.size() == g.sites.size());
  Index flat = 0;
  for (size_t i = 0; i < levels.size(); ++i) {
    const Index d = g.sites[i] == GateSiteRole::System ? kSystemDim : 2;
    flat = flat * d + levels[i];
  }
  return flat;
}

Index role_pos(const StroboscopicGate& g, GateSiteRole role) {
  for (size_t i = 0; i < g.sites.size(); ++i) {
    if (g.sites[i] == role) return static_cast<Index>(i);
  }
  FAIL("role not present");
  return -1;
}

double unitarity_defect(const ComplexTensor& u) {
  const ComplexTensor uhu = contract(u.conj(), u, {{0, 0}});
  double defect = 0.0;
  const Index n = u.dim(0);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const cplx want = i == j ? 1.0 : 0.0;
      defect = std::max(defect, std::abs(uhu.at({i, j}) - want));
    }
  return defect;
}

ModelParams base_params() {
  ModelParams p;
  p.gamma_a = 1.0;
  p.gamma_b = 1.0;
  p.dt = 0.05;
  p.n_steps = 20;
  p.n_t = 2;
  return p;
}

}  // namespace

TEST_CASE("validate accepts the feedback reference setup") {
  ModelParams p = base_params();
  p.feedback_enabled = true;
  p.m = 20;
  CHECK_NOTHROW(validate(p));
}

TEST_CASE("validate names each violated invariant") {
  ModelParams p = base_params();
  p.dt = 0.0;
  CHECK_THROWS_WITH_AS(validate(p), doctest::Contains("dt must be positive"),
                       std::invalid_argument);
  p = base_params();
  p.feedback_enabled = true;
  p.m = 0;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = base_params();
  p.dt = 0.5;  // gamma*dt too coarse
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = base_params();
  p.dt = -1.0;
  p.gamma_a = -2.0;
  p.n_t = 0;
  try {
    validate(p);
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& ex) {
    const std::string msg = ex.what();
    CHECK(msg.find("dt") != std::string::npos);
    CHECK(msg.find("gamma_a") != std::string::npos);
    CHECK(msg.find("n_t") != std::string::npos);
  }
}

TEST_CASE("validate wraps phases into [0, 2pi)") {
  ModelParams p = base_params();
  p.phi_t = -std::numbers::pi;
  p.phi_fb = 5.0 * std::numbers::pi;
  const ModelParams v = validate(p);
  CHECK(v.phi_t == doctest::Approx(std::numbers::pi));
  CHECK(v.phi_fb == doctest::Approx(std::numbers::pi));
}

TEST_CASE("gates are unitary in both modes") {
  ModelParams p = validate(base_params());
  CHECK(unitarity_defect(build_gate(p).matrix) <= 1e-12);
  p.feedback_enabled = true;
  p.m = 4;
  p = validate(p);
  const StroboscopicGate g = build_gate(p);
  CHECK(g.n_sites() == 7);
  CHECK(unitarity_defect(g.matrix) <= 1e-12);
}

TEST_CASE("no-feedback gate has five legs in chain order") {
  const StroboscopicGate g = build_gate(validate(base_params()));
  REQUIRE(g.n_sites() == 5);
  CHECK(g.sites[0] == GateSiteRole::System);
  CHECK(g.sites[1] == GateSiteRole::Current1Short);
  CHECK(g.sites[2] == GateSiteRole::Current1Long);
  CHECK(g.sites[3] == GateSiteRole::Current2Short);
  CHECK(g.sites[4] == GateSiteRole::Current2Long);
}

TEST_CASE("decoupled channel 1 stays untouched when gamma_a is zero") {
  ModelParams p = base_params();
  p.gamma_a = 1e-300;  // rates must be positive; this is numerically zero
  const StroboscopicGate g = build_gate(validate(p));
  // <vac, 1 photon in any channel-1 sub-bin | U | vac, vac> = 0 and the
  // channel-1 diagonal block is the identity.
  const Index n = g.matrix.dim(0);
  for (Index row = 0; row < n; ++row) {
    for (Index col = 0; col < n; ++col) {
      // Decode channel-1 occupations of row and col.
      const Index d1s = role_pos(g, GateSiteRole::Current1Short);
      const Index d1l = role_pos(g, GateSiteRole::Current1Long);
      auto digit = [&](Index flat, Index pos) {
        Index rest = flat;
        std::vector<Index> digits(g.sites.size());
        for (size_t i = g.sites.size(); i-- > 0;) {
          const Index d = g.sites[i] == GateSiteRole::System ? kSystemDim : 2;
          digits[i] = rest % d;
          rest /= d;
        }
        return digits[static_cast<size_t>(pos)];
      };
      if (digit(row, d1s) != digit(col, d1s) || digit(row, d1l) != digit(col, d1l)) {
        CHECK(std::abs(g.matrix.at({row, col})) <= 1e-12);
      }
    }
  }
}

TEST_CASE("first-order emission amplitudes carry the configured rates") {
  ModelParams p = base_params();
  p.dt = 0.01;
  SUBCASE("no feedback: sqrt(gamma_a dt / 2) per sub-bin") {
    const StroboscopicGate g = build_gate(validate(p));
    const Index row = gate_index(g, {kLevelB, 1, 0, 0, 0});
    const Index col = gate_index(g, {kLevelA, 0, 0, 0, 0});
    const double want = std::sqrt(p.gamma_a * p.dt / 2.0);
    CHECK(std::abs(g.matrix.at({row, col})) ==
          doctest::Approx(want).epsilon(2.0 * p.gamma_a * p.dt));
    // channel 2 from |b>: sqrt(gamma_b dt / 2)
    const Index row2 = gate_index(g, {kLevelC, 0, 0, 1, 0});
    const Index col2 = gate_index(g, {kLevelB, 0, 0, 0, 0});
    CHECK(std::abs(g.matrix.at({row2, col2})) ==
          doctest::Approx(std::sqrt(p.gamma_b * p.dt / 2.0)).epsilon(2.0 * p.gamma_b * p.dt));
  }
  SUBCASE("feedback: sqrt(gamma_a dt) / 2 per sub-bin") {
    p.feedback_enabled = true;
    p.m = 4;
    const StroboscopicGate g = build_gate(validate(p));
    REQUIRE(g.n_sites() == 7);
    // order: fb1S, fb1L, system, cur1S, cur1L, cur2S, cur2L
    const Index row = gate_index(g, {0, 0, kLevelB, 1, 0, 0, 0});
    const Index col = gate_index(g, {0, 0, kLevelA, 0, 0, 0, 0});
    const double want = std::sqrt(p.gamma_a * p.dt) / 2.0;
    CHECK(std::abs(g.matrix.at({row, col})) ==
          doctest::Approx(want).epsilon(2.0 * p.gamma_a * p.dt));
  }
}

TEST_CASE("gate is 2pi-periodic in the feedback phase") {
  ModelParams p = base_params();
  p.feedback_enabled = true;
  p.m = 4;
  p.phi_fb = 0.0;
  const StroboscopicGate g0 = build_gate(validate(p));
  p.phi_fb = 2.0 * std::numbers::pi - 1e-15;
  const StroboscopicGate g2pi = build_gate(validate(p));
  double diff = 0.0;
  for (size_t i = 0; i < g0.matrix.data().size(); ++i) {
    diff = std::max(diff, std::abs(g0.matrix.data()[i] - g2pi.matrix.data()[i]));
  }
  CHECK(diff <= 1e-12);
}

TEST_CASE("expected_label resolves roles for a given step") {
  ModelParams p = base_params();
  p.feedback_enabled = true;
  p.m = 4;
  p = validate(p);
  const SiteLabel fb = expected_label(GateSiteRole::Feedback1Short, p, 10);
  CHECK(!fb.is_system);
  CHECK(fb.bin.channel == 1);
  CHECK(fb.bin.path == Path::Short);
  CHECK(fb.bin.step == 6);
  const SiteLabel cur = expected_label(GateSiteRole::Current2Long, p, 10);
  CHECK(cur.bin.channel == 2);
  CHECK(cur.bin.path == Path::Long);
  CHECK(cur.bin.step == 10);
  CHECK(expected_label(GateSiteRole::System, p, 3).is_system);
}

TEST_CASE("new chain primes the feedback loop with vacuum pairs") {
  ModelParams p = base_params();
  p.feedback_enabled = true;
  p.m = 3;
  BinChain c = new_chain(validate(p));
  CHECK(c.size() == 1 + 2 * 3);
  CHECK(c.norm() == doctest::Approx(1.0));
  CHECK(c.local_expectation(c.system_pos(), system_projector(kLevelA)).real() ==
        doctest::Approx(1.0));
  for (Index pos = 0; pos < c.size(); ++pos) {
    if (c.label(pos).is_system) continue;
    CHECK(c.label(pos).bin.channel == 1);
    CHECK(std::abs(c.local_expectation(pos, number_operator(2))) < 1e-14);
  }
}

TEST_CASE("no-feedback chain has no pad bins") {
  BinChain c = new_chain(validate(base_params()));
  CHECK(c.size() == 1);
}

TEST_CASE("photon cutoff sets every bin dimension") {
  ModelParams p = base_params();
  p.photon_cutoff = 3;
  BinChain c = new_chain(validate(p));
  CHECK(c.bin_dim() == 3);
}
