#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "franson/chain.hpp"
#include "franson/model.hpp"

using namespace franson;

namespace {

BinLabel bin(int channel, Path path, int step) {
  return BinLabel{channel, path, step, BinKind::Emission};
}

// |<a|b>| for two dense state vectors.
double fidelity(const ComplexTensor& a, const ComplexTensor& b) {
  REQUIRE(a.size() == b.size());
  cplx acc = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    acc += std::conj(a.data()[static_cast<size_t>(i)]) * b.data()[static_cast<size_t>(i)];
  }
  return std::abs(acc);
}

// Chain [system |a>, two vacuum bins], with an optional entangling rotation
// |00> -> cos t |00> + sin t |11> on the bins.
BinChain two_bin_chain(double theta) {
  BinChain c(kSystemDim, 2, kLevelA, {});
  c.insert_vacuum_bin(1, bin(1, Path::Short, 0));
  c.insert_vacuum_bin(2, bin(1, Path::Long, 0));
  if (theta != 0.0) {
    ComplexTensor g({4, 4});
    g.at({0, 3}) = theta;
    g.at({3, 0}) = -theta;
    c.apply_unitary(expm_antihermitian(g), 1, 2, {0, 1});
  }
  return c;
}

}  // namespace

TEST_CASE("fresh chain is the pure upper state") {
  BinChain c(kSystemDim, 2, kLevelA, {});
  CHECK(c.size() == 1);
  CHECK(c.norm() == doctest::Approx(1.0));
  CHECK(c.local_expectation(0, system_projector(kLevelA)).real() == doctest::Approx(1.0));
  CHECK(c.local_expectation(0, system_projector(kLevelB)).real() == doctest::Approx(0.0));
}

TEST_CASE("inserted vacuum bins carry no photons and unit bonds") {
  BinChain c(kSystemDim, 2, kLevelA, {});
  c.insert_vacuum_bin(0, bin(1, Path::Short, 0));
  c.insert_vacuum_bin(2, bin(2, Path::Short, 0));
  CHECK(c.size() == 3);
  CHECK(c.norm() == doctest::Approx(1.0));
  CHECK(std::abs(c.local_expectation(0, number_operator(2))) < 1e-14);
  CHECK(std::abs(c.local_expectation(2, number_operator(2))) < 1e-14);
  for (Index b : c.bond_dims()) CHECK(b == 1);
  CHECK(c.find(bin(2, Path::Short, 0)) == 2);
  CHECK(c.find(bin(2, Path::Long, 0)) == -1);
  CHECK_THROWS_AS(c.insert_vacuum_bin(1, bin(1, Path::Short, 0)), std::invalid_argument);
}

TEST_CASE("swapping vacuum bins keeps bond dimension one") {
  BinChain c = two_bin_chain(0.0);
  c.swap_adjacent(1);
  for (Index b : c.bond_dims()) CHECK(b == 1);
  CHECK(c.label(1).bin == bin(1, Path::Long, 0));
  CHECK(c.label(2).bin == bin(1, Path::Short, 0));
  CHECK(c.norm() == doctest::Approx(1.0));
}

TEST_CASE("swap twice restores an entangled pair") {
  BinChain c = two_bin_chain(0.4);
  const ComplexTensor before = c.to_dense();
  c.swap_adjacent(1);
  c.swap_adjacent(1);
  CHECK(c.label(1).bin == bin(1, Path::Short, 0));
  CHECK(fidelity(before, c.to_dense()) >= 1.0 - 1e-12);
}

TEST_CASE("swap preserves observables of an entangled pair") {
  BinChain c = two_bin_chain(0.4);
  const double n1 = c.local_expectation(1, number_operator(2)).real();
  const double n2 = c.local_expectation(2, number_operator(2)).real();
  CHECK(n1 == doctest::Approx(std::sin(0.4) * std::sin(0.4)));
  c.swap_adjacent(1);
  // Labels moved with the contents: the bin that had n1 sits at position 2.
  CHECK(c.local_expectation(2, number_operator(2)).real() == doctest::Approx(n1));
  CHECK(c.local_expectation(1, number_operator(2)).real() == doctest::Approx(n2));
  // The swap exchanges physical contents in the dense vector too.
  const ComplexTensor dense = c.to_dense();
  BinChain ref = two_bin_chain(0.4);
  const ComplexTensor ref_dense = ref.to_dense();  // (sys, b1, b2)
  const ComplexTensor swapped = ref_dense.reshaped({3, 2, 2}).permuted({0, 2, 1});
  CHECK(fidelity(dense, swapped.reshaped({12})) >= 1.0 - 1e-12);
}

TEST_CASE("move_bin there and back is the identity") {
  ModelParams p = validate({});
  BinChain c = two_bin_chain(0.7);
  c.insert_vacuum_bin(3, bin(2, Path::Short, 0));
  c.insert_vacuum_bin(4, bin(2, Path::Long, 0));
  const ComplexTensor before = c.to_dense();
  const std::vector<SiteLabel> labels_before = {c.label(0), c.label(1), c.label(2),
                                                c.label(3), c.label(4)};
  c.move_bin(1, 4);
  CHECK(c.label(4).bin == bin(1, Path::Short, 0));
  CHECK(c.label(1).bin == bin(1, Path::Long, 0));
  c.move_bin(4, 1);
  for (Index i = 0; i < 5; ++i) CHECK(c.label(i) == labels_before[static_cast<size_t>(i)]);
  CHECK(fidelity(before, c.to_dense()) >= 1.0 - 1e-12);
  CHECK(std::abs(c.norm() - 1.0) <= 1e-12 * 6);
}

TEST_CASE("identity gate leaves the state unchanged") {
  BinChain c = two_bin_chain(0.5);
  const ComplexTensor before = c.to_dense();
  c.apply_unitary(ComplexTensor::identity(4), 1, 2, {0, 1});
  CHECK(fidelity(before, c.to_dense()) >= 1.0 - 1e-12);
}

TEST_CASE("unitary gates preserve the norm") {
  BinChain c = two_bin_chain(0.3);
  ComplexTensor g({6, 6});
  for (Index i = 0; i < 6; ++i)
    for (Index j = i + 1; j < 6; ++j) {
      const double v = 0.1 * std::sin(static_cast<double>(3 * i + j));
      g.at({i, j}) = cplx(v, 0.5 * v);
      g.at({j, i}) = -std::conj(g.at({i, j}));
    }
  c.apply_unitary(expm_antihermitian(g), 0, 2, {0, 1});
  CHECK(c.norm() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("apply_unitary reorders sites via out_order") {
  BinChain c = two_bin_chain(0.4);
  const ComplexTensor before = c.to_dense();
  c.apply_unitary(ComplexTensor::identity(4), 1, 2, {1, 0});
  CHECK(c.label(1).bin == bin(1, Path::Long, 0));
  const ComplexTensor swapped = before.reshaped({3, 2, 2}).permuted({0, 2, 1});
  CHECK(fidelity(c.to_dense(), swapped.reshaped({12})) >= 1.0 - 1e-12);
}

TEST_CASE("local expectation is real for Hermitian operators") {
  BinChain c = two_bin_chain(0.9);
  const cplx v = c.local_expectation(1, number_operator(2));
  CHECK(std::abs(v.imag()) <= 1e-10);
  CHECK_THROWS_AS(c.local_expectation(1, number_operator(3)), std::invalid_argument);
}

TEST_CASE("scale_physical applies the inverse phase exactly") {
  BinChain c = two_bin_chain(0.6);
  const ComplexTensor before = c.to_dense();
  const cplx ph = std::exp(cplx(0.0, 1.1));
  c.scale_physical(1, {1.0, ph});
  c.scale_physical(1, {1.0, std::conj(ph)});
  CHECK(fidelity(before, c.to_dense()) >= 1.0 - 1e-12);
}

TEST_CASE("snapshot reports labels, bonds and norm") {
  BinChain c = two_bin_chain(0.2);
  const std::string s = c.snapshot_json();
  CHECK(s.find("SYSTEM") != std::string::npos);
  CHECK(s.find("ch1-S@0") != std::string::npos);
  CHECK(s.find("bond_dims") != std::string::npos);
}

TEST_CASE("repeated swaps keep norm and observables stable") {
  BinChain c = two_bin_chain(0.8);
  c.insert_vacuum_bin(3, bin(2, Path::Short, 0));
  c.insert_vacuum_bin(4, bin(2, Path::Long, 0));
  const double n_before = c.local_expectation(1, number_operator(2)).real();
  const BinLabel target = bin(1, Path::Short, 0);
  for (int rep = 0; rep < 20; ++rep) {
    c.move_bin(c.find(target), 4);
    c.move_bin(c.find(target), 1);
  }
  CHECK(std::abs(c.norm() - 1.0) <= 1e-10);
  CHECK(c.local_expectation(c.find(target), number_operator(2)).real() ==
        doctest::Approx(n_before).epsilon(1e-10));
}
