#pragma once

#include <string>
#include <vector>

#include "franson/tensor.hpp"

namespace franson {

enum class Path { Short, Long };
enum class BinKind { Emission, VacuumPad };

/// Identity of a photon time bin. step may be negative for the vacuum bins
/// that prime an initially empty feedback loop.
struct BinLabel {
  int channel = 1;  // 1 = a<->b photon (detector 1), 2 = b<->c photon (detector 2)
  Path path = Path::Short;
  int step = 0;
  BinKind kind = BinKind::Emission;

  bool operator==(const BinLabel&) const = default;
};

/// One chain position is either the three-level system or a time bin.
struct SiteLabel {
  bool is_system = false;
  BinLabel bin{};

  static SiteLabel system() { return SiteLabel{true, {}}; }
  static SiteLabel of(BinLabel b) { return SiteLabel{false, b}; }
  bool operator==(const SiteLabel&) const = default;
};

std::string to_string(const SiteLabel& label);

/// MPS over one system site and a sequence of photon time bins. Site tensors
/// carry (left bond, physical, right bond) axes. The orthogonality center is
/// tracked explicitly and moved lazily.
class BinChain {
 public:
  /// Chain holding only the system site in the pure state |level>.
  BinChain(Index system_dim, Index bin_dim, int initial_level, TruncationPolicy policy);

  Index size() const { return static_cast<Index>(sites_.size()); }
  Index bin_dim() const { return bin_dim_; }
  const TruncationPolicy& policy() const { return policy_; }

  const SiteLabel& label(Index pos) const { return labels_[static_cast<size_t>(pos)]; }
  const ComplexTensor& site(Index pos) const { return sites_[static_cast<size_t>(pos)]; }
  Index system_pos() const;
  Index ortho_center() const { return ortho_; }

  /// Position of the bin with the given label, or -1.
  Index find(const BinLabel& label) const;

  /// Insert a fresh vacuum bin at position pos (existing sites at >= pos
  /// shift right). Bond dimensions are unchanged.
  void insert_vacuum_bin(Index pos, const BinLabel& label);

  void move_ortho(Index pos);

  /// Exchange the physical contents and labels of sites pos and pos+1 via
  /// two-site recombination and svd_split.
  void swap_adjacent(Index pos);

  /// Move the site at from_pos to to_pos through adjacent swaps.
  void move_bin(Index from_pos, Index to_pos);

  /// Apply a unitary over n_sites consecutive sites starting at first, then
  /// re-factorize, leaving the sites in the order given by out_order
  /// (a permutation of 0..n_sites-1 in terms of the input site order).
  /// matrix is (d^n x d^n) over the combined physical index, row-major with
  /// site `first` as the slowest sub-index.
  void apply_unitary(const ComplexTensor& matrix, Index first, Index n_sites,
                     const std::vector<Index>& out_order);

  /// <psi| O_pos |psi> for a single-site operator (matrix dim = physical
  /// dim). Moves the orthogonality center to pos.
  cplx local_expectation(Index pos, const ComplexTensor& op);

  /// Multiply the physical components of site pos by the given diagonal.
  void scale_physical(Index pos, const std::vector<cplx>& diag);

  double norm() const;
  void assert_finite(const char* context) const;

  std::vector<Index> bond_dims() const;
  Index max_bond_dim() const;
  double discarded_weight_total() const { return discarded_total_; }

  /// Labels, bond dimensions and norm as a JSON string (debug aid).
  std::string snapshot_json() const;

  /// Full state vector, physical indices in chain order (slowest first).
  /// Only for small chains in tests.
  ComplexTensor to_dense() const;

 private:
  void canonical_step_right(Index pos);  // ortho pos -> pos+1
  void canonical_step_left(Index pos);   // ortho pos -> pos-1

  std::vector<ComplexTensor> sites_;
  std::vector<SiteLabel> labels_;
  Index ortho_ = 0;
  Index bin_dim_ = 2;
  TruncationPolicy policy_{};
  double discarded_total_ = 0.0;
};

}  // namespace franson
