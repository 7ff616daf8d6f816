#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

namespace franson {

using cplx = std::complex<double>;
using Index = std::int64_t;

/// Truncation policy for svd_split. epsilon bounds the *relative 2-norm
/// error* of the truncation: the sum of squared dropped singular values may
/// not exceed epsilon^2 times the total squared Frobenius norm. max_bond
/// optionally caps the kept rank.
struct TruncationPolicy {
  double epsilon = 0.0;
  std::optional<Index> max_bond{};
};

/// Dense complex tensor in row-major order (first axis slowest, last axis
/// fastest). This layout is fixed once for the whole codebase so that every
/// reshape is pure index arithmetic and bit-stable.
class ComplexTensor {
 public:
  ComplexTensor() = default;
  explicit ComplexTensor(std::vector<Index> dims);
  ComplexTensor(std::vector<Index> dims, std::vector<cplx> data);

  static ComplexTensor identity(Index n);

  Index rank() const { return static_cast<Index>(dims_.size()); }
  Index dim(Index axis) const { return dims_[static_cast<size_t>(axis)]; }
  const std::vector<Index>& dims() const { return dims_; }
  Index size() const { return static_cast<Index>(data_.size()); }

  const std::vector<cplx>& data() const { return data_; }
  std::vector<cplx>& data() { return data_; }

  cplx at(const std::vector<Index>& idx) const;
  cplx& at(const std::vector<Index>& idx);

  /// Reshape without moving data. Product of new dims must match size().
  ComplexTensor reshaped(std::vector<Index> new_dims) const;

  /// Permute axes: result axis i is input axis order[i].
  ComplexTensor permuted(const std::vector<Index>& order) const;

  ComplexTensor conj() const;
  double norm() const;
  double max_abs() const;
  bool all_finite() const;

  ComplexTensor& operator*=(cplx factor);

 private:
  std::vector<Index> dims_;
  std::vector<cplx> data_;
};

/// Tensor contraction over the given (axis of a, axis of b) pairs.
/// Remaining axes are ordered a-then-b, each in original order.
ComplexTensor contract(const ComplexTensor& a, const ComplexTensor& b,
                       const std::vector<std::pair<Index, Index>>& axis_pairs);

struct SvdResult {
  ComplexTensor left;             // dims: left axes ..., bond
  std::vector<double> singulars;  // nonnegative, descending
  ComplexTensor right;            // dims: bond, right axes ...
  double discarded_weight = 0.0;  // relative squared Frobenius mass dropped
};

/// Split t into left * diag(singulars) * right across the bipartition given
/// by left_axes (the remaining axes form the right group, in original
/// order). Singular values below the relative numerical-rank floor
/// (1e-14 * s_max) are always dropped; at least one is kept.
SvdResult svd_split(const ComplexTensor& t, const std::vector<Index>& left_axes,
                    const TruncationPolicy& policy);

/// exp(g) for an anti-Hermitian square matrix g, computed by
/// eigendecomposition of the Hermitian matrix i*g. Result is unitary up to
/// round-off. Throws if g is not anti-Hermitian within tolerance.
ComplexTensor expm_antihermitian(const ComplexTensor& g);

}  // namespace franson
