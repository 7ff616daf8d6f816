#include "franson/tensor.hpp"

#include <Eigen/Dense>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace franson {

namespace {

using MatrixXc =
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<MatrixXc>;
using ConstMapMat = Eigen::Map<const MatrixXc>;

Index product(const std::vector<Index>& dims) {
  Index p = 1;
  for (Index d : dims) p *= d;
  return p;
}

// Relative floor below which singular values count as numerical zeros. They
// are dropped even at epsilon = 0; their squared mass (~1e-28 relative) is
// reported in discarded_weight.
constexpr double kRankFloor = 1e-14;

}  // namespace

ComplexTensor::ComplexTensor(std::vector<Index> dims)
    : dims_(std::move(dims)), data_(static_cast<size_t>(product(dims_))) {
  for (Index d : dims_) {
    if (d <= 0) throw std::invalid_argument("tensor axis length must be positive");
  }
}

ComplexTensor::ComplexTensor(std::vector<Index> dims, std::vector<cplx> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  for (Index d : dims_) {
    if (d <= 0) throw std::invalid_argument("tensor axis length must be positive");
  }
  if (product(dims_) != static_cast<Index>(data_.size())) {
    throw std::invalid_argument("tensor data length does not match dims");
  }
}

ComplexTensor ComplexTensor::identity(Index n) {
  ComplexTensor t({n, n});
  for (Index i = 0; i < n; ++i) t.data_[static_cast<size_t>(i * n + i)] = 1.0;
  return t;
}

cplx ComplexTensor::at(const std::vector<Index>& idx) const {
  return const_cast<ComplexTensor*>(this)->at(idx);
}

cplx& ComplexTensor::at(const std::vector<Index>& idx) {
  if (idx.size() != dims_.size()) throw std::invalid_argument("index rank mismatch");
  Index flat = 0;
  for (size_t i = 0; i < dims_.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= dims_[i]) throw std::out_of_range("tensor index");
    flat = flat * dims_[i] + idx[i];
  }
  return data_[static_cast<size_t>(flat)];
}

ComplexTensor ComplexTensor::reshaped(std::vector<Index> new_dims) const {
  if (product(new_dims) != size()) {
    throw std::invalid_argument("reshape size mismatch");
  }
  return ComplexTensor(std::move(new_dims), data_);
}

ComplexTensor ComplexTensor::permuted(const std::vector<Index>& order) const {
  const size_t r = dims_.size();
  if (order.size() != r) throw std::invalid_argument("permutation rank mismatch");
  std::vector<Index> new_dims(r);
  for (size_t i = 0; i < r; ++i) new_dims[i] = dims_[static_cast<size_t>(order[i])];

  // Strides of the input, then gather.
  std::vector<Index> in_strides(r, 1);
  for (size_t i = r; i-- > 1;) in_strides[i - 1] = in_strides[i] * dims_[i];
  std::vector<Index> gather_strides(r);
  for (size_t i = 0; i < r; ++i) gather_strides[i] = in_strides[static_cast<size_t>(order[i])];

  ComplexTensor out(new_dims);
  const Index n = size();
  std::vector<Index> counter(r, 0);
  Index src = 0;
  for (Index flat = 0; flat < n; ++flat) {
    out.data_[static_cast<size_t>(flat)] = data_[static_cast<size_t>(src)];
    for (size_t i = r; i-- > 0;) {
      ++counter[i];
      src += gather_strides[i];
      if (counter[i] < new_dims[i]) break;
      counter[i] = 0;
      src -= gather_strides[i] * new_dims[i];
    }
  }
  return out;
}

ComplexTensor ComplexTensor::conj() const {
  ComplexTensor out = *this;
  for (auto& v : out.data_) v = std::conj(v);
  return out;
}

double ComplexTensor::norm() const {
  double s = 0.0;
  for (const auto& v : data_) s += std::norm(v);
  return std::sqrt(s);
}

double ComplexTensor::max_abs() const {
  double m = 0.0;
  for (const auto& v : data_) m = std::max(m, std::abs(v));
  return m;
}

bool ComplexTensor::all_finite() const {
  for (const auto& v : data_) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  }
  return true;
}

ComplexTensor& ComplexTensor::operator*=(cplx factor) {
  for (auto& v : data_) v *= factor;
  return *this;
}

ComplexTensor contract(const ComplexTensor& a, const ComplexTensor& b,
                       const std::vector<std::pair<Index, Index>>& axis_pairs) {
  std::vector<bool> a_used(static_cast<size_t>(a.rank()), false);
  std::vector<bool> b_used(static_cast<size_t>(b.rank()), false);
  for (const auto& [ai, bi] : axis_pairs) {
    if (ai < 0 || ai >= a.rank() || bi < 0 || bi >= b.rank()) {
      throw std::invalid_argument("contract: axis out of range");
    }
    if (a_used[static_cast<size_t>(ai)] || b_used[static_cast<size_t>(bi)]) {
      throw std::invalid_argument("contract: repeated axis");
    }
    if (a.dim(ai) != b.dim(bi)) {
      throw std::invalid_argument(
          "contract: dimension mismatch on paired axes (" +
          std::to_string(a.dim(ai)) + " vs " + std::to_string(b.dim(bi)) + ")");
    }
    a_used[static_cast<size_t>(ai)] = true;
    b_used[static_cast<size_t>(bi)] = true;
  }

  std::vector<Index> a_free, b_free, a_order, b_order;
  for (Index i = 0; i < a.rank(); ++i)
    if (!a_used[static_cast<size_t>(i)]) a_free.push_back(i);
  for (Index i = 0; i < b.rank(); ++i)
    if (!b_used[static_cast<size_t>(i)]) b_free.push_back(i);

  // a: free axes first, contracted last; b: contracted first, free last.
  a_order = a_free;
  for (const auto& p : axis_pairs) a_order.push_back(p.first);
  for (const auto& p : axis_pairs) b_order.push_back(p.second);
  for (Index i : b_free) b_order.push_back(i);

  ComplexTensor ap = a.permuted(a_order);
  ComplexTensor bp = b.permuted(b_order);

  Index m = 1, k = 1, n = 1;
  std::vector<Index> out_dims;
  for (Index i : a_free) {
    m *= a.dim(i);
    out_dims.push_back(a.dim(i));
  }
  for (const auto& p : axis_pairs) k *= a.dim(p.first);
  for (Index i : b_free) {
    n *= b.dim(i);
    out_dims.push_back(b.dim(i));
  }
  if (out_dims.empty()) out_dims.push_back(1);  // scalar as 1-element tensor

  ComplexTensor out(out_dims);
  ConstMapMat ma(ap.data().data(), m, k);
  ConstMapMat mb(bp.data().data(), k, n);
  MapMat mo(out.data().data(), m, n);
  mo.noalias() = ma * mb;
  return out;
}

SvdResult svd_split(const ComplexTensor& t, const std::vector<Index>& left_axes,
                    const TruncationPolicy& policy) {
  const Index r = t.rank();
  if (left_axes.empty() || static_cast<Index>(left_axes.size()) >= r) {
    throw std::invalid_argument("svd_split: left_axes must be a proper nonempty subset");
  }
  std::vector<bool> is_left(static_cast<size_t>(r), false);
  for (Index i : left_axes) {
    if (i < 0 || i >= r || is_left[static_cast<size_t>(i)]) {
      throw std::invalid_argument("svd_split: bad left axis");
    }
    is_left[static_cast<size_t>(i)] = true;
  }
  std::vector<Index> order(left_axes), right_axes;
  for (Index i = 0; i < r; ++i) {
    if (!is_left[static_cast<size_t>(i)]) {
      order.push_back(i);
      right_axes.push_back(i);
    }
  }

  ComplexTensor tp = t.permuted(order);
  Index rows = 1, cols = 1;
  std::vector<Index> left_dims, right_dims;
  for (Index i : left_axes) {
    rows *= t.dim(i);
    left_dims.push_back(t.dim(i));
  }
  for (Index i : right_axes) {
    cols *= t.dim(i);
    right_dims.push_back(t.dim(i));
  }

  // LAPACK zgesdd is used instead of Eigen's SVDs: Eigen 3.4.0 JacobiSVD can
  // silently return an inaccurate factorization (reconstruction error far
  // above machine precision) on matrices whose entries span a very large
  // dynamic range, which the canonicalization sweeps produce routinely.
  const Index full = std::min(rows, cols);
  std::vector<cplx> a(tp.data());
  std::vector<double> sv(static_cast<size_t>(full));
  std::vector<cplx> u(static_cast<size_t>(rows * full));
  std::vector<cplx> vt(static_cast<size_t>(full * cols));
  lapack_int info = LAPACKE_zgesdd(
      LAPACK_ROW_MAJOR, 'S', static_cast<lapack_int>(rows), static_cast<lapack_int>(cols),
      reinterpret_cast<lapack_complex_double*>(a.data()), static_cast<lapack_int>(cols),
      sv.data(), reinterpret_cast<lapack_complex_double*>(u.data()),
      static_cast<lapack_int>(full), reinterpret_cast<lapack_complex_double*>(vt.data()),
      static_cast<lapack_int>(cols));
  if (info != 0) {
    // Divide-and-conquer failed; retry with the slower QR-based driver.
    a = tp.data();
    std::vector<double> superb(static_cast<size_t>(full > 0 ? full - 1 : 0) + 1);
    info = LAPACKE_zgesvd(
        LAPACK_ROW_MAJOR, 'S', 'S', static_cast<lapack_int>(rows),
        static_cast<lapack_int>(cols),
        reinterpret_cast<lapack_complex_double*>(a.data()), static_cast<lapack_int>(cols),
        sv.data(), reinterpret_cast<lapack_complex_double*>(u.data()),
        static_cast<lapack_int>(full), reinterpret_cast<lapack_complex_double*>(vt.data()),
        static_cast<lapack_int>(cols), superb.data());
    if (info != 0) {
      throw std::runtime_error("svd_split: SVD did not converge (matrix " +
                               std::to_string(rows) + "x" + std::to_string(cols) + ")");
    }
  }

  double total = 0.0;
  for (Index i = 0; i < full; ++i) total += sv[static_cast<size_t>(i)] * sv[static_cast<size_t>(i)];

  Index keep = full;
  if (total > 0.0) {
    const double floor_val = kRankFloor * sv[0];
    // epsilon bounds the relative 2-norm error of the truncation, so the
    // dropped squared mass may reach epsilon^2 * total.
    const double budget = policy.epsilon * policy.epsilon * total;
    double tail = 0.0;
    while (keep > 1) {
      const double s = sv[keep - 1];
      const double cand = tail + s * s;
      if (s < floor_val || cand <= budget) {
        tail = cand;
        --keep;
      } else {
        break;
      }
    }
    if (policy.max_bond && keep > *policy.max_bond) {
      for (Index i = *policy.max_bond; i < keep; ++i) tail += sv[i] * sv[i];
      keep = *policy.max_bond;
    }
  }

  SvdResult res;
  res.singulars.assign(sv.data(), sv.data() + keep);
  double kept_mass = 0.0;
  for (Index i = 0; i < keep; ++i) kept_mass += sv[i] * sv[i];
  res.discarded_weight = total > 0.0 ? (total - kept_mass) / total : 0.0;

  left_dims.push_back(keep);
  ComplexTensor left(left_dims);
  for (Index i = 0; i < rows; ++i) {
    for (Index k = 0; k < keep; ++k) {
      left.data()[static_cast<size_t>(i * keep + k)] = u[static_cast<size_t>(i * full + k)];
    }
  }

  right_dims.insert(right_dims.begin(), keep);
  ComplexTensor right(right_dims);
  std::copy(vt.begin(), vt.begin() + static_cast<ptrdiff_t>(keep * cols),
            right.data().begin());

  res.left = std::move(left);
  res.right = std::move(right);
  return res;
}

ComplexTensor expm_antihermitian(const ComplexTensor& g) {
  if (g.rank() != 2 || g.dim(0) != g.dim(1)) {
    throw std::invalid_argument("expm_antihermitian: square matrix required");
  }
  const Index n = g.dim(0);
  ConstMapMat m(g.data().data(), n, n);
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m + m.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("expm_antihermitian: generator is not anti-Hermitian");
  }
  // g = -i h with h Hermitian; exp(g) = V exp(-i lambda) V^dagger.
  MatrixXc h = cplx(0.0, 1.0) * m;
  h = (h + h.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(h);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("expm_antihermitian: eigendecomposition failed");
  }
  Eigen::VectorXcd phases(n);
  for (Index i = 0; i < n; ++i) {
    phases[i] = std::exp(cplx(0.0, -es.eigenvalues()[i]));
  }
  ComplexTensor out({n, n});
  MapMat mo(out.data().data(), n, n);
  mo = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  return out;
}

}  // namespace franson
