#include "franson/chain.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <stdexcept>

namespace franson {

namespace {

// Multiply the last axis of t (the bond) entrywise by s.
ComplexTensor scale_last_axis(const ComplexTensor& t, const std::vector<double>& s) {
  ComplexTensor out = t;
  const Index b = t.dim(t.rank() - 1);
  const Index rows = t.size() / b;
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < b; ++j) {
      out.data()[static_cast<size_t>(i * b + j)] *= s[static_cast<size_t>(j)];
    }
  }
  return out;
}

// Multiply the first axis of t (the bond) entrywise by s.
ComplexTensor scale_first_axis(const ComplexTensor& t, const std::vector<double>& s) {
  ComplexTensor out = t;
  const Index b = t.dim(0);
  const Index cols = t.size() / b;
  for (Index i = 0; i < b; ++i) {
    for (Index j = 0; j < cols; ++j) {
      out.data()[static_cast<size_t>(i * cols + j)] *= s[static_cast<size_t>(i)];
    }
  }
  return out;
}

const TruncationPolicy kLossless{0.0, {}};

}  // namespace

std::string to_string(const SiteLabel& label) {
  if (label.is_system) return "SYSTEM";
  std::string s = "ch" + std::to_string(label.bin.channel);
  s += label.bin.path == Path::Short ? "-S" : "-L";
  s += "@" + std::to_string(label.bin.step);
  if (label.bin.kind == BinKind::VacuumPad) s += "(pad)";
  return s;
}

BinChain::BinChain(Index system_dim, Index bin_dim, int initial_level,
                   TruncationPolicy policy)
    : bin_dim_(bin_dim), policy_(policy) {
  if (initial_level < 0 || initial_level >= system_dim) {
    throw std::invalid_argument("BinChain: initial level out of range");
  }
  ComplexTensor sys({1, system_dim, 1});
  sys.at({0, initial_level, 0}) = 1.0;
  sites_.push_back(std::move(sys));
  labels_.push_back(SiteLabel::system());
}

Index BinChain::system_pos() const {
  for (Index i = 0; i < size(); ++i) {
    if (labels_[static_cast<size_t>(i)].is_system) return i;
  }
  throw std::logic_error("BinChain: no system site");
}

Index BinChain::find(const BinLabel& label) const {
  for (Index i = 0; i < size(); ++i) {
    const auto& l = labels_[static_cast<size_t>(i)];
    if (!l.is_system && l.bin == label) return i;
  }
  return -1;
}

void BinChain::insert_vacuum_bin(Index pos, const BinLabel& label) {
  if (pos < 0 || pos > size()) throw std::out_of_range("insert_vacuum_bin: position");
  if (find(label) >= 0) {
    throw std::invalid_argument("insert_vacuum_bin: duplicate label " +
                                to_string(SiteLabel::of(label)));
  }
  const Index bond = pos < size() ? sites_[static_cast<size_t>(pos)].dim(0)
                                  : sites_.back().dim(2);
  ComplexTensor t({bond, bin_dim_, bond});
  for (Index i = 0; i < bond; ++i) t.at({i, 0, i}) = 1.0;
  sites_.insert(sites_.begin() + pos, std::move(t));
  labels_.insert(labels_.begin() + pos, SiteLabel::of(label));
  if (pos <= ortho_) ++ortho_;
}

void BinChain::canonical_step_right(Index pos) {
  auto res = svd_split(sites_[static_cast<size_t>(pos)], {0, 1}, kLossless);
  sites_[static_cast<size_t>(pos)] = std::move(res.left);
  ComplexTensor carry = scale_first_axis(res.right, res.singulars);
  sites_[static_cast<size_t>(pos + 1)] =
      contract(carry, sites_[static_cast<size_t>(pos + 1)], {{1, 0}});
}

void BinChain::canonical_step_left(Index pos) {
  auto res = svd_split(sites_[static_cast<size_t>(pos)], {0}, kLossless);
  sites_[static_cast<size_t>(pos)] = std::move(res.right);
  ComplexTensor carry = scale_last_axis(res.left, res.singulars);
  sites_[static_cast<size_t>(pos - 1)] =
      contract(sites_[static_cast<size_t>(pos - 1)], carry, {{2, 0}});
}

void BinChain::move_ortho(Index pos) {
  if (pos < 0 || pos >= size()) throw std::out_of_range("move_ortho: position");
  while (ortho_ < pos) {
    canonical_step_right(ortho_);
    ++ortho_;
  }
  while (ortho_ > pos) {
    canonical_step_left(ortho_);
    --ortho_;
  }
}

void BinChain::swap_adjacent(Index pos) {
  if (pos < 0 || pos + 1 >= size()) throw std::out_of_range("swap_adjacent: position");
  if (ortho_ < pos) {
    move_ortho(pos);
  } else if (ortho_ > pos + 1) {
    move_ortho(pos + 1);
  }
  ComplexTensor theta = contract(sites_[static_cast<size_t>(pos)],
                                 sites_[static_cast<size_t>(pos + 1)], {{2, 0}});
  theta = theta.permuted({0, 2, 1, 3});
  auto res = svd_split(theta, {0, 1}, policy_);
  discarded_total_ += res.discarded_weight;
  sites_[static_cast<size_t>(pos)] = scale_last_axis(res.left, res.singulars);
  sites_[static_cast<size_t>(pos + 1)] = std::move(res.right);
  std::swap(labels_[static_cast<size_t>(pos)], labels_[static_cast<size_t>(pos + 1)]);
  ortho_ = pos;
}

void BinChain::move_bin(Index from_pos, Index to_pos) {
  if (from_pos < 0 || from_pos >= size() || to_pos < 0 || to_pos >= size()) {
    throw std::out_of_range("move_bin: position");
  }
  while (from_pos < to_pos) {
    swap_adjacent(from_pos);
    ++from_pos;
  }
  while (from_pos > to_pos) {
    swap_adjacent(from_pos - 1);
    --from_pos;
  }
}

void BinChain::apply_unitary(const ComplexTensor& matrix, Index first, Index n_sites,
                             const std::vector<Index>& out_order) {
  if (first < 0 || first + n_sites > size() || n_sites < 1) {
    throw std::out_of_range("apply_unitary: site range");
  }
  if (static_cast<Index>(out_order.size()) != n_sites) {
    throw std::invalid_argument("apply_unitary: out_order size");
  }
  move_ortho(first);

  // Contract the block into one tensor (l, p_0, ..., p_{n-1}, r).
  ComplexTensor blob = sites_[static_cast<size_t>(first)];
  Index phys_total = blob.dim(1);
  for (Index i = 1; i < n_sites; ++i) {
    blob = contract(blob, sites_[static_cast<size_t>(first + i)],
                    {{blob.rank() - 1, 0}});
    phys_total *= sites_[static_cast<size_t>(first + i)].dim(1);
  }
  if (matrix.rank() != 2 || matrix.dim(0) != phys_total || matrix.dim(1) != phys_total) {
    throw std::invalid_argument("apply_unitary: matrix dimension mismatch");
  }

  const Index l = blob.dim(0);
  const Index r = blob.dim(blob.rank() - 1);
  ComplexTensor flat = blob.reshaped({l, phys_total, r});
  // (l, P, r) x (P_out, P_in) over P -> (l, r, P_out) -> (l, P_out, r)
  ComplexTensor applied = contract(flat, matrix, {{1, 1}}).permuted({0, 2, 1});

  // Restore per-site physical axes and put them in the requested order.
  std::vector<Index> dims{l};
  for (Index i = 0; i < n_sites; ++i) dims.push_back(sites_[static_cast<size_t>(first + i)].dim(1));
  dims.push_back(r);
  ComplexTensor shaped = applied.reshaped(dims);
  std::vector<Index> perm{0};
  for (Index i = 0; i < n_sites; ++i) perm.push_back(1 + out_order[static_cast<size_t>(i)]);
  perm.push_back(n_sites + 1);
  shaped = shaped.permuted(perm);

  std::vector<SiteLabel> new_labels(static_cast<size_t>(n_sites));
  for (Index i = 0; i < n_sites; ++i) {
    new_labels[static_cast<size_t>(i)] =
        labels_[static_cast<size_t>(first + out_order[static_cast<size_t>(i)])];
  }
  for (Index i = 0; i < n_sites; ++i) {
    labels_[static_cast<size_t>(first + i)] = new_labels[static_cast<size_t>(i)];
  }

  // Peel sites off from the left; the orthogonality center ends on the last.
  ComplexTensor cur = std::move(shaped);
  for (Index i = 0; i < n_sites - 1; ++i) {
    auto res = svd_split(cur, {0, 1}, policy_);
    discarded_total_ += res.discarded_weight;
    sites_[static_cast<size_t>(first + i)] = std::move(res.left);
    cur = scale_first_axis(res.right, res.singulars);
  }
  sites_[static_cast<size_t>(first + n_sites - 1)] = std::move(cur);
  ortho_ = first + n_sites - 1;
}

cplx BinChain::local_expectation(Index pos, const ComplexTensor& op) {
  if (pos < 0 || pos >= size()) throw std::out_of_range("local_expectation: position");
  const ComplexTensor& probe = sites_[static_cast<size_t>(pos)];
  if (op.rank() != 2 || op.dim(0) != probe.dim(1) || op.dim(1) != probe.dim(1)) {
    throw std::invalid_argument("local_expectation: operator dimension mismatch");
  }
  move_ortho(pos);
  const ComplexTensor& t = sites_[static_cast<size_t>(pos)];
  ComplexTensor ot = contract(op, t, {{1, 1}}).permuted({1, 0, 2});
  ComplexTensor val = contract(t.conj(), ot, {{0, 0}, {1, 1}, {2, 2}});
  return val.data()[0];
}

void BinChain::scale_physical(Index pos, const std::vector<cplx>& diag) {
  ComplexTensor& t = sites_[static_cast<size_t>(pos)];
  if (static_cast<Index>(diag.size()) != t.dim(1)) {
    throw std::invalid_argument("scale_physical: diagonal size mismatch");
  }
  const Index l = t.dim(0), p = t.dim(1), r = t.dim(2);
  for (Index i = 0; i < l; ++i) {
    for (Index j = 0; j < p; ++j) {
      for (Index k = 0; k < r; ++k) {
        t.data()[static_cast<size_t>((i * p + j) * r + k)] *= diag[static_cast<size_t>(j)];
      }
    }
  }
}

double BinChain::norm() const { return sites_[static_cast<size_t>(ortho_)].norm(); }

void BinChain::assert_finite(const char* context) const {
  if (!sites_[static_cast<size_t>(ortho_)].all_finite()) {
    throw std::runtime_error(std::string("non-finite amplitude in chain: ") + context);
  }
}

std::vector<Index> BinChain::bond_dims() const {
  std::vector<Index> out;
  for (Index i = 0; i + 1 < size(); ++i) out.push_back(sites_[static_cast<size_t>(i)].dim(2));
  return out;
}

Index BinChain::max_bond_dim() const {
  Index m = 1;
  for (Index b : bond_dims()) m = std::max(m, b);
  return m;
}

std::string BinChain::snapshot_json() const {
  nlohmann::json j;
  j["norm"] = norm();
  j["ortho_center"] = ortho_;
  j["bond_dims"] = bond_dims();
  std::vector<std::string> names;
  for (const auto& l : labels_) names.push_back(to_string(l));
  j["labels"] = names;
  return j.dump(2);
}

ComplexTensor BinChain::to_dense() const {
  ComplexTensor cur = sites_[0];
  for (Index i = 1; i < size(); ++i) {
    cur = contract(cur, sites_[static_cast<size_t>(i)], {{cur.rank() - 1, 0}});
  }
  std::vector<Index> dims(cur.dims().begin() + 1, cur.dims().end() - 1);
  if (dims.empty()) dims.push_back(1);
  return cur.reshaped(dims);
}

}  // namespace franson
