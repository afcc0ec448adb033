#pragma once

#include "tblockgs/sampling.hpp"
#include "tblockgs/tensor.hpp"

#include <memory>
#include <stdexcept>
#include <vector>

namespace tblockgs {

/// Thrown when a column block is numerically rank deficient in the
/// block-circulant sense (smallest singular value <= 1e-12 times the largest).
struct RankDeficientBlock : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Exact minimum-norm least-squares solution of a tensor system.
struct OracleSolution {
  Tensor3 x_star;        ///< fold of pinv(bcirc(a)) * unfold(b)
  double residual_norm;  ///< Frobenius norm of a * x_star - b
  int rank;              ///< numerical rank of bcirc(a)
};

/// Orthogonal split of a right-hand side into its component inside the range
/// of the operator and the leftover.
struct RangeSplit {
  Tensor3 y_range;  ///< a * least-norm solution
  Tensor3 y_perp;   ///< y - y_range; orthogonal to the range
};

/// Dense-SVD least-norm solve of a * x = b.  Singular values at or below
/// 1e-12 times the largest are treated as zero.  Desk-scale only: the
/// flattened operator is factored directly.
OracleSolution least_norm_solve(const Tensor3& a, const Tensor3& b);

/// Apply the block pseudoinverse: returns (a*'a)^-1 a*' r for a full-column-
/// rank block, computed by solving the flattened normal equations.  Throws
/// RankDeficientBlock when the precondition fails.
Tensor3 pinv_apply(const Tensor3& a_block, const Tensor3& r);

/// Split y into range component and orthogonal remainder; the parts sum back
/// to y exactly.
RangeSplit range_split(const Tensor3& a, const Tensor3& y);

/**
 * Per-block pseudoinverse solver for a fixed operator and block set.
 * Factorizations are built lazily on first use of a block and reused across
 * iterations.  Not safe for concurrent use by multiple threads.
 */
class BlockPinvCache {
 public:
  BlockPinvCache(const Tensor3& a, const BlockSet& blocks);
  ~BlockPinvCache();

  /// (a_tau*' a_tau)^-1 a_tau*' r for block index i of the block set.
  Tensor3 apply(std::size_t i, const Tensor3& r) const;

  /// Cached column block a_{:tau:}.
  const Tensor3& block_tensor(std::size_t i) const;

 private:
  struct Entry;
  const Entry& entry(std::size_t i) const;

  const Tensor3* a_;
  const BlockSet* blocks_;
  mutable std::vector<std::unique_ptr<Entry>> entries_;
};

}  // namespace tblockgs
