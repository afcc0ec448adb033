#include "tblockgs/oracle.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <cmath>

namespace tblockgs {

namespace {

constexpr double kRankCutoff = 1e-12;

Eigen::MatrixXd pinv_times(const Eigen::MatrixXd& m, const Eigen::MatrixXd& rhs,
                           int* rank_out) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? kRankCutoff * sv(0) : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff && sv(i) > 0.0) ++rank;
  if (rank_out) *rank_out = rank;
  Eigen::MatrixXd coef = svd.matrixU().leftCols(rank).transpose() * rhs;
  for (int i = 0; i < rank; ++i) coef.row(i) /= sv(i);
  return svd.matrixV().leftCols(rank) * coef;
}

}  // namespace

OracleSolution least_norm_solve(const Tensor3& a, const Tensor3& b) {
  if (a.rows() != b.rows() || a.depth() != b.depth())
    throw std::invalid_argument("least_norm_solve: dimension mismatch");
  const Eigen::MatrixXd m = bcirc(a);
  const Eigen::MatrixXd rhs = unfold(b);
  int rank = 0;
  const Eigen::MatrixXd w = pinv_times(m, rhs, &rank);
  OracleSolution sol;
  sol.x_star = fold(w, a.cols(), a.depth());
  sol.residual_norm = (m * w - rhs).norm();
  sol.rank = rank;
  return sol;
}

RangeSplit range_split(const Tensor3& a, const Tensor3& y) {
  OracleSolution sol = least_norm_solve(a, y);
  RangeSplit split;
  split.y_range = tprod(a, sol.x_star);
  split.y_perp = y - split.y_range;
  return split;
}

namespace {

struct NormalEquations {
  Eigen::MatrixXd m;               // bcirc of the block
  Eigen::LLT<Eigen::MatrixXd> llt; // factorisation of m' m
};

NormalEquations factor_block(const Tensor3& block, const char* who) {
  NormalEquations ne;
  ne.m = bcirc(block);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(ne.m);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  const double smin = sv.size() > 0 ? sv(sv.size() - 1) : 0.0;
  if (ne.m.rows() < ne.m.cols() || smin <= kRankCutoff * smax || smax == 0.0)
    throw RankDeficientBlock(std::string(who) + ": block is rank deficient");
  ne.llt.compute(ne.m.transpose() * ne.m);
  if (ne.llt.info() != Eigen::Success)
    throw RankDeficientBlock(std::string(who) + ": normal equations not positive definite");
  return ne;
}

Tensor3 solve_with(const NormalEquations& ne, const Tensor3& block, const Tensor3& r) {
  if (block.rows() != r.rows() || block.depth() != r.depth())
    throw std::invalid_argument("pinv_apply: dimension mismatch");
  const Eigen::MatrixXd rhs = ne.m.transpose() * unfold(r);
  Matrix w = ne.llt.solve(rhs);
  return fold(w, block.cols(), block.depth());
}

}  // namespace

Tensor3 pinv_apply(const Tensor3& a_block, const Tensor3& r) {
  NormalEquations ne = factor_block(a_block, "pinv_apply");
  return solve_with(ne, a_block, r);
}

struct BlockPinvCache::Entry {
  Tensor3 block;
  NormalEquations ne;
};

BlockPinvCache::~BlockPinvCache() = default;

BlockPinvCache::BlockPinvCache(const Tensor3& a, const BlockSet& blocks)
    : a_(&a), blocks_(&blocks) {
  if (blocks.n() != a.cols())
    throw std::invalid_argument("BlockPinvCache: block set does not match operator");
  entries_.resize(blocks.size());
}

const BlockPinvCache::Entry& BlockPinvCache::entry(std::size_t i) const {
  auto& slot = entries_.at(i);
  if (!slot) {
    auto e = std::make_unique<Entry>();
    e->block = column_block(*a_, blocks_->block(i));
    e->ne = factor_block(e->block, "BlockPinvCache");
    slot = std::move(e);
  }
  return *slot;
}

Tensor3 BlockPinvCache::apply(std::size_t i, const Tensor3& r) const {
  const Entry& e = entry(i);
  return solve_with(e.ne, e.block, r);
}

const Tensor3& BlockPinvCache::block_tensor(std::size_t i) const {
  return entry(i).block;
}

}  // namespace tblockgs
