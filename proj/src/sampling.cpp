#include "tblockgs/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace tblockgs {

BlockSet::BlockSet(int n, std::vector<std::vector<int>> blocks,
                   std::vector<double> weights)
    : n_(n), blocks_(std::move(blocks)), weights_(std::move(weights)) {
  if (n_ <= 0) throw std::invalid_argument("BlockSet: n must be positive");
  if (blocks_.empty()) throw std::invalid_argument("BlockSet: no blocks");
  if (weights_.size() != blocks_.size())
    throw std::invalid_argument("BlockSet: one weight per block required");

  std::vector<int> cover(n_, 0);
  for (const auto& blk : blocks_) {
    if (blk.empty()) throw std::invalid_argument("BlockSet: empty block");
    int prev = -1;
    for (int j : blk) {
      if (j <= prev)
        throw std::invalid_argument("BlockSet: block indices must be strictly increasing");
      if (j < 0 || j >= n_)
        throw std::invalid_argument("BlockSet: index out of range");
      prev = j;
      ++cover[j];
    }
  }
  for (int j = 0; j < n_; ++j)
    if (cover[j] == 0)
      throw std::invalid_argument("BlockSet: blocks do not cover every column");

  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw std::invalid_argument("BlockSet: weights must be nonnegative and finite");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("BlockSet: weights sum to zero");
  cumulative_.resize(weights_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    weights_[i] /= total;
    acc += weights_[i];
    cumulative_[i] = acc;
  }
  cumulative_.back() = 1.0;
}

BlockSet BlockSet::partition(int n, int block_size) {
  if (n <= 0 || block_size <= 0 || block_size > n)
    throw std::invalid_argument("BlockSet::partition: block size out of range");
  std::vector<std::vector<int>> blocks;
  for (int start = 0; start < n; start += block_size) {
    std::vector<int> blk(std::min(block_size, n - start));
    std::iota(blk.begin(), blk.end(), start);
    blocks.push_back(std::move(blk));
  }
  std::vector<double> w(blocks.size(), 1.0);
  return {n, std::move(blocks), std::move(w)};
}

BlockSet BlockSet::sliding(int n, int block_size, int stride) {
  if (n <= 0 || block_size <= 0 || block_size > n || stride <= 0)
    throw std::invalid_argument("BlockSet::sliding: bad window parameters");
  std::vector<std::vector<int>> blocks;
  for (int start = 0; start < n; start += stride) {
    std::set<int> s;
    for (int t = 0; t < block_size; ++t) s.insert((start + t) % n);
    blocks.emplace_back(s.begin(), s.end());
  }
  std::vector<double> w(blocks.size(), 1.0);
  return {n, std::move(blocks), std::move(w)};
}

bool BlockSet::uniform_weights(double tol) const {
  const double expect = 1.0 / static_cast<double>(weights_.size());
  for (double w : weights_)
    if (std::abs(w - expect) > tol) return false;
  return true;
}

int BlockSet::c_min() const {
  std::vector<int> cover(n_, 0);
  for (const auto& blk : blocks_)
    for (int j : blk) ++cover[j];
  return *std::min_element(cover.begin(), cover.end());
}

std::size_t BlockSet::sample(Rng& rng) const {
  const double u = rng.uniform();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  return static_cast<std::size_t>(it - cumulative_.begin());
}

}  // namespace tblockgs
