#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace tblockgs {

/// Seeded pseudo-random source.  Identical seeds give identical streams within
/// one build of the library; cross-platform bit equality is not promised.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform draw from [0, 1).
  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }

  /// Standard normal draw.
  double normal() { return normal_(engine_); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/**
 * Finite collection of column-index blocks with a sampling weight per block.
 *
 * Indices are 0-based.  Every block is a non-empty strictly increasing subset
 * of {0..n-1}, the blocks jointly cover {0..n-1}, weights are nonnegative with
 * a positive sum (normalised to sum one on construction).
 */
class BlockSet {
 public:
  BlockSet(int n, std::vector<std::vector<int>> blocks, std::vector<double> weights);

  /// Contiguous blocks of the given size, the last one shorter when the size
  /// does not divide n; uniform weights.
  static BlockSet partition(int n, int block_size);

  /// Overlapping sliding windows of the given size, advancing by stride and
  /// wrapping around, so windows started at 0, stride, 2*stride, ... < n.
  /// Uniform weights.  With stride < size indices land in several blocks,
  /// raising the minimum cover count.
  static BlockSet sliding(int n, int block_size, int stride);

  int n() const { return n_; }
  std::size_t size() const { return blocks_.size(); }
  const std::vector<int>& block(std::size_t i) const { return blocks_[i]; }
  const std::vector<double>& weights() const { return weights_; }

  bool uniform_weights(double tol = 1e-12) const;

  /// Minimum over column indices of the number of blocks containing it.
  int c_min() const;

  /// Draw a block index according to the weights: one uniform variate against
  /// the cached cumulative weights.
  std::size_t sample(Rng& rng) const;

 private:
  int n_;
  std::vector<std::vector<int>> blocks_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

}  // namespace tblockgs
