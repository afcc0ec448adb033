#pragma once

#include "tblockgs/sampling.hpp"
#include "tblockgs/tensor.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace tblockgs {

/// How the running residual is maintained during iteration.
enum class ResidualMode {
  recompute,    ///< full product every iteration (reference behaviour)
  incremental,  ///< rank-structured update using the block delta
};

struct SolverConfig {
  long max_iters = 1000;
  double omega = 1.0;   ///< adjoint-step size (single-operator solver)
  double omega1 = 1.0;  ///< adjoint-step size, outer factor
  double omega2 = 1.0;  ///< adjoint-step size, inner factor
  std::uint64_t seed = 0;
  long trace_every = 1;
  ResidualMode residual_mode = ResidualMode::recompute;

  void validate() const;
};

/// One recorded iteration.  rel_err and res_err are NaN when no reference
/// solution was supplied.  block / block2 are the sampled block indices of the
/// iteration (-1 where not applicable, e.g. the k = 0 row).
struct TraceRow {
  long k = 0;
  double rel_err = 0.0;       ///< ||x - x_ref||_F / ||x_ref||_F
  double res_err = 0.0;       ///< ||a x - a x_ref||_F
  double raw_residual = 0.0;  ///< ||a x - b||_F
  long long wall_ns = 0;
  int block = -1;
  int block2 = -1;
};

struct ConvergenceTrace {
  bool has_oracle = false;
  bool diverged = false;  ///< iteration stopped early on a non-finite residual
  std::vector<TraceRow> rows;
};

struct SolveResult {
  Tensor3 x;
  ConvergenceTrace trace;
  bool stepsize_warning = false;
};

/// Two-factor operator b ~ u * v * x with conformable slice dimensions.
struct FactorizedOperator {
  Tensor3 u;  ///< m x m1 x p
  Tensor3 v;  ///< m1 x n x p
};

struct FacSolveResult {
  Tensor3 x;
  Tensor3 z;                ///< final outer iterate
  ConvergenceTrace inner;   ///< errors of x against x_ref
  ConvergenceTrace outer;   ///< errors of z against z_ref
  bool stepsize_warning = false;
};

/// Optional per-iteration hook: called after iteration k with the current
/// iterate and the sampled block index.
using IterationObserver =
    std::function<void(long k, const Tensor3& x, std::size_t block)>;

/// Residual a * x - b recomputed from scratch.
Tensor3 residual(const Tensor3& a, const Tensor3& x, const Tensor3& b);

/// Incremental residual update r += a_block * delta_block.
void residual_increment(Tensor3& r, const Tensor3& a_block, const Tensor3& delta_block);

/**
 * Randomized block Gauss-Seidel on a * x = b.  Starts from x = 0; each
 * iteration draws a block by weight and subtracts the selector-lifted block
 * pseudoinverse of the running residual:
 *   x <- x - E_tau (a_tau*' a_tau)^-1 a_tau*' (a x - b).
 * Every block must be full column rank in the block-circulant sense.
 */
SolveResult trbgs(const Tensor3& a, const Tensor3& b, const BlockSet& blocks,
                  const SolverConfig& config, const Tensor3* x_ref = nullptr,
                  const IterationObserver& observer = {});

/**
 * Pseudoinverse-free variant: blocks are drawn uniformly and the update uses
 * the scaled block adjoint,
 *   x <- x - omega E_tau a_tau*' (a x - b).
 * Emits a warning (and keeps running) when 2 omega - omega^2 sigma^2 <= 0,
 * where sigma^2 is the largest squared block spectral norm.
 */
SolveResult trbags(const Tensor3& a, const Tensor3& b, const BlockSet& blocks,
                   const SolverConfig& config, const Tensor3* x_ref = nullptr,
                   const IterationObserver& observer = {});

/**
 * Interlaced factorized solver for u * v * x = b.  Each iteration performs a
 * trbgs step on the outer system u z = b from the previous iterate, then a
 * trbgs step on the inner system v x = z using the freshest z.  The outer
 * block draw precedes the inner draw.
 */
FacSolveResult factrbgs(const FactorizedOperator& op, const Tensor3& b,
                        const BlockSet& u_blocks, const BlockSet& v_blocks,
                        const SolverConfig& config, const Tensor3* z_ref = nullptr,
                        const Tensor3* x_ref = nullptr);

/// Adjoint-step variant of factrbgs with step sizes omega1 (outer) and
/// omega2 (inner); blocks are drawn uniformly.
FacSolveResult factrbags(const FactorizedOperator& op, const Tensor3& b,
                         const BlockSet& u_blocks, const BlockSet& v_blocks,
                         const SolverConfig& config, const Tensor3* z_ref = nullptr,
                         const Tensor3* x_ref = nullptr);

}  // namespace tblockgs
