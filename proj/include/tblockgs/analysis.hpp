#pragma once

#include "tblockgs/sampling.hpp"
#include "tblockgs/solvers.hpp"
#include "tblockgs/tensor.hpp"

#include <limits>

namespace tblockgs {

/**
 * Expected contraction constants of the solvers on a given instance.  All
 * quantities are computed from dense factorizations of the block-circulant
 * expansion, so they are meant for desk-scale instances.
 */
struct ConvergenceConstants {
  static constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

  // single-operator constants
  double alpha = kUnset;        ///< 1 - smallest eigenvalue of the mean projector
  double sigma_sq = kUnset;     ///< max over blocks of the squared spectral norm
  double kappa_sq = kUnset;     ///< squared spectral condition number
  double trbags_rate = kUnset;  ///< adjoint-step expected rate

  // factorized constants
  double alpha_u = kUnset, alpha_v = kUnset;
  double alpha_max = kUnset, alpha_min = kUnset;
  double beta_u = kUnset, beta_v = kUnset;
  double beta_max = kUnset, beta_min = kUnset;
  double gamma_v = kUnset;
  double sigma_sq_u = kUnset, sigma_sq_v = kUnset;
  double kappa_sq_u = kUnset, kappa_sq_v = kUnset;
  double sigma_max_sq_pinv_v = kUnset;  ///< squared spectral norm of pinv(bcirc(v))
  long c_min_u = 0, c_min_v = 0;        ///< minimum column cover counts
  double omega1 = 1.0, omega2 = 1.0;
};

/// Expected one-step contraction factor of trbgs:
/// 1 - smallest eigenvalue of sum_tau w_tau P_tau, where P_tau is the
/// orthogonal projector onto the range of the flattened block.
double alpha_trbgs(const Tensor3& a, const BlockSet& blocks);

/// Squared spectral condition number sigma_max^2(pinv) * sigma_max^2 of the
/// flattened operator (zero singular values excluded from the pinv side).
double kappa_sq(const Tensor3& a);

/// max over blocks of sigma_max^2 of the flattened column block.
double sigma_sq_blocks(const Tensor3& a, const BlockSet& blocks);

/// Smallest eigenvalue of the flattened Gram matrix; zero when the operator is
/// rank deficient (in particular whenever it is wide).
double sigma_min_sq(const Tensor3& a);

/// Expected rate of trbags:
/// 1 - (2 omega - omega^2 sigma^2) * (c_min / |T|) * sigma_min^2.
double trbags_rate(const Tensor3& a, const BlockSet& blocks, double omega);

/// alpha / sigma / kappa / rate for one operator and block set.
ConvergenceConstants plain_constants(const Tensor3& a, const BlockSet& blocks,
                                     double omega);

/// All factorized constants for the pair (u, v) with the given block sets and
/// step sizes.
ConvergenceConstants factorized_constants(const Tensor3& u, const Tensor3& v,
                                          const BlockSet& u_blocks,
                                          const BlockSet& v_blocks, double omega1,
                                          double omega2);

enum class BoundKind {
  trbgs,          ///< alpha^k * initial
  trbags,         ///< rate^k * initial
  fac_inner_gs,   ///< inner residual bound of the pseudoinverse variant
  fac_inner_ags,  ///< inner residual bound of the adjoint-step variant
};

/// Reference norms entering the factorized inner bounds.
struct BoundNorms {
  double vx_ref_sq = 0.0;  ///< ||v x_ref||_F^2
  double z_ref_sq = 0.0;   ///< ||z_ref||_F^2
};

/// Evaluate the theoretical expected-error bound at iteration k.  The
/// factorized kinds distinguish equal factor rates (k * rate^k transient) from
/// distinct ones (geometric-series envelope).  k = 0 returns initial_err_sq.
double bound_curve(const ConvergenceConstants& c, double initial_err_sq, long k,
                   BoundKind kind, const BoundNorms& norms = {});

}  // namespace tblockgs
