#include "tblockgs/analysis.hpp"

#include "tblockgs/oracle.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace tblockgs {

namespace {

constexpr double kRankCutoff = 1e-12;

Eigen::VectorXd singular_values(const Tensor3& a) {
  const Eigen::MatrixXd m = bcirc(a);
  return Eigen::BDCSVD<Eigen::MatrixXd>(m).singularValues();
}

double lambda_min(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigenvalue computation failed");
  return es.eigenvalues().minCoeff();
}

double lambda_max(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigenvalue computation failed");
  return es.eigenvalues().maxCoeff();
}

double sigma_max_sq(const Tensor3& a) {
  const Eigen::MatrixXd m = bcirc(a);
  const Eigen::MatrixXd n = m.transpose() * m;
  return std::max(0.0, lambda_max(n));
}

}  // namespace

double alpha_trbgs(const Tensor3& a, const BlockSet& blocks) {
  if (blocks.n() != a.cols())
    throw std::invalid_argument("alpha_trbgs: block set does not match operator");
  const Eigen::Index dim = static_cast<Eigen::Index>(a.rows()) * a.depth();
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const Tensor3 blk = column_block(a, blocks.block(i));
    const Eigen::MatrixXd m = bcirc(blk);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    if (m.rows() < m.cols() || sv(sv.size() - 1) <= kRankCutoff * sv(0) || sv(0) == 0.0)
      throw RankDeficientBlock("alpha_trbgs: block is rank deficient");
    Eigen::LLT<Eigen::MatrixXd> llt(m.transpose() * m);
    if (llt.info() != Eigen::Success)
      throw RankDeficientBlock("alpha_trbgs: normal equations not positive definite");
    mean.noalias() += blocks.weights()[i] * (m * llt.solve(m.transpose()));
  }
  mean = 0.5 * (mean + mean.transpose()).eval();
  const double alpha = 1.0 - lambda_min(mean);
  return std::max(0.0, alpha);
}

double kappa_sq(const Tensor3& a) {
  const Eigen::VectorXd sv = singular_values(a);
  if (sv.size() == 0 || sv(0) == 0.0) return 0.0;
  const double cutoff = kRankCutoff * sv(0);
  double smin_pos = sv(0);
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) smin_pos = sv(i);
  const double ratio = sv(0) / smin_pos;
  return ratio * ratio;
}

double sigma_sq_blocks(const Tensor3& a, const BlockSet& blocks) {
  if (blocks.n() != a.cols())
    throw std::invalid_argument("sigma_sq_blocks: block set does not match operator");
  double best = 0.0;
  for (std::size_t i = 0; i < blocks.size(); ++i)
    best = std::max(best, sigma_max_sq(column_block(a, blocks.block(i))));
  return best;
}

double sigma_min_sq(const Tensor3& a) {
  const Eigen::MatrixXd m = bcirc(a);
  const Eigen::MatrixXd n = m.transpose() * m;
  return std::max(0.0, lambda_min(n));
}

double trbags_rate(const Tensor3& a, const BlockSet& blocks, double omega) {
  const double sigma_sq = sigma_sq_blocks(a, blocks);
  const double step = 2.0 * omega - omega * omega * sigma_sq;
  const double frac = static_cast<double>(blocks.c_min()) / static_cast<double>(blocks.size());
  return 1.0 - step * frac * sigma_min_sq(a);
}

ConvergenceConstants plain_constants(const Tensor3& a, const BlockSet& blocks,
                                     double omega) {
  ConvergenceConstants c;
  c.alpha = alpha_trbgs(a, blocks);
  c.sigma_sq = sigma_sq_blocks(a, blocks);
  c.kappa_sq = kappa_sq(a);
  const double step = 2.0 * omega - omega * omega * c.sigma_sq;
  const double frac = static_cast<double>(blocks.c_min()) / static_cast<double>(blocks.size());
  c.trbags_rate = 1.0 - step * frac * sigma_min_sq(a);
  return c;
}

namespace {

double ratio_min(double a, double b) {
  if (a == b) return 1.0;
  if (a == 0.0 || b == 0.0) return 0.0;
  return std::min(a / b, b / a);
}

double sigma_max_sq_pinv(const Tensor3& a) {
  const Eigen::VectorXd sv = singular_values(a);
  if (sv.size() == 0 || sv(0) == 0.0) return 0.0;
  const double cutoff = kRankCutoff * sv(0);
  double smin_pos = sv(0);
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) smin_pos = sv(i);
  return 1.0 / (smin_pos * smin_pos);
}

}  // namespace

ConvergenceConstants factorized_constants(const Tensor3& u, const Tensor3& v,
                                          const BlockSet& u_blocks,
                                          const BlockSet& v_blocks, double omega1,
                                          double omega2) {
  if (u.cols() != v.rows() || u.depth() != v.depth())
    throw std::invalid_argument("factorized_constants: factors not conformable");
  ConvergenceConstants c;
  c.omega1 = omega1;
  c.omega2 = omega2;

  c.alpha_u = alpha_trbgs(u, u_blocks);
  c.alpha_v = alpha_trbgs(v, v_blocks);
  c.alpha_max = std::max(c.alpha_u, c.alpha_v);
  c.alpha_min = ratio_min(c.alpha_u, c.alpha_v);

  c.sigma_sq_u = sigma_sq_blocks(u, u_blocks);
  c.sigma_sq_v = sigma_sq_blocks(v, v_blocks);

  const double step_u = 2.0 * omega1 - omega1 * omega1 * c.sigma_sq_u;
  const double frac_u =
      static_cast<double>(u_blocks.c_min()) / static_cast<double>(u_blocks.size());
  c.beta_u = 1.0 - step_u * frac_u * sigma_min_sq(u);

  const double step_v = 2.0 * omega2 - omega2 * omega2 * c.sigma_sq_v;
  const double frac_v =
      static_cast<double>(v_blocks.c_min()) / static_cast<double>(v_blocks.size());
  c.beta_v = 2.0 - 2.0 * step_v * frac_v * sigma_min_sq(v);

  c.beta_max = std::max(c.beta_u, c.beta_v);
  c.beta_min = ratio_min(c.beta_u, c.beta_v);

  double gamma = 0.0;
  for (std::size_t j = 0; j < v_blocks.size(); ++j) {
    const Tensor3 blk = column_block(v, v_blocks.block(j));
    gamma = std::max(gamma, sigma_max_sq(blk) * sigma_max_sq(conj_transpose(blk)));
  }
  c.gamma_v = 2.0 * gamma;

  c.kappa_sq_u = kappa_sq(u);
  c.kappa_sq_v = kappa_sq(v);
  c.sigma_max_sq_pinv_v = sigma_max_sq_pinv(v);
  c.c_min_u = u_blocks.c_min();
  c.c_min_v = v_blocks.c_min();
  return c;
}

namespace {

/// Envelope of sum_{s=1..k} ru^s rv^{k-s} as used by the factorized bounds:
/// k * r^k when the rates coincide, geometric-series bound otherwise.  The
/// zero-rate cases fall back to the exact sum.
double transfer_envelope(double ru, double rv, long k) {
  if (ru == rv) return static_cast<double>(k) * std::pow(ru, static_cast<double>(k));
  if (ru == 0.0) return 0.0;
  if (rv == 0.0) return std::pow(ru, static_cast<double>(k));
  const double rmax = std::max(ru, rv);
  const double rmin = ratio_min(ru, rv);
  return std::pow(rmax, static_cast<double>(k)) * rmin / (1.0 - rmin);
}

}  // namespace

double bound_curve(const ConvergenceConstants& c, double initial_err_sq, long k,
                   BoundKind kind, const BoundNorms& norms) {
  if (k < 0) throw std::invalid_argument("bound_curve: negative iteration index");
  if (k == 0) return initial_err_sq;
  switch (kind) {
    case BoundKind::trbgs:
      return std::pow(c.alpha, static_cast<double>(k)) * initial_err_sq;
    case BoundKind::trbags:
      return std::pow(c.trbags_rate, static_cast<double>(k)) * initial_err_sq;
    case BoundKind::fac_inner_gs:
      return std::pow(c.alpha_v, static_cast<double>(k)) * norms.vx_ref_sq +
             c.kappa_sq_u * transfer_envelope(c.alpha_u, c.alpha_v, k) * norms.z_ref_sq;
    case BoundKind::fac_inner_ags:
      return std::pow(c.beta_v, static_cast<double>(k)) * norms.vx_ref_sq +
             c.kappa_sq_u * c.omega2 * c.omega2 * c.gamma_v *
                 transfer_envelope(c.beta_u, c.beta_v, k) * norms.z_ref_sq;
  }
  throw std::invalid_argument("bound_curve: unknown bound kind");
}

}  // namespace tblockgs
