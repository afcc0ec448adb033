#include "tblockgs/synthgen.hpp"

#include "tblockgs/oracle.hpp"

#include <cmath>

namespace tblockgs {

Tensor3 gaussian_tensor(int rows, int cols, int depth, Rng& rng) {
  Tensor3 t(rows, cols, depth);
  double* p = t.data();
  for (std::size_t i = 0; i < t.size(); ++i) p[i] = rng.normal();
  return t;
}

SyntheticSystem make_consistent(int m, int n, int l, int p, Rng& rng) {
  SyntheticSystem sys;
  sys.a = gaussian_tensor(m, n, p, rng);
  sys.x_gen = gaussian_tensor(n, l, p, rng);
  sys.b = tprod(sys.a, sys.x_gen);
  sys.b_perp = Tensor3(m, l, p);
  sys.label = "consistent";
  return sys;
}

namespace {

/// Residual of the least-squares solve for an independent Gaussian rhs; this
/// is orthogonal to the operator range by construction.
Tensor3 orthogonal_noise(const Tensor3& op, int m, int l, int p, Rng& rng) {
  const Tensor3 b_sample = gaussian_tensor(m, l, p, rng);
  const OracleSolution fit = least_norm_solve(op, b_sample);
  Tensor3 perp = b_sample - tprod(op, fit.x_star);
  if (frob_norm(perp) <= 1e-10 * frob_norm(b_sample))
    throw DegenerateNoise(
        "make_inconsistent: right-hand side has no component outside the operator "
        "range (operator is effectively full row rank)");
  return perp;
}

}  // namespace

SyntheticSystem make_inconsistent(int m, int n, int l, int p, Rng& rng, double scale) {
  SyntheticSystem sys;
  sys.a = gaussian_tensor(m, n, p, rng);
  sys.x_gen = gaussian_tensor(n, l, p, rng);
  sys.b_perp = orthogonal_noise(sys.a, m, l, p, rng);
  sys.b = tprod(sys.a, sys.x_gen) + scale * sys.b_perp;
  sys.label = "inconsistent";
  return sys;
}

FactorCase parse_factor_case(const std::string& label) {
  if (label == "u_over_v_under_a_under") return FactorCase::u_over_v_under_a_under;
  if (label == "u_over_v_under_a_over") return FactorCase::u_over_v_under_a_over;
  if (label == "u_over_v_over_a_over") return FactorCase::u_over_v_over_a_over;
  if (label == "u_under_v_over_a_under") return FactorCase::u_under_v_over_a_under;
  if (label == "u_under_v_over_a_over") return FactorCase::u_under_v_over_a_over;
  if (label == "u_under_v_under_a_under") return FactorCase::u_under_v_under_a_under;
  throw std::invalid_argument("unknown factor case: " + label);
}

std::string to_string(FactorCase c) {
  switch (c) {
    case FactorCase::u_over_v_under_a_under: return "u_over_v_under_a_under";
    case FactorCase::u_over_v_under_a_over: return "u_over_v_under_a_over";
    case FactorCase::u_over_v_over_a_over: return "u_over_v_over_a_over";
    case FactorCase::u_under_v_over_a_under: return "u_under_v_over_a_under";
    case FactorCase::u_under_v_over_a_over: return "u_under_v_over_a_over";
    case FactorCase::u_under_v_under_a_under: return "u_under_v_under_a_under";
  }
  throw std::invalid_argument("unknown factor case");
}

bool case_guaranteed(FactorCase c) {
  switch (c) {
    case FactorCase::u_over_v_under_a_under:
    case FactorCase::u_over_v_under_a_over:
    case FactorCase::u_over_v_over_a_over:
      return true;
    default:
      return false;
  }
}

FactorDims factor_case_dims(FactorCase c) {
  FactorDims d{0, 0, 20, 10, 30};
  switch (c) {
    case FactorCase::u_over_v_under_a_under: d.m = 10; d.m1 = 5; break;
    case FactorCase::u_over_v_under_a_over: d.m = 30; d.m1 = 15; break;
    case FactorCase::u_over_v_over_a_over: d.m = 30; d.m1 = 25; break;
    case FactorCase::u_under_v_over_a_under: d.m = 10; d.m1 = 25; break;
    case FactorCase::u_under_v_over_a_over: d.m = 30; d.m1 = 35; break;
    case FactorCase::u_under_v_under_a_under: d.m = 10; d.m1 = 15; break;
  }
  return d;
}

SyntheticSystem make_factorized_case(FactorCase c, Rng& rng, double scale) {
  const FactorDims d = factor_case_dims(c);
  SyntheticSystem sys;
  sys.u = gaussian_tensor(d.m, d.m1, d.p, rng);
  sys.v = gaussian_tensor(d.m1, d.n, d.p, rng);
  sys.x_gen = gaussian_tensor(d.n, d.l, d.p, rng);
  const Tensor3 composed = tprod(sys.u, sys.v);
  sys.b = tprod(composed, sys.x_gen);
  sys.b_perp = Tensor3(d.m, d.l, d.p);
  try {
    sys.b_perp = orthogonal_noise(composed, d.m, d.l, d.p, rng);
    sys.b += scale * sys.b_perp;
  } catch (const DegenerateNoise&) {
    // When the composed operator has a full-row-rank block circulant (the
    // under/under grid cells), every right-hand side is reachable and no
    // orthogonal perturbation exists. Those cases run as consistent systems;
    // b_perp stays zero.
  }
  sys.label = to_string(c);
  sys.guaranteed = case_guaranteed(c);
  return sys;
}

}  // namespace tblockgs
