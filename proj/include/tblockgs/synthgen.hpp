#pragma once

#include "tblockgs/sampling.hpp"
#include "tblockgs/solvers.hpp"
#include "tblockgs/tensor.hpp"

#include <stdexcept>
#include <string>

namespace tblockgs {

/// Thrown when the requested inconsistency cannot be realised because the
/// sampled right-hand side is (numerically) entirely inside the operator
/// range, e.g. for generic wide operators.
struct DegenerateNoise : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A generated test system.  Plain systems populate a; factorized systems
/// populate u and v and leave a empty.
struct SyntheticSystem {
  Tensor3 a;
  Tensor3 u, v;
  Tensor3 b;
  Tensor3 x_gen;   ///< planted solution
  Tensor3 b_perp;  ///< range-orthogonal noise direction (zero for consistent)
  std::string label;
  bool guaranteed = true;  ///< factorized case carries a convergence guarantee
};

/// Tensor with independent standard normal entries.
Tensor3 gaussian_tensor(int rows, int cols, int depth, Rng& rng);

/// Gaussian operator and planted solution, b = a * x_gen exactly.
SyntheticSystem make_consistent(int m, int n, int l, int p, Rng& rng);

/**
 * Gaussian operator with a controlled range-orthogonal perturbation:
 * b = a * x_gen + scale * b_perp, where b_perp is the least-squares residual
 * of an independent Gaussian right-hand side.  Throws DegenerateNoise when
 * that residual is negligible (below 1e-10 of the sample norm).
 */
SyntheticSystem make_inconsistent(int m, int n, int l, int p, Rng& rng,
                                  double scale = 1e-4);

/// The six benchmark shape combinations for the factorized solvers, labelled
/// by whether u, v and the composed operator are over- or under-determined.
enum class FactorCase {
  u_over_v_under_a_under,   // m = 10, m1 = 5
  u_over_v_under_a_over,    // m = 30, m1 = 15
  u_over_v_over_a_over,     // m = 30, m1 = 25
  u_under_v_over_a_under,   // m = 10, m1 = 25
  u_under_v_over_a_over,    // m = 30, m1 = 35
  u_under_v_under_a_under,  // m = 10, m1 = 15
};

FactorCase parse_factor_case(const std::string& label);
std::string to_string(FactorCase c);

/// True for the cases with an over-determined outer factor; those carry the
/// convergence guarantee.
bool case_guaranteed(FactorCase c);

/// Shape of a benchmark case: m and m1 vary per case, n = 20, l = 10, p = 30.
struct FactorDims {
  int m, m1, n, l, p;
};
FactorDims factor_case_dims(FactorCase c);

/// Gaussian u, v and planted x_gen with range-orthogonal noise against the
/// composed operator u * v: b = u * v * x_gen + scale * b_perp.
SyntheticSystem make_factorized_case(FactorCase c, Rng& rng, double scale = 1e-4);

}  // namespace tblockgs
