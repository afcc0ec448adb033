#include "tblockgs/solvers.hpp"

#include "tblockgs/analysis.hpp"
#include "tblockgs/oracle.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace tblockgs {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

long long elapsed_ns(Clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0)
      .count();
}

double rel_to(const Tensor3& x, const Tensor3& ref, double ref_norm) {
  Tensor3 d = x;
  d -= ref;
  return frob_norm(d) / (ref_norm > 0.0 ? ref_norm : 1.0);
}

/// Distance between the running residual and the reference residual; equals
/// ||a x - a x_ref||_F because the b terms cancel.
double res_to(const Tensor3& r, const Tensor3& r_ref) {
  Tensor3 d = r;
  d -= r_ref;
  return frob_norm(d);
}

struct Recorder {
  ConvergenceTrace* trace;
  long every;
  long max_iters;
  Clock::time_point t0 = Clock::now();

  bool due(long k) const {
    return k % every == 0 || k == max_iters;
  }
  void push(long k, double rel, double res, double raw, int b1, int b2) {
    trace->rows.push_back({k, rel, res, raw, elapsed_ns(t0), b1, b2});
  }
};

void warn_stepsize(const char* solver, double omega, double sigma_sq) {
  std::fprintf(stderr,
               "tblockgs: %s step size omega=%g violates 2*omega - omega^2*sigma^2 > 0 "
               "(sigma^2=%g); the expected-rate guarantee is void and the iteration "
               "may diverge\n",
               solver, omega, sigma_sq);
}

void check_system(const Tensor3& a, const Tensor3& b, const BlockSet& blocks,
                  const char* who) {
  if (a.rows() != b.rows() || a.depth() != b.depth())
    throw std::invalid_argument(std::string(who) + ": operator and rhs dimensions differ");
  if (blocks.n() != a.cols())
    throw std::invalid_argument(std::string(who) + ": block set does not match operator");
}

}  // namespace

void SolverConfig::validate() const {
  if (max_iters < 1) throw std::invalid_argument("SolverConfig: max_iters < 1");
  if (trace_every < 1) throw std::invalid_argument("SolverConfig: trace_every < 1");
  if (!(omega > 0.0) || !std::isfinite(omega))
    throw std::invalid_argument("SolverConfig: omega must be positive");
  if (!(omega1 > 0.0) || !std::isfinite(omega1))
    throw std::invalid_argument("SolverConfig: omega1 must be positive");
  if (!(omega2 > 0.0) || !std::isfinite(omega2))
    throw std::invalid_argument("SolverConfig: omega2 must be positive");
}

Tensor3 residual(const Tensor3& a, const Tensor3& x, const Tensor3& b) {
  Tensor3 r = tprod(a, x);
  r -= b;
  return r;
}

void residual_increment(Tensor3& r, const Tensor3& a_block, const Tensor3& delta_block) {
  r += tprod(a_block, delta_block);
}

namespace {

/// Shared driver for the two single-operator solvers.  step() must return the
/// block update w (the amount subtracted from the block rows of x) for the
/// sampled block.
template <typename Step>
SolveResult run_plain(const Tensor3& a, const Tensor3& b, const BlockSet& blocks,
                      const SolverConfig& cfg, const Tensor3* x_ref,
                      const IterationObserver& observer, const char* who,
                      bool warned, Step step,
                      const std::function<const Tensor3&(std::size_t)>& block_of) {
  check_system(a, b, blocks, who);
  cfg.validate();

  SolveResult result;
  result.stepsize_warning = warned;
  ConvergenceTrace& trace = result.trace;
  trace.has_oracle = x_ref != nullptr;

  Rng rng(cfg.seed);
  Tensor3 x(a.cols(), b.cols(), a.depth());
  Tensor3 r = b;
  r *= -1.0;  // residual at x = 0

  Tensor3 r_ref;
  double x_ref_norm = 0.0;
  if (x_ref) {
    r_ref = residual(a, *x_ref, b);
    x_ref_norm = frob_norm(*x_ref);
  }

  Recorder rec{&trace, cfg.trace_every, cfg.max_iters};
  auto record = [&](long k, int blk) {
    const double raw = frob_norm(r);
    if (x_ref)
      rec.push(k, rel_to(x, *x_ref, x_ref_norm), res_to(r, r_ref), raw, blk, -1);
    else
      rec.push(k, kNaN, kNaN, raw, blk, -1);
  };
  record(0, -1);

  for (long k = 1; k <= cfg.max_iters; ++k) {
    const std::size_t i = blocks.sample(rng);
    const Tensor3 w = step(i, r);
    apply_selector_add(x, blocks.block(i), w, -1.0);
    if (cfg.residual_mode == ResidualMode::recompute) {
      r = residual(a, x, b);
    } else {
      Tensor3 delta = w;
      delta *= -1.0;
      residual_increment(r, block_of(i), delta);
    }
    if (!std::isfinite(frob_norm(r))) {
      trace.diverged = true;
      break;
    }
    if (observer) observer(k, x, i);
    if (rec.due(k)) record(k, static_cast<int>(i));
  }

  result.x = std::move(x);
  return result;
}

}  // namespace

SolveResult trbgs(const Tensor3& a, const Tensor3& b, const BlockSet& blocks,
                  const SolverConfig& config, const Tensor3* x_ref,
                  const IterationObserver& observer) {
  BlockPinvCache cache(a, blocks);
  return run_plain(
      a, b, blocks, config, x_ref, observer, "trbgs", false,
      [&](std::size_t i, const Tensor3& r) { return cache.apply(i, r); },
      [&](std::size_t i) -> const Tensor3& { return cache.block_tensor(i); });
}

SolveResult trbags(const Tensor3& a, const Tensor3& b, const BlockSet& blocks,
                   const SolverConfig& config, const Tensor3* x_ref,
                   const IterationObserver& observer) {
  if (!blocks.uniform_weights())
    throw std::invalid_argument("trbags: block weights must be uniform");

  const double sigma_sq = sigma_sq_blocks(a, blocks);
  const bool warned = 2.0 * config.omega - config.omega * config.omega * sigma_sq <= 0.0;
  if (warned) warn_stepsize("trbags", config.omega, sigma_sq);

  std::vector<Tensor3> block_cache(blocks.size());
  std::vector<Tensor3> adjoint_cache(blocks.size());
  auto block_of = [&](std::size_t i) -> const Tensor3& {
    if (block_cache[i].empty()) {
      block_cache[i] = column_block(a, blocks.block(i));
      adjoint_cache[i] = conj_transpose(block_cache[i]);
    }
    return block_cache[i];
  };

  return run_plain(
      a, b, blocks, config, x_ref, observer, "trbags", warned,
      [&](std::size_t i, const Tensor3& r) {
        block_of(i);
        Tensor3 w = tprod(adjoint_cache[i], r);
        w *= config.omega;
        return w;
      },
      block_of);
}

namespace {

void check_factorized(const FactorizedOperator& op, const Tensor3& b,
                      const BlockSet& tu, const BlockSet& tv, const char* who) {
  if (op.u.cols() != op.v.rows() || op.u.depth() != op.v.depth())
    throw std::invalid_argument(std::string(who) + ": factors not conformable");
  if (op.u.rows() != b.rows() || op.u.depth() != b.depth())
    throw std::invalid_argument(std::string(who) + ": rhs does not match outer factor");
  if (tu.n() != op.u.cols())
    throw std::invalid_argument(std::string(who) + ": outer block set mismatch");
  if (tv.n() != op.v.cols())
    throw std::invalid_argument(std::string(who) + ": inner block set mismatch");
}

/// Shared driver for the factorized solvers.  outer_step / inner_step return
/// the block update subtracted from z / x respectively.
template <typename OuterStep, typename InnerStep>
FacSolveResult run_factorized(const FactorizedOperator& op, const Tensor3& b,
                              const BlockSet& tu, const BlockSet& tv,
                              const SolverConfig& cfg, const Tensor3* z_ref,
                              const Tensor3* x_ref, const char* who, bool warned,
                              OuterStep outer_step, InnerStep inner_step,
                              const std::function<const Tensor3&(std::size_t)>& u_block_of,
                              const std::function<const Tensor3&(std::size_t)>& v_block_of) {
  check_factorized(op, b, tu, tv, who);
  cfg.validate();

  const Tensor3& u = op.u;
  const Tensor3& v = op.v;
  const int l = b.cols();
  const int p = b.depth();

  FacSolveResult result;
  result.stepsize_warning = warned;
  result.outer.has_oracle = z_ref != nullptr;
  result.inner.has_oracle = x_ref != nullptr;

  Rng rng(cfg.seed);
  Tensor3 z(u.cols(), l, p);
  Tensor3 x(v.cols(), l, p);
  Tensor3 r1 = b;
  r1 *= -1.0;  // outer residual at z = 0
  Tensor3 vx(v.rows(), l, p);  // v * x, maintained in incremental mode

  Tensor3 r1_ref, vx_ref;
  double z_ref_norm = 0.0, x_ref_norm = 0.0;
  if (z_ref) {
    r1_ref = residual(u, *z_ref, b);
    z_ref_norm = frob_norm(*z_ref);
  }
  if (x_ref) {
    vx_ref = tprod(v, *x_ref);
    x_ref_norm = frob_norm(*x_ref);
  }

  const auto t0 = Clock::now();
  auto record = [&](long k, int bu, int bv, const Tensor3& vx_now) {
    const long long ns = elapsed_ns(t0);
    {
      const double raw = frob_norm(r1);
      TraceRow row{k, kNaN, kNaN, raw, ns, bu, -1};
      if (z_ref) {
        row.rel_err = rel_to(z, *z_ref, z_ref_norm);
        row.res_err = res_to(r1, r1_ref);
      }
      result.outer.rows.push_back(row);
    }
    {
      Tensor3 ri = vx_now;
      ri -= z;
      const double raw = frob_norm(ri);
      TraceRow row{k, kNaN, kNaN, raw, ns, bu, bv};
      if (x_ref) {
        row.rel_err = rel_to(x, *x_ref, x_ref_norm);
        row.res_err = res_to(vx_now, vx_ref);
      }
      result.inner.rows.push_back(row);
    }
  };
  record(0, -1, -1, vx);

  const bool incremental = cfg.residual_mode == ResidualMode::incremental;
  for (long k = 1; k <= cfg.max_iters; ++k) {
    const std::size_t i = tu.sample(rng);
    const Tensor3 w1 = outer_step(i, r1);
    apply_selector_add(z, tu.block(i), w1, -1.0);
    if (incremental) {
      Tensor3 delta = w1;
      delta *= -1.0;
      residual_increment(r1, u_block_of(i), delta);
    } else {
      r1 = residual(u, z, b);
    }

    const std::size_t j = tv.sample(rng);
    if (!incremental) vx = tprod(v, x);  // v x^{k-1}
    Tensor3 r2 = vx;
    r2 -= z;
    const Tensor3 w2 = inner_step(j, r2);
    apply_selector_add(x, tv.block(j), w2, -1.0);
    if (incremental) {
      Tensor3 delta = w2;
      delta *= -1.0;
      residual_increment(vx, v_block_of(j), delta);
    }

    if (!std::isfinite(frob_norm(r1)) || !std::isfinite(frob_norm(r2))) {
      result.inner.diverged = true;
      result.outer.diverged = true;
      break;
    }

    if (k % cfg.trace_every == 0 || k == cfg.max_iters) {
      if (incremental) {
        record(k, static_cast<int>(i), static_cast<int>(j), vx);
      } else {
        const Tensor3 vx_now = tprod(v, x);
        record(k, static_cast<int>(i), static_cast<int>(j), vx_now);
      }
    }
  }

  result.x = std::move(x);
  result.z = std::move(z);
  return result;
}

}  // namespace

FacSolveResult factrbgs(const FactorizedOperator& op, const Tensor3& b,
                        const BlockSet& u_blocks, const BlockSet& v_blocks,
                        const SolverConfig& config, const Tensor3* z_ref,
                        const Tensor3* x_ref) {
  BlockPinvCache u_cache(op.u, u_blocks);
  BlockPinvCache v_cache(op.v, v_blocks);
  return run_factorized(
      op, b, u_blocks, v_blocks, config, z_ref, x_ref, "factrbgs", false,
      [&](std::size_t i, const Tensor3& r) { return u_cache.apply(i, r); },
      [&](std::size_t j, const Tensor3& r) { return v_cache.apply(j, r); },
      [&](std::size_t i) -> const Tensor3& { return u_cache.block_tensor(i); },
      [&](std::size_t j) -> const Tensor3& { return v_cache.block_tensor(j); });
}

FacSolveResult factrbags(const FactorizedOperator& op, const Tensor3& b,
                         const BlockSet& u_blocks, const BlockSet& v_blocks,
                         const SolverConfig& config, const Tensor3* z_ref,
                         const Tensor3* x_ref) {
  if (!u_blocks.uniform_weights() || !v_blocks.uniform_weights())
    throw std::invalid_argument("factrbags: block weights must be uniform");

  const double sigma_sq_u = sigma_sq_blocks(op.u, u_blocks);
  const double sigma_sq_v = sigma_sq_blocks(op.v, v_blocks);
  bool warned = false;
  if (2.0 * config.omega1 - config.omega1 * config.omega1 * sigma_sq_u <= 0.0) {
    warn_stepsize("factrbags (outer)", config.omega1, sigma_sq_u);
    warned = true;
  }
  if (2.0 * config.omega2 - config.omega2 * config.omega2 * sigma_sq_v <= 0.0) {
    warn_stepsize("factrbags (inner)", config.omega2, sigma_sq_v);
    warned = true;
  }

  std::vector<Tensor3> u_block(u_blocks.size()), u_adj(u_blocks.size());
  std::vector<Tensor3> v_block(v_blocks.size()), v_adj(v_blocks.size());
  auto u_block_of = [&](std::size_t i) -> const Tensor3& {
    if (u_block[i].empty()) {
      u_block[i] = column_block(op.u, u_blocks.block(i));
      u_adj[i] = conj_transpose(u_block[i]);
    }
    return u_block[i];
  };
  auto v_block_of = [&](std::size_t j) -> const Tensor3& {
    if (v_block[j].empty()) {
      v_block[j] = column_block(op.v, v_blocks.block(j));
      v_adj[j] = conj_transpose(v_block[j]);
    }
    return v_block[j];
  };

  return run_factorized(
      op, b, u_blocks, v_blocks, config, z_ref, x_ref, "factrbags", warned,
      [&](std::size_t i, const Tensor3& r) {
        u_block_of(i);
        Tensor3 w = tprod(u_adj[i], r);
        w *= config.omega1;
        return w;
      },
      [&](std::size_t j, const Tensor3& r) {
        v_block_of(j);
        Tensor3 w = tprod(v_adj[j], r);
        w *= config.omega2;
        return w;
      },
      u_block_of, v_block_of);
}

}  // namespace tblockgs
