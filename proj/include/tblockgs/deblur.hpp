#pragma once

#include "tblockgs/sampling.hpp"
#include "tblockgs/solvers.hpp"
#include "tblockgs/tensor.hpp"

#include <string>
#include <vector>

namespace tblockgs {

/// Square 2-D convolution kernel of odd side length.
struct BlurKernel {
  int k = 1;
  Matrix weights;  ///< k x k
};

/// Sampled 2-D Gaussian, normalised to sum 1.
BlurKernel gaussian_kernel(int k, double sigma);

/// Uniform kernel, every entry 1/k^2.
BlurKernel averaging_kernel(int k);

/**
 * Circulant blur operator for m x n frames.  The kernel is zero-padded to
 * m x n with its center wrapped to index (0,0); the result H has dims
 * n x n x m, with frontal face r the circulant matrix of row r of the padded
 * kernel.  Applying H to a refolded video performs a per-frame 2-D circular
 * convolution with the kernel.
 */
Tensor3 build_blur_tensor(const BlurKernel& kernel, int frame_rows, int frame_cols);

/// Video frames (each rows x cols, values nominally in [0,1]) to the solver
/// layout: frame j, pixel (r, c) lands at tensor entry (c, j, r).
Tensor3 refold_video(const std::vector<Matrix>& frames);

/// Inverse of refold_video.
std::vector<Matrix> unrefold_video(const Tensor3& t, int frame_rows, int frame_cols,
                                   int frame_count);

/// Brute-force per-frame 2-D circular convolution; test oracle and reference
/// semantics for build_blur_tensor.
Matrix circular_convolve(const Matrix& frame, const BlurKernel& kernel);

enum class SolverKind { trbgs, trbags, factrbgs, factrbags };
SolverKind parse_solver_kind(const std::string& name);
std::string to_string(SolverKind kind);

struct DeblurResult {
  std::vector<Matrix> frames;  ///< recovered frames, clipped to [0,1]
  ConvergenceTrace trace;      ///< solver trace (computed before clipping)
  ConvergenceTrace outer;      ///< outer trace (factorized solvers only)
  bool factorized = false;
};

/**
 * Recover frames that were blurred by the given kernels applied in order.
 * The plain solvers run on the composed operator; the factorized solvers
 * require exactly two kernels and keep the two blur tensors separate.
 * Columns are sampled in contiguous blocks of block_size.
 */
DeblurResult deblur(const std::vector<Matrix>& blurred_frames,
                    const std::vector<BlurKernel>& kernels, SolverKind solver,
                    const SolverConfig& config, int block_size);

/// 8-bit binary PGM (P5) I/O with linear [0,255] <-> [0,1] mapping.
Matrix read_pgm(const std::string& path);
void write_pgm(const std::string& path, const Matrix& frame);

/// Smooth random frames (Gaussian-blurred noise, normalised to [0,1]) for
/// synthetic deblurring runs.
std::vector<Matrix> synthetic_video(int rows, int cols, int frame_count, Rng& rng);

}  // namespace tblockgs
