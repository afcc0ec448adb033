#include "tblockgs/deblur.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace tblockgs {

BlurKernel gaussian_kernel(int k, double sigma) {
  if (k < 1 || k % 2 == 0)
    throw std::invalid_argument("gaussian_kernel: side length must be odd");
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_kernel: sigma must be positive");
  BlurKernel kernel;
  kernel.k = k;
  kernel.weights = Matrix(k, k);
  const int c = k / 2;
  double total = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const double di = i - c, dj = j - c;
      const double w = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
      kernel.weights(i, j) = w;
      total += w;
    }
  kernel.weights /= total;
  return kernel;
}

BlurKernel averaging_kernel(int k) {
  if (k < 1 || k % 2 == 0)
    throw std::invalid_argument("averaging_kernel: side length must be odd");
  BlurKernel kernel;
  kernel.k = k;
  kernel.weights = Matrix::Constant(k, k, 1.0 / (static_cast<double>(k) * k));
  return kernel;
}

Tensor3 build_blur_tensor(const BlurKernel& kernel, int frame_rows, int frame_cols) {
  const int m = frame_rows, n = frame_cols, k = kernel.k;
  if (k > m || k > n)
    throw std::invalid_argument("build_blur_tensor: kernel larger than frame");

  // zero-pad with the kernel center wrapped to index (0,0)
  Matrix padded = Matrix::Zero(m, n);
  const int c = k / 2;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const int r = ((i - c) % m + m) % m;
      const int s = ((j - c) % n + n) % n;
      padded(r, s) = kernel.weights(i, j);
    }

  // frontal face r is the circulant matrix of padded row r
  Tensor3 h(n, n, m);
  for (int r = 0; r < m; ++r)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) h(i, j, r) = padded(r, ((i - j) % n + n) % n);
  return h;
}

Matrix circular_convolve(const Matrix& frame, const BlurKernel& kernel) {
  const int m = static_cast<int>(frame.rows());
  const int n = static_cast<int>(frame.cols());
  const int c = kernel.k / 2;
  Matrix out = Matrix::Zero(m, n);
  for (int r = 0; r < m; ++r)
    for (int s = 0; s < n; ++s) {
      double acc = 0.0;
      for (int i = 0; i < kernel.k; ++i)
        for (int j = 0; j < kernel.k; ++j) {
          const int rr = ((r - (i - c)) % m + m) % m;
          const int ss = ((s - (j - c)) % n + n) % n;
          acc += kernel.weights(i, j) * frame(rr, ss);
        }
      out(r, s) = acc;
    }
  return out;
}

Tensor3 refold_video(const std::vector<Matrix>& frames) {
  if (frames.empty()) throw std::invalid_argument("refold_video: no frames");
  const int m = static_cast<int>(frames[0].rows());
  const int n = static_cast<int>(frames[0].cols());
  const int p = static_cast<int>(frames.size());
  for (const Matrix& f : frames)
    if (f.rows() != m || f.cols() != n)
      throw std::invalid_argument("refold_video: inconsistent frame dimensions");
  Tensor3 t(n, p, m);
  for (int j = 0; j < p; ++j)
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < n; ++c) t(c, j, r) = frames[j](r, c);
  return t;
}

std::vector<Matrix> unrefold_video(const Tensor3& t, int frame_rows, int frame_cols,
                                   int frame_count) {
  if (t.rows() != frame_cols || t.cols() != frame_count || t.depth() != frame_rows)
    throw std::invalid_argument("unrefold_video: dimensions do not match tensor");
  std::vector<Matrix> frames(frame_count, Matrix(frame_rows, frame_cols));
  for (int j = 0; j < frame_count; ++j)
    for (int r = 0; r < frame_rows; ++r)
      for (int c = 0; c < frame_cols; ++c) frames[j](r, c) = t(c, j, r);
  return frames;
}

SolverKind parse_solver_kind(const std::string& name) {
  if (name == "trbgs") return SolverKind::trbgs;
  if (name == "trbags") return SolverKind::trbags;
  if (name == "factrbgs") return SolverKind::factrbgs;
  if (name == "factrbags") return SolverKind::factrbags;
  throw std::invalid_argument("unknown solver: " + name);
}

std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::trbgs: return "trbgs";
    case SolverKind::trbags: return "trbags";
    case SolverKind::factrbgs: return "factrbgs";
    case SolverKind::factrbags: return "factrbags";
  }
  throw std::invalid_argument("unknown solver kind");
}

DeblurResult deblur(const std::vector<Matrix>& blurred_frames,
                    const std::vector<BlurKernel>& kernels, SolverKind solver,
                    const SolverConfig& config, int block_size) {
  if (blurred_frames.empty()) throw std::invalid_argument("deblur: no frames");
  if (kernels.empty()) throw std::invalid_argument("deblur: no kernels");
  const int m = static_cast<int>(blurred_frames[0].rows());
  const int n = static_cast<int>(blurred_frames[0].cols());
  const int p = static_cast<int>(blurred_frames.size());

  const Tensor3 y = refold_video(blurred_frames);

  DeblurResult result;
  Tensor3 x;
  const bool factorized =
      solver == SolverKind::factrbgs || solver == SolverKind::factrbags;
  if (factorized) {
    if (kernels.size() != 2)
      throw std::invalid_argument("deblur: factorized solvers need exactly two kernels");
    FactorizedOperator op;
    op.v = build_blur_tensor(kernels[0], m, n);  // applied first when blurring
    op.u = build_blur_tensor(kernels[1], m, n);
    const BlockSet tu = BlockSet::partition(n, block_size);
    const BlockSet tv = BlockSet::partition(n, block_size);
    FacSolveResult run = solver == SolverKind::factrbgs
                             ? factrbgs(op, y, tu, tv, config)
                             : factrbags(op, y, tu, tv, config);
    x = std::move(run.x);
    result.trace = std::move(run.inner);
    result.outer = std::move(run.outer);
    result.factorized = true;
  } else {
    Tensor3 h = build_blur_tensor(kernels[0], m, n);
    for (std::size_t i = 1; i < kernels.size(); ++i)
      h = tprod(build_blur_tensor(kernels[i], m, n), h);
    const BlockSet blocks = BlockSet::partition(n, block_size);
    SolveResult run = solver == SolverKind::trbgs ? trbgs(h, y, blocks, config)
                                                  : trbags(h, y, blocks, config);
    x = std::move(run.x);
    result.trace = std::move(run.trace);
  }

  result.frames = unrefold_video(x, m, n, p);
  for (Matrix& f : result.frames)
    f = f.unaryExpr([](double v) { return std::clamp(v, 0.0, 1.0); });
  return result;
}

Matrix read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);

  auto next_token = [&in, &path]() -> std::string {
    std::string tok;
    int ch;
    while ((ch = in.get()) != EOF) {
      if (ch == '#') {
        while ((ch = in.get()) != EOF && ch != '\n') {
        }
        continue;
      }
      if (std::isspace(ch)) {
        if (!tok.empty()) return tok;
        continue;
      }
      tok.push_back(static_cast<char>(ch));
    }
    if (tok.empty()) throw std::runtime_error("truncated PGM header in " + path);
    return tok;
  };

  if (next_token() != "P5") throw std::runtime_error("not a binary PGM: " + path);
  const int cols = std::stoi(next_token());
  const int rows = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  if (cols <= 0 || rows <= 0 || maxval <= 0 || maxval > 255)
    throw std::runtime_error("unsupported PGM header in " + path);

  std::vector<unsigned char> raw(static_cast<std::size_t>(rows) * cols);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size()))
    throw std::runtime_error("truncated PGM data in " + path);

  Matrix frame(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      frame(r, c) = raw[static_cast<std::size_t>(r) * cols + c] /
                    static_cast<double>(maxval);
  return frame;
}

void write_pgm(const std::string& path, const Matrix& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  const int rows = static_cast<int>(frame.rows());
  const int cols = static_cast<int>(frame.cols());
  out << "P5\n" << cols << ' ' << rows << "\n255\n";
  std::vector<unsigned char> raw(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const double v = std::clamp(frame(r, c), 0.0, 1.0);
      raw[static_cast<std::size_t>(r) * cols + c] =
          static_cast<unsigned char>(std::lround(v * 255.0));
    }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<Matrix> synthetic_video(int rows, int cols, int frame_count, Rng& rng) {
  const BlurKernel smooth = gaussian_kernel(5, 1.5);
  std::vector<Matrix> frames;
  frames.reserve(frame_count);
  for (int j = 0; j < frame_count; ++j) {
    Matrix noise(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) noise(r, c) = rng.normal();
    Matrix f = circular_convolve(noise, smooth);
    const double lo = f.minCoeff(), hi = f.maxCoeff();
    f = (f.array() - lo) / (hi > lo ? hi - lo : 1.0);
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace tblockgs
