#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "tblockgs/deblur.hpp"
#include "tblockgs/sampling.hpp"
#include "tblockgs/tensor.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

using namespace tblockgs;

namespace {

std::vector<Matrix> blur_all(const std::vector<Matrix>& frames,
                             const BlurKernel& kernel) {
  std::vector<Matrix> out;
  for (const Matrix& f : frames) out.push_back(circular_convolve(f, kernel));
  return out;
}

double frames_dist(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]).squaredNorm();
  return std::sqrt(s);
}

std::string temp_path(const char* name) {
  return std::string("tblockgs_test_") + name;
}

}  // namespace

TEST_CASE("kernel constructors") {
  const BlurKernel avg = averaging_kernel(5);
  REQUIRE(avg.k == 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) CHECK(avg.weights(i, j) == doctest::Approx(0.04));

  const BlurKernel point = gaussian_kernel(1, 2.5);
  REQUIRE(point.k == 1);
  CHECK(point.weights(0, 0) == doctest::Approx(1.0).epsilon(1e-12));

  const BlurKernel g = gaussian_kernel(5, 1.0);
  double sum = 0.0;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) sum += g.weights(i, j);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      CHECK(g.weights(2, 2) >= g.weights(i, j));
      // symmetric under quarter turns: w(i,j) = w(j, k-1-i)
      CHECK(g.weights(i, j) == doctest::Approx(g.weights(j, 4 - i)).epsilon(1e-12));
    }

  CHECK_THROWS_AS(gaussian_kernel(4, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(averaging_kernel(2), std::invalid_argument);
  CHECK_THROWS_AS(averaging_kernel(0), std::invalid_argument);
}

TEST_CASE("delta kernel produces the identity operator") {
  BlurKernel delta;
  delta.k = 1;
  delta.weights = Matrix::Ones(1, 1);
  const Tensor3 h = build_blur_tensor(delta, 4, 5);
  CHECK(h.rows() == 5);
  CHECK(h.cols() == 5);
  CHECK(h.depth() == 4);
  const Tensor3 id = Tensor3::identity(5, 4);
  CHECK(frob_norm(h - id) == 0.0);
}

TEST_CASE("normalized kernels preserve constant images") {
  const BlurKernel g = gaussian_kernel(3, 0.8);
  const Matrix constant = Matrix::Constant(6, 6, 0.37);
  const Matrix out = circular_convolve(constant, g);
  CHECK((out - constant).cwiseAbs().maxCoeff() <= 1e-12);

  // same property through the tensor operator
  const Tensor3 h = build_blur_tensor(g, 6, 6);
  const Tensor3 x = refold_video({constant});
  const std::vector<Matrix> back = unrefold_video(tprod(h, x), 6, 6, 1);
  CHECK((back[0] - constant).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("blur tensor equals the brute-force circular convolution") {
  Rng rng(3);
  const BlurKernel avg = averaging_kernel(3);
  Matrix frame(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) frame(i, j) = rng.normal();

  const Tensor3 h = build_blur_tensor(avg, 4, 4);
  const std::vector<Matrix> out = unrefold_video(tprod(h, refold_video({frame})), 4, 4, 1);
  const Matrix direct = circular_convolve(frame, avg);
  CHECK((out[0] - direct).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("blurring a refolded video matches per-frame convolution") {
  Rng rng(7);
  std::vector<Matrix> frames;
  for (int j = 0; j < 3; ++j) {
    Matrix f(8, 8);
    for (int i = 0; i < 64; ++i) f(i / 8, i % 8) = rng.normal();
    frames.push_back(f);
  }
  const BlurKernel g = gaussian_kernel(5, 1.3);
  const Tensor3 h = build_blur_tensor(g, 8, 8);
  const Tensor3 blurred = tprod(h, refold_video(frames));
  const std::vector<Matrix> got = unrefold_video(blurred, 8, 8, 3);
  double scale = 0.0, err = 0.0;
  for (int j = 0; j < 3; ++j) {
    const Matrix direct = circular_convolve(frames[j], g);
    err += (got[j] - direct).squaredNorm();
    scale += direct.squaredNorm();
  }
  CHECK(std::sqrt(err / scale) <= 1e-10);
}

TEST_CASE("kernel larger than the frame is rejected") {
  const BlurKernel g = gaussian_kernel(5, 1.0);
  CHECK_THROWS_AS(build_blur_tensor(g, 4, 8), std::invalid_argument);
  CHECK_THROWS_AS(build_blur_tensor(g, 8, 4), std::invalid_argument);
}

TEST_CASE("refolding round trip and shape checks") {
  Matrix single(1, 1);
  single(0, 0) = 0.42;
  const Tensor3 t = refold_video({single});
  CHECK(t.rows() == 1);
  CHECK(t.cols() == 1);
  CHECK(t.depth() == 1);
  CHECK(t(0, 0, 0) == 0.42);

  Rng rng(9);
  std::vector<Matrix> frames;
  for (int j = 0; j < 3; ++j) {
    Matrix f(5, 4);
    for (int i = 0; i < 20; ++i) f(i / 4, i % 4) = rng.normal();
    frames.push_back(f);
  }
  const Tensor3 folded = refold_video(frames);
  CHECK(folded.rows() == 4);   // columns of the frame
  CHECK(folded.cols() == 3);   // frame count
  CHECK(folded.depth() == 5);  // rows of the frame
  const std::vector<Matrix> back = unrefold_video(folded, 5, 4, 3);
  for (int j = 0; j < 3; ++j) CHECK((back[j] - frames[j]).cwiseAbs().maxCoeff() == 0.0);

  Matrix odd(3, 4);
  odd.setZero();
  CHECK_THROWS_AS(refold_video({frames[0], odd}), std::invalid_argument);
  CHECK_THROWS_AS(refold_video(std::vector<Matrix>{}), std::invalid_argument);
}

TEST_CASE("two-kernel composition associates") {
  Rng rng(11);
  Matrix f(6, 6);
  for (int i = 0; i < 36; ++i) f(i / 6, i % 6) = rng.normal();
  const Tensor3 u = build_blur_tensor(gaussian_kernel(3, 1.0), 6, 6);
  const Tensor3 v = build_blur_tensor(averaging_kernel(3), 6, 6);
  const Tensor3 x = refold_video({f});
  const Tensor3 lhs = tprod(u, tprod(v, x));
  const Tensor3 rhs = tprod(tprod(u, v), x);
  CHECK(frob_norm(lhs - rhs) <= 1e-12 * frob_norm(rhs));
}

TEST_CASE("deblurring with delta kernels recovers the input in one step") {
  Rng rng(13);
  const std::vector<Matrix> video = synthetic_video(6, 6, 2, rng);
  BlurKernel delta;
  delta.k = 1;
  delta.weights = Matrix::Ones(1, 1);

  SolverConfig cfg;
  cfg.max_iters = 1;
  cfg.seed = 1;
  const DeblurResult res = deblur(video, {delta, delta}, SolverKind::trbgs, cfg,
                                  /*block_size=*/6);
  CHECK_FALSE(res.factorized);
  REQUIRE(res.frames.size() == video.size());
  CHECK(frames_dist(res.frames, video) <= 1e-9);
}

TEST_CASE("factorized deblurring keeps the two blur stages separate") {
  Rng rng(17);
  const std::vector<Matrix> video = synthetic_video(8, 8, 2, rng);
  const BlurKernel g = gaussian_kernel(3, 1.0);
  const BlurKernel a = averaging_kernel(3);
  const std::vector<Matrix> blurred = blur_all(blur_all(video, g), a);

  SolverConfig cfg;
  cfg.max_iters = 300;
  cfg.seed = 3;
  cfg.trace_every = 300;
  const DeblurResult res = deblur(blurred, {g, a}, SolverKind::factrbgs, cfg, 4);
  CHECK(res.factorized);
  CHECK(res.outer.rows.size() >= 2);
  // the inner residual starts at zero (both iterates do), so judge progress
  // on the outer system, whose initial residual is the blurred video norm
  CHECK(res.outer.rows.back().raw_residual <
        res.outer.rows.front().raw_residual);

  CHECK_THROWS_AS(deblur(blurred, {g}, SolverKind::factrbgs, cfg, 4),
                  std::invalid_argument);
}

TEST_CASE("pgm round trip preserves quantized gray levels") {
  Matrix f(3, 4);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) f(i, j) = static_cast<double>((i * 4 + j) * 20) / 255.0;

  const std::string path = temp_path("roundtrip.pgm");
  write_pgm(path, f);
  const Matrix back = read_pgm(path);
  REQUIRE(back.rows() == 3);
  REQUIRE(back.cols() == 4);
  CHECK((back - f).cwiseAbs().maxCoeff() <= 1e-12);
  std::remove(path.c_str());

  // out-of-range values are clipped on write
  Matrix wild(1, 2);
  wild(0, 0) = -0.5;
  wild(0, 1) = 1.5;
  const std::string path2 = temp_path("clip.pgm");
  write_pgm(path2, wild);
  const Matrix clipped = read_pgm(path2);
  CHECK(clipped(0, 0) == 0.0);
  CHECK(clipped(0, 1) == 1.0);
  std::remove(path2.c_str());
}

TEST_CASE("pgm reader handles comments and rejects unsupported formats") {
  const std::string path = temp_path("comment.pgm");
  {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n# a comment line\n2 1\n255\n";
    out.put(static_cast<char>(0));
    out.put(static_cast<char>(255));
  }
  const Matrix m = read_pgm(path);
  REQUIRE(m.rows() == 1);
  REQUIRE(m.cols() == 2);
  CHECK(m(0, 0) == 0.0);
  CHECK(m(0, 1) == 1.0);
  std::remove(path.c_str());

  const std::string ascii = temp_path("ascii.pgm");
  {
    std::ofstream out(ascii, std::ios::binary);
    out << "P2\n2 1\n255\n0 255\n";
  }
  CHECK_THROWS_AS(read_pgm(ascii), std::runtime_error);
  std::remove(ascii.c_str());

  const std::string wide = temp_path("wide.pgm");
  {
    std::ofstream out(wide, std::ios::binary);
    out << "P5\n2 1\n65535\n";
    for (int i = 0; i < 4; ++i) out.put(static_cast<char>(0));
  }
  CHECK_THROWS_AS(read_pgm(wide), std::runtime_error);
  std::remove(wide.c_str());

  CHECK_THROWS_AS(read_pgm("does_not_exist.pgm"), std::runtime_error);
}

TEST_CASE("synthetic video is deterministic, in range, and correctly shaped") {
  Rng r1(21), r2(21);
  const std::vector<Matrix> v1 = synthetic_video(10, 12, 3, r1);
  const std::vector<Matrix> v2 = synthetic_video(10, 12, 3, r2);
  REQUIRE(v1.size() == 3);
  for (int j = 0; j < 3; ++j) {
    CHECK(v1[j].rows() == 10);
    CHECK(v1[j].cols() == 12);
    CHECK(v1[j].minCoeff() >= 0.0);
    CHECK(v1[j].maxCoeff() <= 1.0);
    CHECK((v1[j] - v2[j]).cwiseAbs().maxCoeff() == 0.0);
  }
}
