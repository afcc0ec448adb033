#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "tblockgs/tensor.hpp"

#include <Eigen/SVD>

#include <cstdio>
#include <random>
#include <vector>

using namespace tblockgs;

namespace {

Tensor3 rand_tensor(int m, int n, int p, std::mt19937_64& gen) {
  std::normal_distribution<double> dist;
  Tensor3 t(m, n, p);
  for (int k = 0; k < p; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < m; ++i) t(i, j, k) = dist(gen);
  return t;
}

double rel_diff(const Tensor3& a, const Tensor3& b) {
  Tensor3 d = a;
  d -= b;
  const double scale = frob_norm(b);
  return frob_norm(d) / (scale > 0.0 ? scale : 1.0);
}

}  // namespace

TEST_CASE("tube product, frozen example") {
  // 1x1x2 tubes a=(1,2), b=(3,4): bcirc(a) = [[1,2],[2,1]], so the product
  // tube is (1*3+2*4, 2*3+1*4) = (11, 10).
  Tensor3 a(1, 1, 2), b(1, 1, 2);
  a(0, 0, 0) = 1;
  a(0, 0, 1) = 2;
  b(0, 0, 0) = 3;
  b(0, 0, 1) = 4;
  const Tensor3 c = tprod(a, b);
  CHECK(c(0, 0, 0) == doctest::Approx(11.0));
  CHECK(c(0, 0, 1) == doctest::Approx(10.0));
}

TEST_CASE("bcirc of a 1x1x3 tube") {
  Tensor3 t(1, 1, 3);
  const double a = 2.5, b = -1.0, c = 7.0;
  t(0, 0, 0) = a;
  t(0, 0, 1) = b;
  t(0, 0, 2) = c;
  const Matrix m = bcirc(t);
  REQUIRE(m.rows() == 3);
  REQUIRE(m.cols() == 3);
  // [[a,c,b],[b,a,c],[c,b,a]]
  CHECK(m(0, 0) == a);
  CHECK(m(0, 1) == c);
  CHECK(m(0, 2) == b);
  CHECK(m(1, 0) == b);
  CHECK(m(1, 1) == a);
  CHECK(m(1, 2) == c);
  CHECK(m(2, 0) == c);
  CHECK(m(2, 1) == b);
  CHECK(m(2, 2) == a);
}

TEST_CASE("bcirc at depth 1 is the slice itself") {
  std::mt19937_64 gen(11);
  const Tensor3 t = rand_tensor(4, 3, 1, gen);
  const Matrix m = bcirc(t);
  CHECK((m - t.slice(0)).norm() == 0.0);
}

TEST_CASE("bcirc of the identity tensor is the identity matrix") {
  const Tensor3 id = Tensor3::identity(4, 3);
  const Matrix m = bcirc(id);
  CHECK((m - Eigen::MatrixXd::Identity(12, 12)).norm() == 0.0);
}

TEST_CASE("unfold stacks frontal slices vertically") {
  Tensor3 t(2, 1, 2);
  t(0, 0, 0) = 1;
  t(1, 0, 0) = 2;
  t(0, 0, 1) = 3;
  t(1, 0, 1) = 4;
  const Matrix m = unfold(t);
  REQUIRE(m.rows() == 4);
  REQUIRE(m.cols() == 1);
  CHECK(m(0, 0) == 1);
  CHECK(m(1, 0) == 2);
  CHECK(m(2, 0) == 3);
  CHECK(m(3, 0) == 4);
}

TEST_CASE("fold inverts unfold bitwise") {
  std::mt19937_64 gen(22);
  std::uniform_int_distribution<int> dim(1, 6);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = dim(gen) % 6 + 1, n = dim(gen) % 5 + 1, p = dim(gen) % 4 + 1;
    const Tensor3 t = rand_tensor(m, n, p, gen);
    const Tensor3 back = fold(unfold(t), m, p);
    REQUIRE(back.same_dims(t));
    for (int k = 0; k < p; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < m; ++i) CHECK(back(i, j, k) == t(i, j, k));
  }
}

TEST_CASE("fold rejects row counts not divisible by the depth") {
  Matrix m = Matrix::Zero(7, 2);
  CHECK_THROWS(fold(m, 2, 3));
}

TEST_CASE("unfold at depth 1 equals the single slice") {
  std::mt19937_64 gen(33);
  const Tensor3 t = rand_tensor(3, 4, 1, gen);
  CHECK((unfold(t) - t.slice(0)).norm() == 0.0);
}

TEST_CASE("tprod with the identity tensor") {
  std::mt19937_64 gen(44);
  const Tensor3 b = rand_tensor(4, 3, 5, gen);
  const Tensor3 id = Tensor3::identity(4, 5);
  CHECK(rel_diff(tprod(id, b), b) <= 1e-14);
}

TEST_CASE("tprod at depth 1 is the matrix product") {
  std::mt19937_64 gen(55);
  const Tensor3 a = rand_tensor(4, 3, 1, gen);
  const Tensor3 b = rand_tensor(3, 2, 1, gen);
  const Tensor3 c = tprod(a, b);
  const Matrix expect = a.slice(0) * b.slice(0);
  CHECK((c.slice(0) - expect).norm() <= 1e-12 * expect.norm());
}

TEST_CASE("tprod fast path matches the bcirc reference") {
  std::mt19937_64 gen(66);
  std::uniform_int_distribution<int> dim(1, 6);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = dim(gen), n = dim(gen) % 5 + 1, l = dim(gen) % 4 + 1,
              p = dim(gen) % 4 + 1;
    const Tensor3 a = rand_tensor(m, n, p, gen);
    const Tensor3 b = rand_tensor(n, l, p, gen);
    CHECK(rel_diff(tprod(a, b), tprod_reference(a, b)) <= 1e-10);
  }
}

TEST_CASE("tprod rejects mismatched dims") {
  std::mt19937_64 gen(77);
  const Tensor3 a = rand_tensor(3, 4, 2, gen);
  CHECK_THROWS(tprod(a, rand_tensor(5, 2, 2, gen)));  // inner dim
  CHECK_THROWS(tprod(a, rand_tensor(4, 2, 3, gen)));  // depth
}

TEST_CASE("bcirc is a homomorphism for tprod") {
  std::mt19937_64 gen(88);
  std::uniform_int_distribution<int> dim(1, 5);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = dim(gen), n = dim(gen) % 4 + 1, l = dim(gen) % 3 + 1,
              p = dim(gen) % 3 + 1;
    const Tensor3 a = rand_tensor(m, n, p, gen);
    const Tensor3 b = rand_tensor(n, l, p, gen);
    const Matrix lhs = bcirc(tprod(a, b));
    const Matrix rhs = bcirc(a) * bcirc(b);
    CHECK((lhs - rhs).norm() <= 1e-10 * (rhs.norm() + 1.0));
  }
}

TEST_CASE("tprod is associative") {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor3 a = rand_tensor(4, 3, 3, gen);
    const Tensor3 b = rand_tensor(3, 5, 3, gen);
    const Tensor3 c = rand_tensor(5, 2, 3, gen);
    CHECK(rel_diff(tprod(tprod(a, b), c), tprod(a, tprod(b, c))) <= 1e-10);
  }
}

TEST_CASE("conj_transpose of a tube reverses the tail") {
  Tensor3 t(1, 1, 3);
  t(0, 0, 0) = 1;
  t(0, 0, 1) = 2;
  t(0, 0, 2) = 3;
  const Tensor3 s = conj_transpose(t);
  CHECK(s(0, 0, 0) == 1);
  CHECK(s(0, 0, 1) == 3);
  CHECK(s(0, 0, 2) == 2);
}

TEST_CASE("conj_transpose at depth 1 is the matrix transpose") {
  std::mt19937_64 gen(111);
  const Tensor3 t = rand_tensor(4, 3, 1, gen);
  const Tensor3 s = conj_transpose(t);
  CHECK((s.slice(0) - t.slice(0).transpose()).norm() == 0.0);
}

TEST_CASE("conj_transpose is an involution") {
  std::mt19937_64 gen(122);
  const Tensor3 t = rand_tensor(4, 3, 5, gen);
  const Tensor3 back = conj_transpose(conj_transpose(t));
  REQUIRE(back.same_dims(t));
  CHECK(rel_diff(back, t) == 0.0);
}

TEST_CASE("bcirc of the conj transpose is the transposed bcirc, exactly") {
  std::mt19937_64 gen(133);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor3 t = rand_tensor(4, 3, 5, gen);
    const Matrix lhs = bcirc(conj_transpose(t));
    const Matrix rhs = bcirc(t).transpose();
    CHECK((lhs - rhs).norm() == 0.0);  // pure entry permutation
  }
}

TEST_CASE("inner product and Frobenius norm") {
  std::mt19937_64 gen(144);
  const Tensor3 a = rand_tensor(3, 4, 2, gen);
  const Tensor3 b = rand_tensor(3, 4, 2, gen);
  CHECK(inner(a, a) == doctest::Approx(frob_norm(a) * frob_norm(a)));
  CHECK(frob_norm(a) == doctest::Approx(unfold(a).norm()));

  Tensor3 zero(3, 4, 2);
  CHECK(frob_norm(zero) == 0.0);

  // symmetry
  CHECK(inner(a, b) == doctest::Approx(inner(b, a)));
  CHECK_THROWS(inner(a, rand_tensor(3, 4, 3, gen)));
}

TEST_CASE("spectral sandwich of the t-product") {
  // sigma_min^2(bcirc M) ||Y||^2 <= ||M Y||^2 <= sigma_max^2(bcirc M) ||Y||^2
  std::mt19937_64 gen(155);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor3 m = rand_tensor(5, 3, 2, gen);
    const Tensor3 y = rand_tensor(3, 2, 2, gen);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(bcirc(m)));
    const auto& sv = svd.singularValues();
    const double smax = sv(0), smin = sv(sv.size() - 1);
    const double prod_sq = std::pow(frob_norm(tprod(m, y)), 2);
    const double y_sq = std::pow(frob_norm(y), 2);
    CHECK(prod_sq <= smax * smax * y_sq * (1.0 + 1e-10));
    CHECK(prod_sq >= smin * smin * y_sq * (1.0 - 1e-10));
  }
}

TEST_CASE("column_block with the full index set returns the tensor") {
  std::mt19937_64 gen(166);
  const Tensor3 a = rand_tensor(5, 6, 3, gen);
  const std::vector<int> all{0, 1, 2, 3, 4, 5};
  const Tensor3 blk = column_block(a, all);
  REQUIRE(blk.same_dims(a));
  CHECK(rel_diff(blk, a) == 0.0);
}

TEST_CASE("column_block agrees with multiplication by the selector tensor") {
  std::mt19937_64 gen(177);
  const Tensor3 a = rand_tensor(5, 6, 3, gen);
  const std::vector<int> tau{1, 4};
  const Tensor3 sel = selector_tensor(6, tau, 3);
  CHECK(rel_diff(tprod(a, sel), column_block(a, tau)) <= 1e-12);
}

TEST_CASE("column_block rejects bad indices") {
  std::mt19937_64 gen(188);
  const Tensor3 a = rand_tensor(4, 5, 2, gen);
  CHECK_THROWS(column_block(a, std::vector<int>{}));
  CHECK_THROWS(column_block(a, std::vector<int>{2, 2}));
  CHECK_THROWS(column_block(a, std::vector<int>{3, 5}));
  CHECK_THROWS(column_block(a, std::vector<int>{-1}));
}

TEST_CASE("apply_selector scatters rows of the update") {
  std::mt19937_64 gen(199);
  const Tensor3 u = rand_tensor(2, 3, 2, gen);
  const std::vector<int> tau{0, 3};
  Tensor3 zero(5, 3, 2);
  const Tensor3 out = apply_selector(zero, tau, u);
  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < 3; ++j) {
      CHECK(out(0, j, k) == u(0, j, k));
      CHECK(out(3, j, k) == u(1, j, k));
      CHECK(out(1, j, k) == 0.0);
      CHECK(out(2, j, k) == 0.0);
      CHECK(out(4, j, k) == 0.0);
    }

  // matches the materialised product x + E_tau * u
  const Tensor3 sel = selector_tensor(5, tau, 2);
  const Tensor3 x = rand_tensor(5, 3, 2, gen);
  const Tensor3 expect = x + tprod(sel, u);
  CHECK(rel_diff(apply_selector(x, tau, u), expect) <= 1e-12);
}

TEST_CASE("apply_selector_add scales the scattered update") {
  std::mt19937_64 gen(211);
  const Tensor3 u = rand_tensor(2, 3, 2, gen);
  const std::vector<int> tau{1, 2};
  const Tensor3 x0 = rand_tensor(4, 3, 2, gen);
  Tensor3 x = x0;
  apply_selector_add(x, tau, u, -0.5);
  const Tensor3 sel = selector_tensor(4, tau, 2);
  const Tensor3 expect = x0 + (-0.5) * tprod(sel, u);
  CHECK(rel_diff(x, expect) <= 1e-12);
}

TEST_CASE("text serialisation round-trips") {
  std::mt19937_64 gen(222);
  const Tensor3 t = rand_tensor(4, 3, 5, gen);
  const std::string path = "tensor_roundtrip.t3";
  write_tensor_text(path, t);
  const Tensor3 back = read_tensor_text(path);
  REQUIRE(back.same_dims(t));
  CHECK(rel_diff(back, t) <= 1e-15);
  std::remove(path.c_str());
}

TEST_CASE("text reader rejects a missing or malformed file") {
  CHECK_THROWS(read_tensor_text("does_not_exist.t3"));
  const std::string path = "tensor_bad_header.t3";
  {
    FILE* f = std::fopen(path.c_str(), "w");
    REQUIRE(f != nullptr);
    std::fputs("XX 1 1 1\n0\n", f);
    std::fclose(f);
  }
  CHECK_THROWS(read_tensor_text(path));
  std::remove(path.c_str());
}
