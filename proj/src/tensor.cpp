#include "tblockgs/tensor.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tblockgs {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

Tensor3::Tensor3(int rows, int cols, int depth)
    : rows_(rows), cols_(cols), depth_(depth) {
  require(rows >= 0 && cols >= 0 && depth >= 0, "Tensor3: negative dimension");
  data_.assign(static_cast<std::size_t>(rows) * cols * depth, 0.0);
}

Tensor3 Tensor3::identity(int n, int depth) {
  require(depth >= 1, "identity: depth must be positive");
  Tensor3 e(n, n, depth);
  for (int i = 0; i < n; ++i) e(i, i, 0) = 1.0;
  return e;
}

void Tensor3::set_zero() {
  std::fill(data_.begin(), data_.end(), 0.0);
}

Tensor3& Tensor3::operator+=(const Tensor3& other) {
  require(same_dims(other), "Tensor3 +=: dimension mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor3& Tensor3::operator-=(const Tensor3& other) {
  require(same_dims(other), "Tensor3 -=: dimension mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Tensor3& Tensor3::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix bcirc(const Tensor3& a) {
  const int m = a.rows(), n = a.cols(), p = a.depth();
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(m) * p,
                            static_cast<Eigen::Index>(n) * p);
  for (int bi = 0; bi < p; ++bi) {
    for (int bj = 0; bj < p; ++bj) {
      const int s = (bi - bj + p) % p;
      out.block(static_cast<Eigen::Index>(bi) * m, static_cast<Eigen::Index>(bj) * n,
                m, n) = a.slice(s);
    }
  }
  return out;
}

Matrix unfold(const Tensor3& a) {
  const int m = a.rows(), n = a.cols(), p = a.depth();
  Matrix out(static_cast<Eigen::Index>(m) * p, n);
  for (int k = 0; k < p; ++k)
    out.block(static_cast<Eigen::Index>(k) * m, 0, m, n) = a.slice(k);
  return out;
}

Tensor3 fold(const Matrix& m, int rows, int depth) {
  require(rows >= 0 && depth >= 1, "fold: bad shape");
  require(m.rows() == static_cast<Eigen::Index>(rows) * depth,
          "fold: row count not divisible into slices");
  Tensor3 out(rows, static_cast<int>(m.cols()), depth);
  for (int k = 0; k < depth; ++k)
    out.slice(k) = m.block(static_cast<Eigen::Index>(k) * rows, 0, rows, m.cols());
  return out;
}

Tensor3 tprod(const Tensor3& a, const Tensor3& b) {
  require(a.cols() == b.rows(), "tprod: inner dimensions differ");
  require(a.depth() == b.depth(), "tprod: depths differ");
  const int p = a.depth();
  Tensor3 c(a.rows(), b.cols(), p);
  for (int k = 0; k < p; ++k) {
    auto ck = c.slice(k);
    for (int d = 0; d < p; ++d) {
      const int s = (k - d + p) % p;
      ck.noalias() += a.slice(s) * b.slice(d);
    }
  }
  return c;
}

Tensor3 tprod_reference(const Tensor3& a, const Tensor3& b) {
  require(a.cols() == b.rows(), "tprod_reference: inner dimensions differ");
  require(a.depth() == b.depth(), "tprod_reference: depths differ");
  const Matrix big = bcirc(a);
  const Matrix rhs = unfold(b);
  Matrix out = Matrix::Zero(big.rows(), rhs.cols());
  for (Eigen::Index i = 0; i < big.rows(); ++i)
    for (Eigen::Index j = 0; j < rhs.cols(); ++j) {
      double acc = 0.0;
      for (Eigen::Index t = 0; t < big.cols(); ++t) acc += big(i, t) * rhs(t, j);
      out(i, j) = acc;
    }
  return fold(out, a.rows(), a.depth());
}

Tensor3 conj_transpose(const Tensor3& a) {
  const int p = a.depth();
  Tensor3 out(a.cols(), a.rows(), p);
  out.slice(0) = a.slice(0).transpose();
  for (int k = 1; k < p; ++k) out.slice(k) = a.slice(p - k).transpose();
  return out;
}

double inner(const Tensor3& a, const Tensor3& b) {
  require(a.same_dims(b), "inner: dimension mismatch");
  double acc = 0.0;
  const double* pa = a.data();
  const double* pb = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) acc += pa[i] * pb[i];
  return acc;
}

double frob_norm(const Tensor3& a) {
  return std::sqrt(inner(a, a));
}

namespace {

void check_block_indices(int n, std::span<const int> tau) {
  require(!tau.empty(), "column block: empty index set");
  int prev = -1;
  for (int j : tau) {
    require(j > prev, "column block: indices must be strictly increasing");
    require(j >= 0 && j < n, "column block: index out of range");
    prev = j;
  }
}

}  // namespace

Tensor3 column_block(const Tensor3& a, std::span<const int> tau) {
  check_block_indices(a.cols(), tau);
  Tensor3 out(a.rows(), static_cast<int>(tau.size()), a.depth());
  for (int k = 0; k < a.depth(); ++k) {
    auto dst = out.slice(k);
    auto src = a.slice(k);
    for (std::size_t t = 0; t < tau.size(); ++t) dst.col(t) = src.col(tau[t]);
  }
  return out;
}

Tensor3 selector_tensor(int n, std::span<const int> tau, int depth) {
  check_block_indices(n, tau);
  Tensor3 e(n, static_cast<int>(tau.size()), depth);
  for (std::size_t t = 0; t < tau.size(); ++t) e(tau[t], static_cast<int>(t), 0) = 1.0;
  return e;
}

Tensor3 apply_selector(const Tensor3& x, std::span<const int> tau, const Tensor3& u) {
  Tensor3 out = x;
  apply_selector_add(out, tau, u, 1.0);
  return out;
}

void apply_selector_add(Tensor3& x, std::span<const int> tau, const Tensor3& u,
                        double scale) {
  check_block_indices(x.rows(), tau);
  require(u.rows() == static_cast<int>(tau.size()), "apply_selector: row count mismatch");
  require(u.cols() == x.cols() && u.depth() == x.depth(),
          "apply_selector: dimension mismatch");
  for (int k = 0; k < x.depth(); ++k) {
    auto dst = x.slice(k);
    auto src = u.slice(k);
    for (std::size_t t = 0; t < tau.size(); ++t)
      dst.row(tau[t]) += scale * src.row(t);
  }
}

void write_tensor_text(const std::string& path, const Tensor3& a) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "T3 " << a.rows() << ' ' << a.cols() << ' ' << a.depth() << '\n';
  char buf[40];
  const double* p = a.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", p[i]);
    out << buf << ((i + 1) % 8 == 0 ? '\n' : ' ');
  }
  out << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

Tensor3 read_tensor_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string magic;
  int m = 0, n = 0, p = 0;
  in >> magic >> m >> n >> p;
  if (!in || magic != "T3") throw std::runtime_error("bad tensor header in " + path);
  if (m < 0 || n < 0 || p < 0) throw std::runtime_error("bad tensor shape in " + path);
  Tensor3 a(m, n, p);
  double* dst = a.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(in >> dst[i])) throw std::runtime_error("truncated tensor data in " + path);
    if (!std::isfinite(dst[i]))
      throw std::runtime_error("non-finite tensor entry in " + path);
  }
  return a;
}

}  // namespace tblockgs
