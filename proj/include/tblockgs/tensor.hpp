#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tblockgs {

/// Dense real matrix with row-major storage. Factorizations and the
/// block-circulant expansion below work on this type.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/**
 * Third-order dense real tensor.
 *
 * Storage is frontal-slice major: the slice index varies slowest, then the
 * column index, then the row index.  Each frontal slice is therefore a
 * contiguous column-major rows() x cols() block, which makes slice extraction
 * and unfolding plain block copies.
 */
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int rows, int cols, int depth);

  /// Identity element of the slice-circulant product: first frontal slice is
  /// the n x n identity, all remaining slices are zero.
  static Tensor3 identity(int n, int depth);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int depth() const { return depth_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(int i, int j, int k) {
    return data_[index(i, j, k)];
  }
  double operator()(int i, int j, int k) const {
    return data_[index(i, j, k)];
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double* slice_data(int k) { return data_.data() + slice_offset(k); }
  const double* slice_data(int k) const { return data_.data() + slice_offset(k); }

  /// Column-major view of one frontal slice.
  Eigen::Map<const Eigen::MatrixXd> slice(int k) const {
    return {slice_data(k), rows_, cols_};
  }
  Eigen::Map<Eigen::MatrixXd> slice(int k) {
    return {slice_data(k), rows_, cols_};
  }

  bool same_dims(const Tensor3& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && depth_ == other.depth_;
  }

  void set_zero();

  Tensor3& operator+=(const Tensor3& other);
  Tensor3& operator-=(const Tensor3& other);
  Tensor3& operator*=(double s);
  friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
  friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
  friend Tensor3 operator*(double s, Tensor3 a) { return a *= s; }

 private:
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * cols_ + j) * rows_ + i;
  }
  std::size_t slice_offset(int k) const {
    return static_cast<std::size_t>(k) * cols_ * rows_;
  }

  int rows_ = 0;
  int cols_ = 0;
  int depth_ = 0;
  std::vector<double> data_;
};

/**
 * Block-circulant expansion.  For A with p frontal slices A_0..A_{p-1} the
 * result is the (rows*p) x (cols*p) matrix whose block (i, j) is the frontal
 * slice A_{(i - j) mod p}.
 */
Matrix bcirc(const Tensor3& a);

/// Stack the frontal slices vertically into a (rows*depth) x cols matrix.
Matrix unfold(const Tensor3& a);

/// Inverse of unfold: split a (rows*depth) x cols matrix back into slices.
Tensor3 fold(const Matrix& m, int rows, int depth);

/**
 * Slice-circulant tensor product: fold(bcirc(a) * unfold(b)) computed as a
 * cyclic convolution of frontal slices,
 *   C_k = sum_d A_{(k - d) mod p} * B_d,
 * without materialising the circulant matrix.  O(p^2) slice products.
 */
Tensor3 tprod(const Tensor3& a, const Tensor3& b);

/// Reference route for tprod: materialise bcirc(a), multiply unfold(b) with a
/// plain triple loop, fold the result.  Used to cross-check the fast path.
Tensor3 tprod_reference(const Tensor3& a, const Tensor3& b);

/// Transpose every frontal slice and reverse the order of slices 1..p-1.
/// bcirc of the result equals bcirc(a) transposed.
Tensor3 conj_transpose(const Tensor3& a);

/// Sum of elementwise products.
double inner(const Tensor3& a, const Tensor3& b);

/// Frobenius norm: sqrt(inner(a, a)).
double frob_norm(const Tensor3& a);

/// Copy the columns listed in tau (strictly increasing, 0-based) out of every
/// frontal slice.
Tensor3 column_block(const Tensor3& a, std::span<const int> tau);

/// Selector tensor E_tau: first frontal slice holds the identity columns
/// indexed by tau, remaining slices are zero.  tprod(a, selector) extracts the
/// same columns as column_block; the materialised form exists for tests.
Tensor3 selector_tensor(int n, std::span<const int> tau, int depth);

/// Pure form of the selector update: returns x + E_tau * u, i.e. u added into
/// the rows of x listed in tau.
Tensor3 apply_selector(const Tensor3& x, std::span<const int> tau, const Tensor3& u);

/// In-place selector update with a scale: x += scale * E_tau * u.
void apply_selector_add(Tensor3& x, std::span<const int> tau, const Tensor3& u,
                        double scale = 1.0);

/// Text serialisation: header "T3 rows cols depth" followed by the entries in
/// storage order.  Values are written with enough digits to round-trip.
void write_tensor_text(const std::string& path, const Tensor3& a);
Tensor3 read_tensor_text(const std::string& path);

}  // namespace tblockgs
