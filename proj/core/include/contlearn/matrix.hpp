#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "contlearn/rng.hpp"

namespace contlearn {

// Dense row-major matrix of doubles; the single numerical carrier of the
// library. Every public operation either rejects non-finite values or
// cannot produce them, so a Matrix observed through this API always holds
// finite entries.
class Matrix {
 public:
  Matrix() = default;  // empty 0x0, placeholder only
  Matrix(std::size_t rows, std::size_t cols);  // zero-filled

  static Matrix from(std::size_t rows, std::size_t cols,
                     std::initializer_list<double> values);
  static Matrix identity(std::size_t n);
  static Matrix constant(std::size_t rows, std::size_t cols, double value);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  // Bounds-checked access.
  double& at(std::size_t r, std::size_t c);
  double at(std::size_t r, std::size_t c) const;

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Throws NumericalError if any entry is NaN or infinite.
void ensure_finite(const Matrix& m, const char* where);

// Standard product; a.cols() must equal b.rows().
Matrix matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

// Pointwise operations; shapes must match where two operands are given.
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);
Matrix hadamard(const Matrix& a, const Matrix& b);

// Pointwise map through an arbitrary function (activation application).
Matrix map(const Matrix& a, double (*fn)(double));

// b is a column vector (rows x 1) broadcast over every column of a.
Matrix add_col_broadcast(const Matrix& a, const Matrix& b);

// Column vector of per-row sums.
Matrix row_sums(const Matrix& a);

// New matrix made of the given columns, in order.
Matrix select_columns(const Matrix& a, std::span<const std::size_t> idx);

double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);

// Row index of the largest entry in the column; ties go to the lowest index.
std::size_t argmax_in_column(const Matrix& a, std::size_t col);

// Entries i.i.d. Normal(0, sigma^2); sigma must be positive.
Matrix gaussian_init(std::size_t rows, std::size_t cols, double sigma,
                     Rng& rng);

// Random orthogonal matrix (modified Gram-Schmidt on a Gaussian draw, with
// the sign convention that makes the factorization canonical).
Matrix random_orthogonal(std::size_t n, Rng& rng);

}  // namespace contlearn
