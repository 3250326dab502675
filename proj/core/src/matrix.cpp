#include "contlearn/matrix.hpp"

#include <cmath>
#include <string>

#include "contlearn/errors.hpp"

namespace contlearn {

namespace {

std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a) +
                     " vs " + shape_str(b));
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
  if (rows == 0 || cols == 0) {
    throw ParameterError("Matrix: dimensions must be positive, got " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Matrix Matrix::from(std::size_t rows, std::size_t cols,
                    std::initializer_list<double> values) {
  Matrix m(rows, cols);
  if (values.size() != m.size()) {
    throw ShapeError("Matrix::from: " + std::to_string(values.size()) +
                     " values for " + shape_str(m));
  }
  std::size_t i = 0;
  for (double v : values) m.data_[i++] = v;
  ensure_finite(m, "Matrix::from");
  return m;
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::constant(std::size_t rows, std::size_t cols, double value) {
  Matrix m(rows, cols);
  for (double& v : m.data_) v = value;
  ensure_finite(m, "Matrix::constant");
  return m;
}

double& Matrix::at(std::size_t r, std::size_t c) {
  if (r >= rows_ || c >= cols_) {
    throw RangeError("Matrix::at(" + std::to_string(r) + "," +
                     std::to_string(c) + ") outside " + shape_str(*this));
  }
  return data_[r * cols_ + c];
}

double Matrix::at(std::size_t r, std::size_t c) const {
  return const_cast<Matrix*>(this)->at(r, c);
}

void ensure_finite(const Matrix& m, const char* where) {
  for (double v : m.data()) {
    if (!std::isfinite(v)) {
      throw NumericalError(std::string(where) + ": non-finite entry");
    }
  }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + shape_str(a) + " by " + shape_str(b));
  }
  Matrix out(a.rows(), b.cols());
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  const double* ad = a.data().data();
  const double* bd = b.data().data();
  double* od = out.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = ad + i * k;
    double* orow = od + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = bd + p * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
  ensure_finite(out, "matmul");
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
  ensure_finite(out, "add");
  return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "sub");
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= b.data()[i];
  ensure_finite(out, "sub");
  return out;
}

Matrix scale(const Matrix& a, double s) {
  Matrix out = a;
  for (double& v : out.data()) v *= s;
  ensure_finite(out, "scale");
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= b.data()[i];
  ensure_finite(out, "hadamard");
  return out;
}

Matrix map(const Matrix& a, double (*fn)(double)) {
  Matrix out = a;
  for (double& v : out.data()) v = fn(v);
  ensure_finite(out, "map");
  return out;
}

Matrix add_col_broadcast(const Matrix& a, const Matrix& b) {
  if (b.cols() != 1 || b.rows() != a.rows()) {
    throw ShapeError("add_col_broadcast: " + shape_str(a) + " with " +
                     shape_str(b));
  }
  Matrix out = a;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double bv = b(i, 0);
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) += bv;
  }
  ensure_finite(out, "add_col_broadcast");
  return out;
}

Matrix row_sums(const Matrix& a) {
  Matrix out(a.rows(), 1);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j);
    out(i, 0) = s;
  }
  ensure_finite(out, "row_sums");
  return out;
}

Matrix select_columns(const Matrix& a, std::span<const std::size_t> idx) {
  if (idx.empty()) throw ParameterError("select_columns: empty index set");
  Matrix out(a.rows(), idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) {
    if (idx[j] >= a.cols()) {
      throw RangeError("select_columns: column " + std::to_string(idx[j]) +
                       " outside " + shape_str(a));
    }
    for (std::size_t i = 0; i < a.rows(); ++i) out(i, j) = a(i, idx[j]);
  }
  return out;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::fabs(v));
  return m;
}

std::size_t argmax_in_column(const Matrix& a, std::size_t col) {
  if (col >= a.cols()) {
    throw RangeError("argmax_in_column: column " + std::to_string(col) +
                     " outside " + shape_str(a));
  }
  std::size_t best = 0;
  double best_v = a(0, col);
  for (std::size_t i = 1; i < a.rows(); ++i) {
    if (a(i, col) > best_v) {
      best_v = a(i, col);
      best = i;
    }
  }
  return best;
}

Matrix gaussian_init(std::size_t rows, std::size_t cols, double sigma,
                     Rng& rng) {
  if (!(sigma > 0.0)) {
    throw ParameterError("gaussian_init: sigma must be positive, got " +
                         std::to_string(sigma));
  }
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.normal(sigma);
  ensure_finite(m, "gaussian_init");
  return m;
}

Matrix random_orthogonal(std::size_t n, Rng& rng) {
  Matrix g = gaussian_init(n, n, 1.0, rng);
  // Modified Gram-Schmidt over columns; diagonal of R forced positive.
  Matrix q = g;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t p = 0; p < j; ++p) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += q(i, p) * q(i, j);
      for (std::size_t i = 0; i < n; ++i) q(i, j) -= dot * q(i, p);
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm += q(i, j) * q(i, j);
    norm = std::sqrt(norm);
    if (norm < 1e-12) {
      // Degenerate draw; retry with fresh randomness.
      return random_orthogonal(n, rng);
    }
    const double sign = q(j, j) >= 0.0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < n; ++i) q(i, j) *= sign / norm;
  }
  ensure_finite(q, "random_orthogonal");
  return q;
}

}  // namespace contlearn
