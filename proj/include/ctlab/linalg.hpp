#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <string>
#include <vector>

namespace ctlab {

// Dense row-major matrix of doubles. Entries are checked for finiteness
// when the matrix is built from external data.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(const std::vector<double>& d);
  static Matrix column(const std::vector<double>& v);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }
  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  std::vector<double> col(std::size_t j) const;
  void set_col(std::size_t j, const std::vector<double>& v);
  Matrix cols_range(std::size_t first, std::size_t count) const;

  Matrix transpose() const;
  double frobenius_norm() const;
  double max_abs() const;
  bool all_finite() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix& a, const Matrix& b) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);

// aᵀ·b without forming the transpose.
Matrix transpose_times(const Matrix& a, const Matrix& b);

double dot(const double* a, const double* b, std::size_t n);
double frobenius_distance_sq(const Matrix& a, const Matrix& b);
double max_abs_diff(const Matrix& a, const Matrix& b);

struct SymEigen {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column i pairs with values[i]
};

// Cyclic Jacobi. Throws std::invalid_argument on non-square or asymmetric
// input (tolerance 1e-10 per entry, scaled by max(1, max|S|)).
SymEigen sym_eig(const Matrix& s);

struct Orthonormalized {
  Matrix basis;
  // Columns that were rank deficient and filled from the orthogonal complement.
  std::vector<std::size_t> completed_columns;
};

// Modified Gram-Schmidt with one re-orthogonalization pass.
Orthonormalized orthonormalize(const Matrix& m);

// I.i.d. N(0,1) entries. Entry (i, j) depends only on (seed, i*cols + j),
// so the result is identical for any thread count.
Matrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                       unsigned threads = 1);

// CTLAB-MAT v1 text format and the CTLB binary variant.
void write_matrix_text(std::ostream& os, const Matrix& m);
Matrix read_matrix_text(std::istream& is);
void write_matrix_binary(std::ostream& os, const Matrix& m);
Matrix read_matrix_binary(std::istream& is);
void save_matrix(const std::string& path, const Matrix& m, bool binary = false);
Matrix load_matrix(const std::string& path);

// Shortest decimal that round-trips exactly.
std::string format_double(double v);

}  // namespace ctlab
