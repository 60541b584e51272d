#pragma once

#include <cstddef>
#include <vector>

namespace patchseg {

/// Dense row-major matrix; just enough for the oracle eigenproblem and
/// K x K basis mixing.
class Matrix {
 public:
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const std::vector<double>& data() const { return data_; }

  Matrix transpose() const;
  friend Matrix operator*(const Matrix& a, const Matrix& b);

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

/// max |A^T A - I|
double orthogonality_defect(const Matrix& q);

struct SymmetricEigen {
  std::vector<double> values;  // sorted descending
  Matrix vectors;              // column j is the eigenvector of values[j]
};

/// Cyclic Jacobi rotations. The input must be symmetric; the strictly
/// lower triangle is ignored.
SymmetricEigen jacobi_eigen(Matrix a, double tolerance = 1e-14, int max_sweeps = 100);

}  // namespace patchseg
