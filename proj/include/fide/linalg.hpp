#pragma once

#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace fide {

inline constexpr double kDefaultPivotTol = 1e-12;

class SingularMatrixError : public std::runtime_error {
 public:
  explicit SingularMatrixError(const std::string& message)
      : std::runtime_error(message) {}
};

class Vector {
 public:
  Vector() = default;
  explicit Vector(int dim, double fill = 0.0);
  Vector(std::initializer_list<double> values);

  int dim() const { return static_cast<int>(v_.size()); }
  double& operator[](int i) { return v_[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return v_[static_cast<std::size_t>(i)]; }

  Vector& operator+=(const Vector& rhs);
  Vector& operator-=(const Vector& rhs);
  Vector& operator*=(double s);

  const double* data() const { return v_.data(); }

 private:
  std::vector<double> v_;
};

/// Dense real matrix, row-major. Sized for the small systems that show up
/// here (a few hundred rows at most), so no blocking or fancy storage.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0);

  static Matrix identity(int n);
  /// Build from nested braces: Matrix::of({{1, 2}, {3, 4}}).
  static Matrix of(std::initializer_list<std::initializer_list<double>> rows);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) {
    return a_[static_cast<std::size_t>(i) * cols_ + j];
  }
  double operator()(int i, int j) const {
    return a_[static_cast<std::size_t>(i) * cols_ + j];
  }

  Matrix& operator+=(const Matrix& rhs);
  Matrix& operator-=(const Matrix& rhs);
  Matrix& operator*=(double s);

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> a_;
};

Vector operator+(Vector a, const Vector& b);
Vector operator-(Vector a, const Vector& b);
Vector operator*(Vector a, double s);
Vector operator*(double s, Vector a);

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, const Vector& x);

/// Vector: max absolute entry. Matrix: max absolute row sum (the operator
/// norm induced by the vector max-norm).
double max_norm(const Vector& v);
double max_norm(const Matrix& a);

/// LU decomposition with partial (row) pivoting, stored packed.
struct LuFactors {
  Matrix lu;
  std::vector<int> perm;
  int n = 0;
};

/// Factor a square matrix. A pivot whose magnitude falls to or below
/// pivot_tol * max_norm(a) is treated as singular.
LuFactors lu_factor(const Matrix& a, double pivot_tol = kDefaultPivotTol);

Vector lu_solve(const LuFactors& f, const Vector& b);
Matrix lu_solve(const LuFactors& f, const Matrix& b);
Vector lu_solve(const Matrix& a, const Vector& b,
                double pivot_tol = kDefaultPivotTol);
Matrix lu_solve(const Matrix& a, const Matrix& b,
                double pivot_tol = kDefaultPivotTol);

/// Inverse via lu_solve against identity columns.
Matrix invert(const Matrix& a, double pivot_tol = kDefaultPivotTol);

/// Block access for matrices tiled by n x n cells.
void set_block(Matrix& dest, int block_row, int block_col, const Matrix& block);
Matrix get_block(const Matrix& src, int block_row, int block_col,
                 int block_rows, int block_cols);

}  // namespace fide
