#include "fide/linalg.hpp"

#include <cmath>
#include <cstdlib>
#include <numeric>

namespace fide {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

Vector::Vector(int dim, double fill) : v_(static_cast<std::size_t>(dim), fill) {
  require(dim >= 0, "Vector: negative dimension");
}

Vector::Vector(std::initializer_list<double> values) : v_(values) {}

Vector& Vector::operator+=(const Vector& rhs) {
  require(dim() == rhs.dim(), "Vector +=: dimension mismatch");
  for (int i = 0; i < dim(); ++i) v_[i] += rhs.v_[i];
  return *this;
}

Vector& Vector::operator-=(const Vector& rhs) {
  require(dim() == rhs.dim(), "Vector -=: dimension mismatch");
  for (int i = 0; i < dim(); ++i) v_[i] -= rhs.v_[i];
  return *this;
}

Vector& Vector::operator*=(double s) {
  for (double& x : v_) x *= s;
  return *this;
}

Matrix::Matrix(int rows, int cols, double fill)
    : rows_(rows), cols_(cols),
      a_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill) {
  require(rows >= 0 && cols >= 0, "Matrix: negative shape");
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::of(std::initializer_list<std::initializer_list<double>> rows) {
  const int r = static_cast<int>(rows.size());
  const int c = r == 0 ? 0 : static_cast<int>(rows.begin()->size());
  Matrix m(r, c);
  int i = 0;
  for (const auto& row : rows) {
    require(static_cast<int>(row.size()) == c, "Matrix::of: ragged rows");
    int j = 0;
    for (double x : row) m(i, j++) = x;
    ++i;
  }
  return m;
}

Matrix& Matrix::operator+=(const Matrix& rhs) {
  require(rows_ == rhs.rows_ && cols_ == rhs.cols_, "Matrix +=: shape mismatch");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += rhs.a_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& rhs) {
  require(rows_ == rhs.rows_ && cols_ == rhs.cols_, "Matrix -=: shape mismatch");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= rhs.a_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& x : a_) x *= s;
  return *this;
}

Vector operator+(Vector a, const Vector& b) { return a += b; }
Vector operator-(Vector a, const Vector& b) { return a -= b; }
Vector operator*(Vector a, double s) { return a *= s; }
Vector operator*(double s, Vector a) { return a *= s; }

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "Matrix *: shape mismatch");
  Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Vector operator*(const Matrix& a, const Vector& x) {
  require(a.cols() == x.dim(), "Matrix * Vector: shape mismatch");
  Vector y(a.rows());
  for (int i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

double max_norm(const Vector& v) {
  double m = 0.0;
  for (int i = 0; i < v.dim(); ++i) m = std::max(m, std::abs(v[i]));
  return m;
}

double max_norm(const Matrix& a) {
  double m = 0.0;
  for (int i = 0; i < a.rows(); ++i) {
    double row = 0.0;
    for (int j = 0; j < a.cols(); ++j) row += std::abs(a(i, j));
    m = std::max(m, row);
  }
  return m;
}

LuFactors lu_factor(const Matrix& a, double pivot_tol) {
  require(a.rows() == a.cols(), "lu_factor: matrix not square");
  const int n = a.rows();
  LuFactors f{a, std::vector<int>(n), n};
  std::iota(f.perm.begin(), f.perm.end(), 0);
  const double threshold = pivot_tol * max_norm(a);

  Matrix& lu = f.lu;
  for (int k = 0; k < n; ++k) {
    int pivot = k;
    for (int i = k + 1; i < n; ++i) {
      if (std::abs(lu(i, k)) > std::abs(lu(pivot, k))) pivot = i;
    }
    if (std::abs(lu(pivot, k)) <= threshold) {
      throw SingularMatrixError("lu_factor: pivot " + std::to_string(k) +
                                " below threshold (matrix singular to working "
                                "precision)");
    }
    if (pivot != k) {
      std::swap(f.perm[k], f.perm[pivot]);
      for (int j = 0; j < n; ++j) std::swap(lu(k, j), lu(pivot, j));
    }
    for (int i = k + 1; i < n; ++i) {
      const double m = lu(i, k) / lu(k, k);
      lu(i, k) = m;
      for (int j = k + 1; j < n; ++j) lu(i, j) -= m * lu(k, j);
    }
  }
  return f;
}

Vector lu_solve(const LuFactors& f, const Vector& b) {
  require(b.dim() == f.n, "lu_solve: right-hand side dimension mismatch");
  const int n = f.n;
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    double s = b[f.perm[i]];
    for (int j = 0; j < i; ++j) s -= f.lu(i, j) * y[j];
    y[i] = s;
  }
  Vector x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = y[i];
    for (int j = i + 1; j < n; ++j) s -= f.lu(i, j) * x[j];
    x[i] = s / f.lu(i, i);
  }
  return x;
}

Matrix lu_solve(const LuFactors& f, const Matrix& b) {
  require(b.rows() == f.n, "lu_solve: right-hand side row count mismatch");
  Matrix x(f.n, b.cols());
  Vector col(f.n);
  for (int j = 0; j < b.cols(); ++j) {
    for (int i = 0; i < f.n; ++i) col[i] = b(i, j);
    Vector sol = lu_solve(f, col);
    for (int i = 0; i < f.n; ++i) x(i, j) = sol[i];
  }
  return x;
}

Vector lu_solve(const Matrix& a, const Vector& b, double pivot_tol) {
  return lu_solve(lu_factor(a, pivot_tol), b);
}

Matrix lu_solve(const Matrix& a, const Matrix& b, double pivot_tol) {
  return lu_solve(lu_factor(a, pivot_tol), b);
}

Matrix invert(const Matrix& a, double pivot_tol) {
  require(a.rows() == a.cols(), "invert: matrix not square");
  return lu_solve(lu_factor(a, pivot_tol), Matrix::identity(a.rows()));
}

void set_block(Matrix& dest, int block_row, int block_col, const Matrix& block) {
  const int r0 = block_row * block.rows();
  const int c0 = block_col * block.cols();
  require(r0 + block.rows() <= dest.rows() && c0 + block.cols() <= dest.cols(),
          "set_block: block out of range");
  for (int i = 0; i < block.rows(); ++i)
    for (int j = 0; j < block.cols(); ++j) dest(r0 + i, c0 + j) = block(i, j);
}

Matrix get_block(const Matrix& src, int block_row, int block_col,
                 int block_rows, int block_cols) {
  const int r0 = block_row * block_rows;
  const int c0 = block_col * block_cols;
  require(r0 + block_rows <= src.rows() && c0 + block_cols <= src.cols(),
          "get_block: block out of range");
  Matrix b(block_rows, block_cols);
  for (int i = 0; i < block_rows; ++i)
    for (int j = 0; j < block_cols; ++j) b(i, j) = src(r0 + i, c0 + j);
  return b;
}

}  // namespace fide
