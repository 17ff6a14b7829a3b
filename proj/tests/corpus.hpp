// Shared problem constructors for the unit and acceptance suites.
#pragma once

#include <cmath>

#include "fide/model.hpp"

namespace corpus {

using fide::DegenerateKernel;
using fide::GeneralKernel;
using fide::Matrix;
using fide::MatrixFn;
using fide::MultipointCondition;
using fide::Problem;
using fide::Vector;
using fide::VectorFn;

inline MatrixFn const_mat(Matrix m) {
  return [m](double) { return m; };
}

inline MatrixFn scalar_mat(double v) { return const_mat(Matrix::of({{v}})); }

inline VectorFn const_vec(Vector v) {
  return [v](double) { return v; };
}

/// Rank-1 scalar problem with a fully hand-checkable pipeline:
/// A = 0, phi = psi = 1, f = 1/2, x(0) + x(1) = 1 on [0, 1].
/// The general solution family is x(t) = lambda + (2 lambda + 1) t and the
/// boundary condition forces lambda = 0, so x(t) = t.
inline Problem worked_rank1() {
  Problem p;
  p.n = 1;
  p.T = 1.0;
  p.a_fn = scalar_mat(0.0);
  p.kernel = DegenerateKernel{{scalar_mat(1.0)}, {scalar_mat(1.0)}};
  p.f_fn = const_vec(Vector{0.5});
  p.condition = MultipointCondition{
      {0.0, 1.0}, {Matrix::of({{1.0}}), Matrix::of({{1.0}})}, Vector{1.0}};
  return p;
}

inline VectorFn rotation_xstar() {
  return [](double t) { return Vector{std::sin(t), std::cos(t)}; };
}

inline VectorFn rotation_dxstar() {
  return [](double t) { return Vector{std::cos(t), -std::sin(t)}; };
}

inline MatrixFn rotation_a() {
  return const_mat(Matrix::of({{0.0, 1.0}, {-1.0, 0.0}}));
}

/// Smooth rank-2 polynomial kernel with modest amplitude.
inline DegenerateKernel rank2_poly_kernel() {
  DegenerateKernel dk;
  dk.phi.push_back([](double t) {
    return Matrix::of({{t, 0.1}, {0.0, 0.5 * t}});
  });
  dk.psi.push_back([](double tau) {
    return Matrix::of({{tau, 0.5 * tau}, {0.0, tau * tau}});
  });
  dk.phi.push_back([](double t) {
    return Matrix::of({{0.3, 0.1 * t}, {0.2 * t * t, 0.2}});
  });
  dk.psi.push_back([](double tau) {
    return Matrix::of({{0.2 * tau * tau, 0.1}, {0.1 * tau, 0.3}});
  });
  return dk;
}

/// Manufactured 2-dimensional system: rotation matrix, exact solution
/// (sin t, cos t), rank-2 polynomial kernel, three-point condition at
/// 0, 1/2, 1.
inline Problem rotation_threept() {
  const std::vector<double> points{0.0, 0.5, 1.0};
  const std::vector<Matrix> b{Matrix::identity(2),
                              Matrix::of({{0.5, 0.0}, {0.0, 0.5}}),
                              Matrix::identity(2)};
  return fide::manufacture(2, rotation_xstar(), rotation_dxstar(),
                           rotation_a(), rank2_poly_kernel(), points, b);
}

/// Scalar general-kernel problem with known solution x* = 1:
/// K = e^{t tau} on [0,1]^2, A = 0, f(t) = -(e^t - 1)/t (value -1 at t = 0),
/// condition x(0) = 1.
inline Problem exp_kernel_manufactured(double amplitude = 1.0) {
  Problem p;
  p.n = 1;
  p.T = 1.0;
  p.a_fn = scalar_mat(0.0);
  p.kernel = GeneralKernel{[amplitude](double t, double tau) {
    return Matrix::of({{amplitude * std::exp(t * tau)}});
  }};
  p.f_fn = [amplitude](double t) {
    const double v = t == 0.0 ? 1.0 : std::expm1(t) / t;
    return Vector{-amplitude * v};
  };
  p.condition = MultipointCondition{
      {0.0, 1.0}, {Matrix::of({{1.0}}), Matrix::of({{0.0}})}, Vector{1.0}};
  return p;
}

/// Separable polynomial kernel posed as a general kernel: K = t tau, with
/// manufactured solution x*(t) = 1 + t and condition x(0) = 1.
/// Moment: int_0^1 tau (1 + tau) dtau = 5/6, so f(t) = 1 - (5/6) t.
inline Problem ttau_kernel_manufactured() {
  Problem p;
  p.n = 1;
  p.T = 1.0;
  p.a_fn = scalar_mat(0.0);
  p.kernel =
      GeneralKernel{[](double t, double tau) { return Matrix::of({{t * tau}}); }};
  p.f_fn = [](double t) { return Vector{1.0 - 5.0 / 6.0 * t}; };
  p.condition = MultipointCondition{
      {0.0, 1.0}, {Matrix::of({{1.0}}), Matrix::of({{0.0}})}, Vector{1.0}};
  return p;
}

/// Zero-kernel two-subinterval problem: x' = 0, x(0) = d.
inline Problem zero_kernel_threept(double d0 = 2.0) {
  Problem p;
  p.n = 1;
  p.T = 1.0;
  p.a_fn = scalar_mat(0.0);
  p.kernel = DegenerateKernel{{scalar_mat(0.0)}, {scalar_mat(0.0)}};
  p.f_fn = const_vec(Vector{0.0});
  p.condition = MultipointCondition{
      {0.0, 0.5, 1.0},
      {Matrix::of({{1.0}}), Matrix::of({{0.0}}), Matrix::of({{0.0}})},
      Vector{d0}};
  return p;
}

}  // namespace corpus
