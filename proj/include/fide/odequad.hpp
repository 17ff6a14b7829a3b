#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "fide/linalg.hpp"

namespace fide {

/// Uniform grid on one partition subinterval. steps must be even so the
/// same grid serves both the Runge-Kutta sweep and Simpson quadrature.
struct SubintervalMesh {
  double left = 0.0;
  double right = 0.0;
  int steps = 0;
  double h = 0.0;

  static SubintervalMesh make(double left, double right, int steps) {
    if (!(left < right))
      throw std::invalid_argument("SubintervalMesh: left must be < right");
    if (steps <= 0 || steps % 2 != 0)
      throw std::invalid_argument("SubintervalMesh: steps must be positive and even");
    return SubintervalMesh{left, right, steps, (right - left) / steps};
  }

  /// Node i of the grid; the last node is the exact right endpoint.
  double node(int i) const { return i == steps ? right : left + i * h; }
  double midpoint(int i) const { return node(i) + 0.5 * h; }
};

/// Values of a matrix- or vector-valued function sampled at the mesh nodes.
template <class T>
struct GridFunctionT {
  SubintervalMesh mesh;
  std::vector<T> values;  // steps + 1 entries
};

using MatrixGrid = GridFunctionT<Matrix>;
using VectorGrid = GridFunctionT<Vector>;

namespace detail {

inline void check_state_finite(const Matrix& x, double t) {
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j)
      if (!std::isfinite(x(i, j)))
        throw std::runtime_error("rk4: non-finite state at t = " +
                                 std::to_string(t));
}

inline void check_state_finite(const Vector& x, double t) {
  for (int i = 0; i < x.dim(); ++i)
    if (!std::isfinite(x[i]))
      throw std::runtime_error("rk4: non-finite state at t = " +
                               std::to_string(t));
}

}  // namespace detail

/// Classical fourth-order Runge-Kutta for the linear system
/// x' = A(t) x + P(t), x(mesh.left) = x0, sampled at every mesh node.
/// P (and hence the state) may be an n x n matrix or an n-vector; a matrix
/// state steps all columns in one sweep.
template <class T, class AFn, class PFn>
GridFunctionT<T> rk4_ivp(AFn&& a_fn, PFn&& p_fn, const SubintervalMesh& mesh,
                         T x0) {
  GridFunctionT<T> out{mesh, {}};
  out.values.reserve(mesh.steps + 1);
  out.values.push_back(std::move(x0));

  const double h = mesh.h;
  Matrix a1 = a_fn(mesh.node(0));
  T p1 = p_fn(mesh.node(0));
  for (int i = 0; i < mesh.steps; ++i) {
    const double tm = mesh.midpoint(i);
    const double t1 = mesh.node(i + 1);

    const Matrix a0 = a1;
    const Matrix am = a_fn(tm);
    a1 = a_fn(t1);
    const T p0 = p1;
    const T pm = p_fn(tm);
    p1 = p_fn(t1);

    const T& x = out.values.back();
    const T k1 = a0 * x + p0;
    const T k2 = am * (x + k1 * (0.5 * h)) + pm;
    const T k3 = am * (x + k2 * (0.5 * h)) + pm;
    const T k4 = a1 * (x + k3 * h) + p1;

    T next = x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    detail::check_state_finite(next, t1);
    out.values.push_back(std::move(next));
  }
  return out;
}

/// rk4_ivp with zero initial data: the discrete solution operator of the
/// subinterval Cauchy problems that the whole pipeline is built from.
template <class T, class AFn, class PFn>
GridFunctionT<T> rk4_cauchy(AFn&& a_fn, PFn&& p_fn,
                            const SubintervalMesh& mesh) {
  T zero = p_fn(mesh.left) * 0.0;
  return rk4_ivp<T>(std::forward<AFn>(a_fn), std::forward<PFn>(p_fn), mesh,
                    std::move(zero));
}

/// Composite Simpson approximation of the weighted integral
/// int weight(t) * g(t) dt over the grid of g.
template <class T, class WFn>
T simpson(WFn&& weight_fn, const GridFunctionT<T>& g) {
  const SubintervalMesh& mesh = g.mesh;
  if (mesh.steps % 2 != 0)
    throw std::invalid_argument("simpson: odd step count");
  if (static_cast<int>(g.values.size()) != mesh.steps + 1)
    throw std::invalid_argument("simpson: grid values do not match mesh");

  T acc = weight_fn(mesh.node(0)) * g.values[0];
  for (int i = 1; i < mesh.steps; ++i) {
    const double w = (i % 2 == 1) ? 4.0 : 2.0;
    acc += weight_fn(mesh.node(i)) * g.values[i] * w;
  }
  acc += weight_fn(mesh.node(mesh.steps)) * g.values[mesh.steps];
  return acc * (mesh.h / 3.0);
}

/// Simpson with weight = identity.
template <class T>
T simpson(const GridFunctionT<T>& g) {
  const SubintervalMesh& mesh = g.mesh;
  if (mesh.steps % 2 != 0)
    throw std::invalid_argument("simpson: odd step count");
  if (static_cast<int>(g.values.size()) != mesh.steps + 1)
    throw std::invalid_argument("simpson: grid values do not match mesh");

  T acc = g.values[0];
  for (int i = 1; i < mesh.steps; ++i)
    acc += g.values[i] * ((i % 2 == 1) ? 4.0 : 2.0);
  acc += g.values[mesh.steps];
  return acc * (mesh.h / 3.0);
}

/// Composite Simpson of a scalar function over the mesh nodes.
template <class Fn>
double simpson_scalar(const SubintervalMesh& mesh, Fn&& fn) {
  double acc = fn(mesh.node(0));
  for (int i = 1; i < mesh.steps; ++i)
    acc += fn(mesh.node(i)) * ((i % 2 == 1) ? 4.0 : 2.0);
  acc += fn(mesh.node(mesh.steps));
  return acc * (mesh.h / 3.0);
}

}  // namespace fide
