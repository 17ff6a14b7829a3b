#include "fide/kapprox.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace fide {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Chebyshev extrema nodes on [-1, 1], degree + 1 of them. The degenerate
/// degree-0 grid is the single point 1.
std::vector<double> cheb_nodes(int degree) {
  std::vector<double> x(degree + 1);
  if (degree == 0) {
    x[0] = 1.0;
    return x;
  }
  for (int i = 0; i <= degree; ++i) x[i] = std::cos(kPi * i / degree);
  return x;
}

/// Coefficient transform for interpolation at the extrema grid:
/// c = D * samples gives f(x) = sum_p c_p T_p(x) exactly at the nodes.
Matrix cheb_transform(int degree) {
  const int np = degree + 1;
  Matrix d(np, np);
  if (degree == 0) {
    d(0, 0) = 1.0;
    return d;
  }
  for (int p = 0; p <= degree; ++p) {
    const double scale_p = (p == 0 || p == degree) ? 1.0 : 2.0;
    for (int i = 0; i <= degree; ++i) {
      const double w_i = (i == 0 || i == degree) ? 0.5 : 1.0;
      d(p, i) = scale_p / degree * w_i * std::cos(kPi * p * i / degree);
    }
  }
  return d;
}

void cheb_basis(int degree, double x, std::vector<double>& tvals) {
  tvals.resize(degree + 1);
  tvals[0] = 1.0;
  if (degree >= 1) tvals[1] = x;
  for (int p = 2; p <= degree; ++p)
    tvals[p] = 2.0 * x * tvals[p - 1] - tvals[p - 2];
}

}  // namespace

ApproximationReport build_degenerate_approx(const KernelFn& kernel, int degree,
                                            double T, int n, int eps_t_grid,
                                            int eps_tau_panels) {
  if (degree < 0) throw std::invalid_argument("degree must be >= 0");
  if (!(T > 0.0)) throw std::invalid_argument("horizon must be positive");

  const int np = degree + 1;
  const std::vector<double> nodes = cheb_nodes(degree);
  const Matrix d = cheb_transform(degree);

  // Entry-wise bivariate coefficients: coef[p][q] is the n x n matrix of
  // c^{ab}_{pq}, computed as D F D^T per entry with F the sample grid.
  std::vector<std::vector<Matrix>> coef(
      np, std::vector<Matrix>(np, Matrix(n, n)));
  std::vector<std::vector<Matrix>> samples(np, std::vector<Matrix>(np));
  for (int i = 0; i < np; ++i) {
    const double t = 0.5 * T * (nodes[i] + 1.0);
    for (int j = 0; j < np; ++j) {
      const double tau = 0.5 * T * (nodes[j] + 1.0);
      samples[i][j] = kernel(t, tau);
    }
  }
  for (int p = 0; p < np; ++p)
    for (int q = 0; q < np; ++q) {
      Matrix acc(n, n);
      for (int i = 0; i < np; ++i)
        for (int j = 0; j < np; ++j) acc += samples[i][j] * (d(p, i) * d(q, j));
      coef[p][q] = std::move(acc);
    }

  DegenerateKernel dk;
  for (int p = 0; p < np; ++p) {
    dk.phi.push_back([p, degree, T, n](double t) {
      std::vector<double> tv;
      cheb_basis(degree, 2.0 * t / T - 1.0, tv);
      return Matrix::identity(n) * tv[p];
    });
    const std::vector<Matrix> row = coef[p];
    dk.psi.push_back([row, degree, T, n](double tau) {
      std::vector<double> tv;
      cheb_basis(degree, 2.0 * tau / T - 1.0, tv);
      Matrix acc(n, n);
      for (int q = 0; q <= degree; ++q) acc += row[q] * tv[q];
      return acc;
    });
  }

  ApproximationReport rep;
  rep.kernel = std::move(dk);
  rep.degree = degree;
  rep.sample_grid = eps_t_grid;
  rep.epsilon =
      estimate_epsilon(kernel, rep.kernel, T, eps_t_grid, eps_tau_panels);
  return rep;
}

double estimate_epsilon(const KernelFn& kernel, const DegenerateKernel& dk,
                        double T, int t_grid, int tau_panels) {
  if (t_grid < 64) throw std::invalid_argument("t_grid must be >= 64");
  if (tau_panels < 2 || tau_panels % 2 != 0)
    throw std::invalid_argument("tau_panels must be even and >= 2");

  const int k = dk.rank();
  double worst = 0.0;
  const double h = T / tau_panels;
  std::vector<Matrix> phis(k);
  for (int it = 0; it < t_grid; ++it) {
    const double t = T * it / (t_grid - 1);
    for (int j = 0; j < k; ++j) phis[j] = dk.phi[j](t);
    double integral = 0.0;
    for (int iq = 0; iq <= tau_panels; ++iq) {
      const double tau = iq == tau_panels ? T : iq * h;
      Matrix diff = kernel(t, tau);
      for (int j = 0; j < k; ++j) diff -= phis[j] * dk.psi[j](tau);
      const double w = (iq == 0 || iq == tau_panels) ? 1.0
                       : (iq % 2 == 1)               ? 4.0
                                                     : 2.0;
      integral += w * max_norm(diff);
    }
    worst = std::max(worst, integral * h / 3.0);
  }
  return worst;
}

}  // namespace fide
