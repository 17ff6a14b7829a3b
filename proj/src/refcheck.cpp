#include "fide/refcheck.hpp"

#include <cmath>
#include <stdexcept>

#include "fide/errors.hpp"

namespace fide {

namespace {

/// Order-4 first derivative on a uniform grid: centered in the interior,
/// one-sided five-point stencils near the ends.
Vector fd4_derivative(const std::vector<Vector>& v, int j, int s, double h) {
  const double inv = 1.0 / (12.0 * h);
  if (j == 0)
    return (v[0] * -25.0 + v[1] * 48.0 - v[2] * 36.0 + v[3] * 16.0 -
            v[4] * 3.0) * inv;
  if (j == 1)
    return (v[0] * -3.0 - v[1] * 10.0 + v[2] * 18.0 - v[3] * 6.0 + v[4]) * inv;
  if (j == s - 1)
    return (v[s] * 3.0 + v[s - 1] * 10.0 - v[s - 2] * 18.0 + v[s - 3] * 6.0 -
            v[s - 4]) * inv;
  if (j == s)
    return (v[s] * 25.0 - v[s - 1] * 48.0 + v[s - 2] * 36.0 -
            v[s - 3] * 16.0 + v[s - 4] * 3.0) * inv;
  return (v[j - 2] - v[j - 1] * 8.0 + v[j + 1] * 8.0 - v[j + 2]) * inv;
}

}  // namespace

ResidualReport residual(const Problem& p, const Solution& s) {
  for (const VectorGrid& g : s.grid)
    if (g.mesh.steps < 4)
      throw std::invalid_argument(
          "residual: meshes need >= 4 steps for the order-4 stencils");

  const auto* dk = std::get_if<DegenerateKernel>(&p.kernel);
  const auto* gk = std::get_if<GeneralKernel>(&p.kernel);

  // Integral term. For a separable kernel the moments against the grid are
  // computed once; a general kernel is integrated per probe point.
  std::vector<Vector> moments;
  if (dk) {
    moments.assign(dk->rank(), Vector(p.n));
    for (int j = 0; j < dk->rank(); ++j)
      for (const VectorGrid& g : s.grid) moments[j] += simpson(dk->psi[j], g);
  }
  auto integral_term = [&](double t) {
    Vector acc(p.n);
    if (dk) {
      for (int j = 0; j < dk->rank(); ++j) acc += dk->phi[j](t) * moments[j];
      return acc;
    }
    for (const VectorGrid& g : s.grid) {
      VectorGrid weighted{g.mesh, {}};
      weighted.values.reserve(g.values.size());
      for (int i = 0; i <= g.mesh.steps; ++i)
        weighted.values.push_back(gk->k(t, g.mesh.node(i)) * g.values[i]);
      acc += simpson(weighted);
    }
    return acc;
  };

  ResidualReport rep;
  for (const VectorGrid& g : s.grid) {
    const int steps = g.mesh.steps;
    for (int j = 0; j <= steps; ++j) {
      const double t = g.mesh.node(j);
      const Vector lhs = fd4_derivative(g.values, j, steps, g.mesh.h);
      const Vector rhs =
          p.a_fn(t) * g.values[j] + integral_term(t) + p.f_fn(t);
      rep.ode_residual = std::max(rep.ode_residual, max_norm(lhs - rhs));
      ++rep.probe_count;
    }
  }

  // x at each condition point: the left-endpoint value of the matching
  // subinterval, or the final node at T.
  Vector bres = p.condition.d * -1.0;
  const auto& pts = s.partition.points;
  for (std::size_t ci = 0; ci < p.condition.points.size(); ++ci) {
    const double tc = p.condition.points[ci];
    Vector x(p.n);
    bool found = false;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
      if (pts[i] == tc) {
        x = s.grid[i].values.front();
        found = true;
        break;
      }
    if (!found && pts.back() == tc) {
      x = s.grid.back().values.back();
      found = true;
    }
    if (!found)
      throw std::invalid_argument(
          "residual: condition point is not a partition point");
    bres += p.condition.b[ci] * x;
  }
  rep.boundary_residual = max_norm(bres);
  return rep;
}

Solution rank1_closed_form(const Problem& p, double h_max) {
  if (p.n != 1)
    throw std::invalid_argument("rank1_closed_form: scalar problems only");
  const auto* dk = std::get_if<DegenerateKernel>(&p.kernel);
  if (!dk || dk->rank() != 1)
    throw std::invalid_argument("rank1_closed_form: rank-1 kernel required");

  const double a = p.a_fn(0.0)(0, 0);
  const double c = dk->phi[0](0.0)(0, 0) * dk->psi[0](0.0)(0, 0);
  const double T = p.T;

  auto exp_at = [a](double t) { return std::exp(a * t); };
  // E(t) = int_0^t e^{a(t-s)} ds
  auto ea = [a](double t) { return a == 0.0 ? t : std::expm1(a * t) / a; };
  // F(t) = int_0^t e^{a(t-s)} f(s) ds, by composite Simpson.
  auto fconv = [&](double t) {
    if (t == 0.0) return 0.0;
    constexpr int panels = 512;
    const double h = t / panels;
    double acc = 0.0;
    for (int i = 0; i <= panels; ++i) {
      const double si = i == panels ? t : i * h;
      const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      acc += w * std::exp(a * (t - si)) * p.f_fn(si)[0];
    }
    return acc * h / 3.0;
  };

  const double big_p = ea(T);
  const double big_q = a == 0.0 ? T * T / 2.0 : (std::expm1(a * T) - a * T) / (a * a);
  double big_r;
  {
    constexpr int panels = 512;
    const double h = T / panels;
    double acc = 0.0;
    for (int i = 0; i <= panels; ++i) {
      const double si = i == panels ? T : i * h;
      const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      acc += w * fconv(si);
    }
    big_r = acc * h / 3.0;
  }

  // mu (1 - cQ) = lambda P + R
  const double denom_mu = 1.0 - c * big_q;
  if (std::abs(denom_mu) <= 1e-10 * std::max(1.0, std::abs(c * big_q)))
    throw SolveError(ErrorCode::NoUniqueSolution,
                     "moment equation is singular (1 - cQ vanishes)");

  double sum_be = 0.0, sum_bea = 0.0, sum_bf = 0.0;
  for (std::size_t i = 0; i < p.condition.points.size(); ++i) {
    const double ti = p.condition.points[i];
    const double bi = p.condition.b[i](0, 0);
    sum_be += bi * exp_at(ti);
    sum_bea += bi * ea(ti);
    sum_bf += bi * fconv(ti);
  }
  const double coeff = sum_be + c * big_p / denom_mu * sum_bea;
  const double rhs = p.condition.d[0] - sum_bf - c * big_r / denom_mu * sum_bea;
  if (std::abs(coeff) <= 1e-10 * (1.0 + std::abs(sum_be)))
    throw SolveError(ErrorCode::NoUniqueSolution,
                     "boundary equation is singular (lambda coefficient "
                     "vanishes)");

  const double lambda = rhs / coeff;
  const double mu = (lambda * big_p + big_r) / denom_mu;
  auto x_of = [&](double t) {
    return lambda * exp_at(t) + c * mu * ea(t) + fconv(t);
  };

  Solution sol;
  sol.partition = make_partition(p.condition.points, h_max);
  for (const SubintervalMesh& mesh : sol.partition.meshes) {
    VectorGrid g{mesh, {}};
    g.values.reserve(mesh.steps + 1);
    for (int i = 0; i <= mesh.steps; ++i)
      g.values.push_back(Vector{x_of(mesh.node(i))});
    sol.lambda.push_back(g.values.front());
    sol.grid.push_back(std::move(g));
  }
  sol.mu.push_back(Vector{mu});
  return sol;
}

}  // namespace fide
