#include "fide/degsolve.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace fide {

namespace {

const DegenerateKernel& degenerate_kernel(const Problem& p) {
  const auto* dk = std::get_if<DegenerateKernel>(&p.kernel);
  if (!dk)
    throw std::invalid_argument("degenerate-kernel pipeline invoked on a "
                                "general-kernel problem");
  return *dk;
}

/// Boundary matrices aligned with the partition points: condition points
/// keep their B_i, points inserted by refinement get zero blocks. Matching
/// is exact because refinement copies the original point values.
std::vector<Matrix> align_condition(const MultipointCondition& c,
                                    const std::vector<double>& points, int n) {
  std::vector<Matrix> b(points.size(), Matrix(n, n));
  std::size_t ci = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (ci < c.points.size() && points[i] == c.points[ci]) {
      b[i] = c.b[ci];
      ++ci;
    }
  }
  if (ci != c.points.size())
    throw std::logic_error("align_condition: condition points are not a "
                           "subset of the partition points");
  return b;
}

struct ForcingTables {
  std::vector<std::vector<Vector>> psi_hat_f;  // [p][r]
  std::vector<Vector> e_f;                     // [r]
  std::vector<Vector> g;                       // [p]
};

ForcingTables build_forcing_tables(const Problem& p, const Partition& part,
                                   const VectorFn& forcing) {
  const DegenerateKernel& dk = degenerate_kernel(p);
  const int k = dk.rank();
  const int m = part.m();

  ForcingTables out;
  out.psi_hat_f.assign(k, std::vector<Vector>(m, Vector(p.n)));
  out.e_f.assign(m, Vector(p.n));
  out.g.assign(k, Vector(p.n));

  for (int r = 0; r < m; ++r) {
    const VectorGrid traj =
        rk4_cauchy<Vector>(p.a_fn, forcing, part.meshes[r]);
    out.e_f[r] = traj.values.back();
    for (int pp = 0; pp < k; ++pp) {
      out.psi_hat_f[pp][r] = simpson(dk.psi[pp], traj);
      out.g[pp] += out.psi_hat_f[pp][r];
    }
  }
  return out;
}

std::pair<std::vector<Vector>, Vector> assemble_rhs(
    const Problem& p, const Partition& part, const SpecialTables& tables,
    const ForcingTables& ft) {
  const int n = p.n;
  const int m = part.m();
  const int k = tables.k;

  // F_r = sum_j e_phi(r,j) sum_p M_{j,p} g_p + e_f(r)
  std::vector<Vector> f_vec(m, Vector(n));
  std::vector<Vector> mg(k, Vector(n));
  for (int j = 0; j < k; ++j)
    for (int pp = 0; pp < k; ++pp) mg[j] += tables.m_block(j, pp) * ft.g[pp];
  for (int r = 0; r < m; ++r) {
    Vector acc = ft.e_f[r];
    for (int j = 0; j < k; ++j) acc += tables.e_phi[r][j] * mg[j];
    f_vec[r] = std::move(acc);
  }

  const std::vector<Matrix> b = align_condition(p.condition, part.points, n);
  Vector rhs(n * m);
  const Vector top = p.condition.d - b[m] * f_vec[m - 1];
  for (int i = 0; i < n; ++i) rhs[i] = top[i];
  for (int pp = 1; pp < m; ++pp)
    for (int i = 0; i < n; ++i) rhs[pp * n + i] = -f_vec[pp - 1][i];

  return {std::move(f_vec), std::move(rhs)};
}

Solution solve_prepared(const DegenerateWorkspace& ws, const VectorFn& forcing);

}  // namespace

Partition refine_partition(const Partition& part) {
  std::vector<double> points;
  points.reserve(2 * part.points.size() - 1);
  for (std::size_t i = 0; i + 1 < part.points.size(); ++i) {
    points.push_back(part.points[i]);
    points.push_back(0.5 * (part.points[i] + part.points[i + 1]));
  }
  points.push_back(part.points.back());
  return make_partition(points, part.h_max);
}

SpecialTables build_tables(const Problem& p, const Partition& part) {
  const DegenerateKernel& dk = degenerate_kernel(p);
  const int n = p.n;
  const int k = dk.rank();
  const int m = part.m();

  SpecialTables t;
  t.n = n;
  t.k = k;
  t.m = m;
  t.psi_hat.assign(k, std::vector<Matrix>(m, Matrix(n, n)));
  t.psi_hat_phi.assign(
      k, std::vector<std::vector<Matrix>>(m, std::vector<Matrix>(k, Matrix(n, n))));
  t.psi_hat_a.assign(k, std::vector<Matrix>(m, Matrix(n, n)));
  t.e_phi.assign(m, std::vector<Matrix>(k, Matrix(n, n)));
  t.e_a.assign(m, Matrix(n, n));

  const Matrix eye = Matrix::identity(n);
  for (int r = 0; r < m; ++r) {
    const SubintervalMesh& mesh = part.meshes[r];

    // One matrix Cauchy solve per kernel term, one for the driving term A.
    for (int j = 0; j < k; ++j) {
      const MatrixGrid traj = rk4_cauchy<Matrix>(p.a_fn, dk.phi[j], mesh);
      t.e_phi[r][j] = traj.values.back();
      for (int pp = 0; pp < k; ++pp)
        t.psi_hat_phi[pp][r][j] = simpson(dk.psi[pp], traj);
    }
    const MatrixGrid traj_a = rk4_cauchy<Matrix>(p.a_fn, p.a_fn, mesh);
    t.e_a[r] = traj_a.values.back();
    // Plain integral of psi_p: weight against a grid that is constant I.
    const MatrixGrid ones{mesh, std::vector<Matrix>(mesh.steps + 1, eye)};
    for (int pp = 0; pp < k; ++pp) {
      t.psi_hat_a[pp][r] = simpson(dk.psi[pp], traj_a);
      t.psi_hat[pp][r] = simpson(dk.psi[pp], ones);
    }
  }

  // G blocks sum the psi_hat_phi table over subintervals.
  t.G = Matrix(n * k, n * k);
  for (int pp = 0; pp < k; ++pp)
    for (int j = 0; j < k; ++j) {
      Matrix acc(n, n);
      for (int r = 0; r < m; ++r) acc += t.psi_hat_phi[pp][r][j];
      set_block(t.G, pp, j, acc);
    }

  // V blocks: psi_hat_a plus the G-weighted plain psi integrals.
  t.V.assign(k, std::vector<Matrix>(m, Matrix(n, n)));
  for (int pp = 0; pp < k; ++pp)
    for (int r = 0; r < m; ++r) {
      Matrix acc = t.psi_hat_a[pp][r];
      for (int j = 0; j < k; ++j) acc += t.g_block(pp, j) * t.psi_hat[j][r];
      t.V[pp][r] = std::move(acc);
    }

  const ForcingTables ft = build_forcing_tables(p, part, p.f_fn);
  t.psi_hat_f = ft.psi_hat_f;
  t.e_f = ft.e_f;
  t.g = ft.g;

  try {
    t.M = invert(Matrix::identity(n * k) - t.G);
    t.regular = true;
  } catch (const SingularMatrixError&) {
    t.regular = false;
  }
  return t;
}

RegularityReport check_regularity(const SpecialTables& tables) {
  RegularityReport rep;
  rep.regular = tables.regular;
  if (tables.regular) rep.norm_inv = max_norm(*tables.M);
  return rep;
}

ParamSystem assemble_param_system(const Problem& p, const Partition& part,
                                  const SpecialTables& tables) {
  if (!tables.regular)
    throw SolveError(ErrorCode::NotRegular,
                     "parameter system requested for a non-regular partition");
  const int n = p.n;
  const int m = part.m();
  const int k = tables.k;

  ParamSystem sys;
  sys.n = n;
  sys.m = m;

  // MV[j][i] = sum_p M_{j,p} V_{p,i}
  std::vector<std::vector<Matrix>> mv(k, std::vector<Matrix>(m, Matrix(n, n)));
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < m; ++i)
      for (int pp = 0; pp < k; ++pp)
        mv[j][i] += tables.m_block(j, pp) * tables.V[pp][i];

  sys.d_blocks.assign(m, std::vector<Matrix>(m, Matrix(n, n)));
  for (int r = 0; r < m; ++r)
    for (int i = 0; i < m; ++i) {
      Matrix acc(n, n);
      for (int j = 0; j < k; ++j)
        acc += tables.e_phi[r][j] * (mv[j][i] + tables.psi_hat[j][i]);
      if (i == r) acc += tables.e_a[r];
      sys.d_blocks[r][i] = std::move(acc);
    }

  const ForcingTables ft{tables.psi_hat_f, tables.e_f, tables.g};
  auto [f_vec, rhs] = assemble_rhs(p, part, tables, ft);
  sys.f_vec = std::move(f_vec);
  sys.rhs = std::move(rhs);

  // Boundary block row, then the interior continuity rows.
  const std::vector<Matrix> b = align_condition(p.condition, part.points, n);
  const Matrix eye = Matrix::identity(n);
  sys.q = Matrix(n * m, n * m);
  for (int i = 0; i < m; ++i) {
    Matrix blk = b[i] + b[m] * sys.d_blocks[m - 1][i];
    if (i == m - 1) blk += b[m];
    set_block(sys.q, 0, i, blk);
  }
  for (int pp = 1; pp < m; ++pp) {
    const int row = pp;      // continuity at interior point t_pp
    const int idx = pp - 1;  // D-blocks of subinterval pp
    for (int i = 0; i < m; ++i) {
      Matrix blk = sys.d_blocks[idx][i];
      if (i == idx) blk += eye;
      if (i == idx + 1) blk -= eye;
      set_block(sys.q, row, i, blk);
    }
  }
  return sys;
}

std::vector<Vector> solve_params(const ParamSystem& sys, double pivot_tol) {
  Vector flat(0);
  try {
    flat = lu_solve(sys.q, sys.rhs, pivot_tol);
  } catch (const SingularMatrixError& e) {
    throw SolveError(ErrorCode::NotWellPosed,
                     std::string("parameter matrix is singular; the problem "
                                 "is not well-posed for this partition (") +
                         e.what() + ")");
  }
  std::vector<Vector> lambda(sys.m, Vector(sys.n));
  for (int r = 0; r < sys.m; ++r)
    for (int i = 0; i < sys.n; ++i) lambda[r][i] = flat[r * sys.n + i];
  return lambda;
}

std::vector<Vector> recover_mu(const SpecialTables& tables,
                               const std::vector<Vector>& lambda) {
  const int n = tables.n;
  const int k = tables.k;
  const int m = tables.m;
  std::vector<Vector> mu(k, Vector(n));
  for (int s = 0; s < k; ++s) {
    for (int j = 0; j < m; ++j) {
      Matrix coeff(n, n);
      for (int pp = 0; pp < k; ++pp)
        coeff += tables.m_block(s, pp) * tables.V[pp][j];
      mu[s] += coeff * lambda[j];
    }
    for (int pp = 0; pp < k; ++pp) mu[s] += tables.m_block(s, pp) * tables.g[pp];
  }
  return mu;
}

VectorFn rhs_function(const Problem& p, const SpecialTables& tables,
                      const std::vector<Vector>& lambda,
                      const std::vector<Vector>& mu) {
  const DegenerateKernel& dk = degenerate_kernel(p);
  const int k = tables.k;
  // The bracket mu_s + sum_r psi_hat_{s,r} lambda_r is a constant vector.
  std::vector<Vector> w(k, Vector(p.n));
  for (int s = 0; s < k; ++s) {
    w[s] = mu[s];
    for (int r = 0; r < tables.m; ++r) w[s] += tables.psi_hat[s][r] * lambda[r];
  }
  const VectorFn f = p.f_fn;
  const DegenerateKernel kcopy = dk;
  return [kcopy, w, f, k](double t) {
    Vector v = f(t);
    for (int s = 0; s < k; ++s) v += kcopy.phi[s](t) * w[s];
    return v;
  };
}

Solution reconstruct(const Problem& p, const Partition& part,
                     const std::vector<Vector>& lambda, const VectorFn& fstar,
                     const std::vector<Vector>& mu) {
  const int m = part.m();
  if (static_cast<int>(lambda.size()) != m)
    throw std::invalid_argument("reconstruct: one parameter per subinterval");

  Solution sol;
  sol.partition = part;
  sol.lambda = lambda;
  sol.mu = mu;
  sol.grid.reserve(m);
  for (int r = 0; r < m; ++r)
    sol.grid.push_back(
        rk4_ivp<Vector>(p.a_fn, fstar, part.meshes[r], lambda[r]));

  double cont = 0.0;
  for (int r = 0; r + 1 < m; ++r)
    cont = std::max(cont, max_norm(lambda[r + 1] - sol.grid[r].values.back()));
  sol.diagnostics.continuity_residual = cont;

  // x(t_i) is lambda_{i+1} at interior points and the final grid node at T.
  const std::vector<Matrix> b = align_condition(p.condition, part.points, p.n);
  Vector bres = p.condition.d * -1.0;
  for (int i = 0; i < m; ++i) bres += b[i] * lambda[i];
  bres += b[m] * sol.grid[m - 1].values.back();
  sol.diagnostics.boundary_residual = max_norm(bres);
  return sol;
}

WellposednessReport wellposedness_diagnostics(const Problem& p,
                                              const Partition& part,
                                              const SpecialTables& tables,
                                              const ParamSystem& sys,
                                              const SolveOptions& opts) {
  WellposednessReport rep;
  if (!tables.regular) return rep;
  try {
    const DegenerateKernel& dk = degenerate_kernel(p);

    double alpha = 0.0;
    for (const SubintervalMesh& mesh : part.meshes)
      for (int i = 0; i <= mesh.steps; ++i)
        alpha = std::max(alpha, max_norm(p.a_fn(mesh.node(i))));

    double omega = 0.0;
    for (const SubintervalMesh& mesh : part.meshes)
      omega = std::max(omega, mesh.right - mesh.left);

    double phibar = 0.0;
    for (const SubintervalMesh& mesh : part.meshes) {
      const double v = simpson_scalar(mesh, [&](double t) {
        double s = 0.0;
        for (int j = 0; j < dk.rank(); ++j) s += max_norm(dk.phi[j](t));
        return s;
      });
      phibar = std::max(phibar, v);
    }

    double psibar = 0.0;
    for (int pp = 0; pp < dk.rank(); ++pp) {
      double total = 0.0;
      for (const SubintervalMesh& mesh : part.meshes)
        total += simpson_scalar(
            mesh, [&](double t) { return max_norm(dk.psi[pp](t)); });
      psibar = std::max(psibar, total);
    }

    const double norm_m = max_norm(*tables.M);
    const Matrix q_inv = invert(sys.q, opts.pivot_tol);
    const double gamma = max_norm(q_inv);
    // ||B_m|| stands in for the norm written abstractly in the bound.
    const std::vector<Matrix> b =
        align_condition(p.condition, part.points, p.n);
    const double bm = max_norm(b.back());

    const double ea = std::exp(alpha * omega);
    const double term1 =
        ea * (phibar * (norm_m * psibar * (ea - 1.0 + ea * phibar * psibar) +
                        psibar) +
              1.0);
    const double term2 =
        gamma * (1.0 + bm) *
        std::max(1.0, omega * ea * (1.0 + ea * phibar * norm_m * psibar));
    const double term3 = ea * omega * (phibar * norm_m * psibar * ea + 1.0);
    rep.n_constant = term1 * term2 + term3;

    // Mesh-halving perturbation test for the invertibility of the exact Q.
    Partition fine = part;
    for (SubintervalMesh& mesh : fine.meshes)
      mesh = SubintervalMesh::make(mesh.left, mesh.right, 2 * mesh.steps);
    fine.h_max = part.h_max / 2.0;
    const SpecialTables tables2 = build_tables(p, fine);
    if (tables2.regular) {
      const ParamSystem sys2 = assemble_param_system(p, fine, tables2);
      const double eps_h = max_norm(sys.q - sys2.q);
      rep.epsilon_h = eps_h;
      rep.qstar_certified = gamma * eps_h < 1.0;
    }
  } catch (const SingularMatrixError&) {
    // Leave the degraded report: fields absent, certificate false.
  } catch (const SolveError&) {
  }
  return rep;
}

namespace {

Solution solve_prepared(const DegenerateWorkspace& ws,
                        const VectorFn& forcing) {
  const ForcingTables ft =
      build_forcing_tables(ws.problem, ws.partition, forcing);
  auto [f_vec, rhs] = assemble_rhs(ws.problem, ws.partition, ws.tables, ft);

  const Vector flat = lu_solve(ws.q_lu, rhs);
  std::vector<Vector> lambda(ws.sys.m, Vector(ws.sys.n));
  for (int r = 0; r < ws.sys.m; ++r)
    for (int i = 0; i < ws.sys.n; ++i) lambda[r][i] = flat[r * ws.sys.n + i];

  // Moments against the modified forcing reuse M and V; only g changes.
  SpecialTables t = ws.tables;
  t.psi_hat_f = ft.psi_hat_f;
  t.e_f = ft.e_f;
  t.g = ft.g;
  const std::vector<Vector> mu = recover_mu(t, lambda);

  Problem forced = ws.problem;
  forced.f_fn = forcing;
  const VectorFn fstar = rhs_function(forced, t, lambda, mu);
  Solution sol = reconstruct(forced, ws.partition, lambda, fstar, mu);

  sol.diagnostics.regular = true;
  sol.diagnostics.refinements = ws.refinements;
  sol.diagnostics.norm_inv_ig = ws.norm_inv_ig;
  sol.diagnostics.wellposedness_constant = ws.wellposedness.n_constant;
  sol.diagnostics.epsilon_h = ws.wellposedness.epsilon_h;
  sol.diagnostics.qstar_certified = ws.wellposedness.qstar_certified;
  return sol;
}

}  // namespace

DegenerateWorkspace prepare_workspace(const Problem& p,
                                      const SolveOptions& opts) {
  const std::vector<Finding> findings = validate(p);
  if (!findings.empty()) {
    std::string msg = "invalid problem:";
    for (const Finding& f : findings) msg += " [" + f.code + "] " + f.message;
    throw SolveError(ErrorCode::InvalidProblem, msg);
  }

  DegenerateWorkspace ws;
  ws.problem = p;
  ws.partition = opts.steps
                     ? make_partition_steps(p.condition.points, *opts.steps)
                     : make_partition(p.condition.points, opts.h_max);

  for (int attempt = 0;; ++attempt) {
    ws.tables = build_tables(p, ws.partition);
    if (ws.tables.regular) break;
    if (attempt >= opts.max_refinements)
      throw SolveError(ErrorCode::NotRegular,
                       "I - G stayed singular after " +
                           std::to_string(opts.max_refinements) +
                           " partition refinements");
    ws.partition = refine_partition(ws.partition);
    ws.refinements = attempt + 1;
  }
  ws.norm_inv_ig = max_norm(*ws.tables.M);

  ws.sys = assemble_param_system(p, ws.partition, ws.tables);
  try {
    ws.q_lu = lu_factor(ws.sys.q, opts.pivot_tol);
  } catch (const SingularMatrixError& e) {
    throw SolveError(ErrorCode::NotWellPosed,
                     std::string("parameter matrix is singular; the problem "
                                 "is not well-posed for this partition (") +
                         e.what() + ")");
  }

  if (opts.with_diagnostics)
    ws.wellposedness =
        wellposedness_diagnostics(p, ws.partition, ws.tables, ws.sys, opts);
  return ws;
}

Solution solve_with_forcing(const DegenerateWorkspace& ws,
                            const VectorFn& forcing) {
  return solve_prepared(ws, forcing);
}

Solution solve_degenerate(const Problem& p, const SolveOptions& opts) {
  const DegenerateWorkspace ws = prepare_workspace(p, opts);
  return solve_prepared(ws, p.f_fn);
}

}  // namespace fide
