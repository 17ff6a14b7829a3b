#include <cmath>

#include "corpus.hpp"
#include "doctest.h"
#include "fide/degsolve.hpp"
#include "fide/refcheck.hpp"
#include "oracles.hpp"

using fide::ErrorCode;
using fide::Matrix;
using fide::Partition;
using fide::Problem;
using fide::Solution;
using fide::SolveError;
using fide::SolveOptions;
using fide::SpecialTables;
using fide::Vector;

namespace {

SolveOptions pinned_steps(std::vector<int> steps) {
  SolveOptions opts;
  opts.steps = std::move(steps);
  return opts;
}

}  // namespace

// Every intermediate of the worked rank-1 problem has a hand value:
// G = 1/2, M = 2, psi-hat tables, V = 1/2, g = 1/4, D = 2, F = 1, Q = 4,
// rhs = 0, lambda = 0, mu = 1/2, F*(t) = 1, x(t) = t.
TEST_CASE("worked rank-1 tables") {
  const Problem p = corpus::worked_rank1();
  const Partition part = fide::make_partition_steps({0.0, 1.0}, {16});
  const SpecialTables t = fide::build_tables(p, part);

  CHECK(t.G(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t.psi_hat[0][0](0, 0) == doctest::Approx(1.0));
  CHECK(t.psi_hat_phi[0][0][0](0, 0) == doctest::Approx(0.5));
  CHECK(t.psi_hat_a[0][0](0, 0) == doctest::Approx(0.0));
  CHECK(t.psi_hat_f[0][0][0] == doctest::Approx(0.25));
  CHECK(t.e_phi[0][0](0, 0) == doctest::Approx(1.0));
  CHECK(t.e_a[0](0, 0) == doctest::Approx(0.0));
  CHECK(t.e_f[0][0] == doctest::Approx(0.5));
  CHECK(t.V[0][0](0, 0) == doctest::Approx(0.5));
  CHECK(t.g[0][0] == doctest::Approx(0.25));
  REQUIRE(t.regular);
  CHECK((*t.M)(0, 0) == doctest::Approx(2.0));

  const auto reg = fide::check_regularity(t);
  CHECK(reg.regular);
  CHECK(*reg.norm_inv == doctest::Approx(2.0));
}

TEST_CASE("worked rank-1 parameter system and solution") {
  const Problem p = corpus::worked_rank1();
  const Partition part = fide::make_partition_steps({0.0, 1.0}, {16});
  const SpecialTables t = fide::build_tables(p, part);
  const auto sys = fide::assemble_param_system(p, part, t);

  CHECK(sys.d_blocks[0][0](0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(sys.f_vec[0][0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sys.q(0, 0) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(std::abs(sys.rhs[0]) <= 1e-12);

  const auto lambda = fide::solve_params(sys);
  CHECK(std::abs(lambda[0][0]) <= 1e-13);

  const auto mu = fide::recover_mu(t, lambda);
  CHECK(mu[0][0] == doctest::Approx(0.5).epsilon(1e-12));

  const auto fstar = fide::rhs_function(p, t, lambda, mu);
  for (double tt : {0.0, 0.3, 0.71, 1.0})
    CHECK(fstar(tt)[0] == doctest::Approx(1.0).epsilon(1e-12));

  const Solution sol = fide::reconstruct(p, part, lambda, fstar, mu);
  for (int i = 0; i <= 16; ++i)
    CHECK(std::abs(sol.grid[0].values[i][0] - part.meshes[0].node(i)) <= 1e-12);
  CHECK(sol.diagnostics.boundary_residual <= 1e-12);
  CHECK(sol.diagnostics.continuity_residual == 0.0);  // m = 1, vacuous
}

TEST_CASE("mu recovery formulas in degenerate corners") {
  // Identity system: Q = I, rhs = v gives lambda = v.
  fide::ParamSystem sys;
  sys.n = 2;
  sys.m = 1;
  sys.q = Matrix::identity(2);
  sys.rhs = Vector{3.0, -7.0};
  const auto lambda = fide::solve_params(sys);
  CHECK(lambda[0][0] == doctest::Approx(3.0));
  CHECK(lambda[0][1] == doctest::Approx(-7.0));

  fide::ParamSystem bad = sys;
  bad.q = Matrix(2, 2);
  try {
    fide::solve_params(bad);
    FAIL("expected NOT_WELL_POSED");
  } catch (const SolveError& e) {
    CHECK(e.code() == ErrorCode::NotWellPosed);
  }
}

TEST_CASE("splitting the worked problem halves G twice over") {
  const Problem p = corpus::worked_rank1();
  const Partition part = fide::make_partition_steps({0.0, 0.5, 1.0}, {16, 16});
  const SpecialTables t = fide::build_tables(p, part);
  // 1/8 from each half.
  CHECK(t.G(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("zero kernel tables") {
  const Problem p = corpus::zero_kernel_threept();
  const Partition part = fide::make_partition_steps({0.0, 0.5, 1.0}, {8, 8});
  const SpecialTables t = fide::build_tables(p, part);
  CHECK(fide::max_norm(t.G) == doctest::Approx(0.0));
  REQUIRE(t.regular);
  CHECK(fide::max_norm(*t.M - Matrix::identity(1)) == doctest::Approx(0.0));
  CHECK(fide::max_norm(t.V[0][0]) == doctest::Approx(0.0));
  const auto reg = fide::check_regularity(t);
  CHECK(*reg.norm_inv == doctest::Approx(1.0));

  // mu = M g with M = I.
  const auto mu = fide::recover_mu(t, {Vector{0.0}, Vector{0.0}});
  CHECK(mu[0][0] == doctest::Approx(t.g[0][0]));
}

TEST_CASE("zero-kernel parameter matrix has the block pattern") {
  const Problem p = corpus::zero_kernel_threept();
  const Partition part = fide::make_partition_steps({0.0, 0.5, 1.0}, {8, 8});
  const SpecialTables t = fide::build_tables(p, part);
  const auto sys = fide::assemble_param_system(p, part, t);
  // Boundary row: [B_0 + B_2 D, B_1 + B_2 + B_2 D] = [1, 0];
  // continuity row: [I, -I].
  CHECK(sys.q(0, 0) == doctest::Approx(1.0));
  CHECK(sys.q(0, 1) == doctest::Approx(0.0));
  CHECK(sys.q(1, 0) == doctest::Approx(1.0));
  CHECK(sys.q(1, 1) == doctest::Approx(-1.0));

  const Solution sol = fide::solve_degenerate(p, pinned_steps({8, 8}));
  for (const auto& g : sol.grid)
    for (const auto& v : g.values) CHECK(v[0] == doctest::Approx(2.0));
}

TEST_CASE("refine_partition inserts midpoints") {
  const Partition a = fide::make_partition({0.0, 1.0}, 0.25);
  const Partition b = fide::refine_partition(a);
  CHECK(b.points == std::vector<double>{0.0, 0.5, 1.0});

  const Partition c = fide::make_partition({0.0, 1.0, 3.0}, 0.5);
  const Partition d = fide::refine_partition(c);
  CHECK(d.points == std::vector<double>{0.0, 0.5, 1.0, 2.0, 3.0});

  const Partition e = fide::refine_partition(b);
  CHECK(e.points == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  // Same density policy keeps per-length step counts.
  CHECK(e.h_max == a.h_max);
}

TEST_CASE("end-to-end worked problem") {
  const Solution sol =
      fide::solve_degenerate(corpus::worked_rank1(), pinned_steps({16}));
  CHECK(std::abs(sol.lambda[0][0]) <= 1e-12);
  CHECK(sol.mu[0][0] == doctest::Approx(0.5).epsilon(1e-10));
  for (int i = 0; i <= 16; ++i)
    CHECK(std::abs(sol.grid[0].values[i][0] -
                   sol.partition.meshes[0].node(i)) <= 1e-12);
  CHECK(sol.diagnostics.regular);
  CHECK(sol.diagnostics.refinements == 0);
  CHECK(sol.diagnostics.norm_inv_ig == doctest::Approx(2.0));
  CHECK(sol.diagnostics.qstar_certified);
  REQUIRE(sol.diagnostics.wellposedness_constant.has_value());
}

TEST_CASE("manufactured rotation system is solved to mesh accuracy") {
  const Problem p = corpus::rotation_threept();
  const Solution sol = fide::solve_degenerate(p, pinned_steps({32, 32}));
  double err = 0.0;
  for (const auto& g : sol.grid)
    for (int i = 0; i <= g.mesh.steps; ++i) {
      const Vector x = corpus::rotation_xstar()(g.mesh.node(i));
      err = std::max(err, fide::max_norm(g.values[i] - x));
    }
  CHECK(err <= 1e-7);
  CHECK(sol.diagnostics.boundary_residual <= 1e-8);
  CHECK(sol.diagnostics.continuity_residual <= 1e-8);

  // The moments are taken against the shifted segments u_r = x - lambda_r,
  // so mu_j plus the plain psi integrals applied to lambda must equal the
  // high-resolution moment of the exact solution.
  const auto& dk = std::get<fide::DegenerateKernel>(p.kernel);
  const Partition& part = sol.partition;
  const SpecialTables tables = fide::build_tables(p, part);
  const fide::SubintervalMesh fine = fide::SubintervalMesh::make(0.0, 1.0, 2048);
  for (int j = 0; j < dk.rank(); ++j) {
    fide::VectorGrid g{fine, {}};
    for (int i = 0; i <= fine.steps; ++i)
      g.values.push_back(corpus::rotation_xstar()(fine.node(i)));
    const Vector moment = fide::simpson(dk.psi[j], g);
    Vector shifted = sol.mu[j];
    for (int r = 0; r < part.m(); ++r)
      shifted += tables.psi_hat[j][r] * sol.lambda[r];
    CHECK(fide::max_norm(shifted - moment) <= 1e-6);
  }
}

TEST_CASE("tables do not depend on the fundamental-matrix seeding") {
  const Problem p = corpus::rotation_threept();
  const Partition part = fide::make_partition_steps({0.0, 0.5, 1.0}, {32, 32});
  const SpecialTables t = fide::build_tables(p, part);
  for (unsigned seed : {0u, 1u, 7u, 2024u}) {
    const auto xr = oracles::xroute_tables(p, part, seed);
    CHECK(fide::max_norm(t.G - xr.g) <= 1e-8);
  }
}

TEST_CASE("V blocks agree with the direct nested-quadrature form") {
  const Problem p = corpus::rotation_threept();
  const Partition part = fide::make_partition_steps({0.0, 0.5, 1.0}, {32, 32});
  const SpecialTables t = fide::build_tables(p, part);
  const auto xr = oracles::xroute_tables(p, part, 0);
  const auto& dk = std::get<fide::DegenerateKernel>(p.kernel);

  for (int pp = 0; pp < t.k; ++pp)
    for (int r = 0; r < t.m; ++r) {
      Matrix direct = xr.psi_a[pp][r];
      for (int s = 0; s < t.m; ++s)
        for (int j = 0; j < t.k; ++j)
          direct += xr.psi_phi[pp][s][j] *
                    oracles::plain_psi_integral(dk, j, part.meshes[r], p.n);
      CHECK(fide::max_norm(t.V[pp][r] - direct) <= 1e-8);
    }
}

TEST_CASE("true parameters satisfy the assembled system to fourth order") {
  const Problem p = corpus::rotation_threept();
  double resid_prev = 0.0;
  double c_prev = 0.0;
  for (int level = 0; level < 2; ++level) {
    const int steps = level == 0 ? 16 : 32;
    const Partition part =
        fide::make_partition_steps({0.0, 0.5, 1.0}, {steps, steps});
    const SpecialTables t = fide::build_tables(p, part);
    const auto sys = fide::assemble_param_system(p, part, t);

    Vector lambda_true(2 * part.m());
    for (int r = 0; r < part.m(); ++r) {
      const Vector x = corpus::rotation_xstar()(part.points[r]);
      lambda_true[2 * r] = x[0];
      lambda_true[2 * r + 1] = x[1];
    }
    const double resid = fide::max_norm(sys.q * lambda_true - sys.rhs);
    const double h = part.meshes[0].h;
    const double c = resid / (h * h * h * h);
    if (level == 1) {
      CHECK(resid <= resid_prev);
      const double ratio = c / c_prev;
      CHECK(ratio >= 0.25);
      CHECK(ratio <= 4.0);
    }
    resid_prev = resid;
    c_prev = c;
  }
}

TEST_CASE("solutions are linear in the data") {
  Problem p1 = corpus::worked_rank1();
  Problem p2 = p1;
  p2.f_fn = [](double t) { return Vector{std::sin(t)}; };
  p2.condition.d = Vector{-0.3};
  Problem p12 = p1;
  p12.f_fn = [&](double t) { return p1.f_fn(t) + p2.f_fn(t); };
  p12.condition.d = p1.condition.d + p2.condition.d;

  const auto opts = pinned_steps({16});
  const Solution s1 = fide::solve_degenerate(p1, opts);
  const Solution s2 = fide::solve_degenerate(p2, opts);
  const Solution s12 = fide::solve_degenerate(p12, opts);
  for (int i = 0; i <= 16; ++i) {
    const double sum = s1.grid[0].values[i][0] + s2.grid[0].values[i][0];
    CHECK(std::abs(s12.grid[0].values[i][0] - sum) <= 1e-9);
  }
}

TEST_CASE("solution norm obeys the a priori bound") {
  for (const Problem& p : {corpus::worked_rank1(), corpus::rotation_threept(),
                           corpus::zero_kernel_threept()}) {
    const Solution sol = fide::solve_degenerate(p);
    REQUIRE(sol.diagnostics.wellposedness_constant.has_value());
    const double bound =
        *sol.diagnostics.wellposedness_constant *
        std::max(fide::max_norm(p.condition.d),
                 fide::sampled_sup_norm(p.f_fn, sol.partition));
    CHECK(fide::sup_norm(sol) <= bound);
  }
}

TEST_CASE("degenerate boundary operator is rejected as not well-posed") {
  Problem p = corpus::zero_kernel_threept();
  p.condition.b = {Matrix(1, 1), Matrix(1, 1), Matrix(1, 1)};
  try {
    fide::solve_degenerate(p);
    FAIL("expected NOT_WELL_POSED");
  } catch (const SolveError& e) {
    CHECK(e.code() == ErrorCode::NotWellPosed);
  }
}

TEST_CASE("worked family with a singular boundary combination") {
  // B_0 = 3, B_1 = -1 annihilates lambda in the family
  // x = lambda + (2 lambda + 1) t, so Q = 3 - 1 - 2 = 0.
  Problem p = corpus::worked_rank1();
  p.condition.b = {Matrix::of({{3.0}}), Matrix::of({{-1.0}})};
  try {
    fide::solve_degenerate(p, pinned_steps({16}));
    FAIL("expected NOT_WELL_POSED");
  } catch (const SolveError& e) {
    CHECK(e.code() == ErrorCode::NotWellPosed);
  }
}

TEST_CASE("refinement recovers regularity when the first partition fails") {
  // phi = psi = sqrt(2) makes I - G exactly singular on the unsplit
  // interval; one halving brings G to 1/2. With the condition x(1) = 2 the
  // problem is well-posed with solution x = 2.5 t - 0.5.
  const double s2 = std::sqrt(2.0);
  Problem p;
  p.n = 1;
  p.T = 1.0;
  p.a_fn = corpus::scalar_mat(0.0);
  p.kernel =
      fide::DegenerateKernel{{corpus::scalar_mat(s2)}, {corpus::scalar_mat(s2)}};
  p.f_fn = corpus::const_vec(Vector{1.0});
  p.condition = fide::MultipointCondition{
      {0.0, 1.0}, {Matrix::of({{0.0}}), Matrix::of({{1.0}})}, Vector{2.0}};

  SolveOptions opts;
  opts.h_max = 1.0 / 32;
  const Solution sol = fide::solve_degenerate(p, opts);
  CHECK(sol.diagnostics.refinements == 1);
  CHECK(sol.partition.m() == 2);
  for (const auto& g : sol.grid)
    for (int i = 0; i <= g.mesh.steps; ++i)
      CHECK(g.values[i][0] ==
            doctest::Approx(2.5 * g.mesh.node(i) - 0.5).epsilon(1e-9));

  SolveOptions capped = opts;
  capped.max_refinements = 0;
  try {
    fide::solve_degenerate(p, capped);
    FAIL("expected NOT_REGULAR");
  } catch (const SolveError& e) {
    CHECK(e.code() == ErrorCode::NotRegular);
  }
}

TEST_CASE("an ill-posed problem stays singular after refinement") {
  // Same singular kernel but condition x(0) = d: the solution family keeps
  // one free constant for every d, so every parameter matrix is singular.
  const double s2 = std::sqrt(2.0);
  Problem p;
  p.n = 1;
  p.T = 1.0;
  p.a_fn = corpus::scalar_mat(0.0);
  p.kernel =
      fide::DegenerateKernel{{corpus::scalar_mat(s2)}, {corpus::scalar_mat(s2)}};
  p.f_fn = corpus::const_vec(Vector{1.0});
  p.condition = fide::MultipointCondition{
      {0.0, 1.0}, {Matrix::of({{1.0}}), Matrix::of({{0.0}})}, Vector{-0.5}};
  try {
    fide::solve_degenerate(p);
    FAIL("expected NOT_WELL_POSED");
  } catch (const SolveError& e) {
    CHECK(e.code() == ErrorCode::NotWellPosed);
  }
}

TEST_CASE("solver agrees with the closed-form rank-1 oracle") {
  Problem p = corpus::worked_rank1();
  p.a_fn = corpus::scalar_mat(-1.0);

  SolveOptions opts;
  opts.h_max = 1.0 / 32;
  const Solution numeric = fide::solve_degenerate(p, opts);
  const Solution exact = fide::rank1_closed_form(p, opts.h_max);
  REQUIRE(numeric.partition.points == exact.partition.points);
  CHECK(fide::sup_diff_norm(numeric, exact) <= 1e-8);
}

TEST_CASE("certification diagnostics on the worked problem") {
  const Problem p = corpus::worked_rank1();
  for (int steps : {8, 16}) {
    const Solution sol = fide::solve_degenerate(p, pinned_steps({steps}));
    REQUIRE(sol.diagnostics.epsilon_h.has_value());
    // All table entries are low-degree polynomial quadratures, so the
    // halved-mesh system is unchanged to rounding.
    CHECK(*sol.diagnostics.epsilon_h <= 1e-12);
    CHECK(sol.diagnostics.qstar_certified);
  }
}

TEST_CASE("invalid problems are rejected before solving") {
  Problem p = corpus::worked_rank1();
  p.condition.points = {0.0, 0.5};
  try {
    fide::solve_degenerate(p);
    FAIL("expected INVALID_PROBLEM");
  } catch (const SolveError& e) {
    CHECK(e.code() == ErrorCode::InvalidProblem);
  }
}
