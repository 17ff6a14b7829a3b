#pragma once

#include <optional>
#include <vector>

#include "fide/errors.hpp"
#include "fide/model.hpp"

namespace fide {

/// Per-partition tables built from the subinterval Cauchy solves and the
/// Simpson quadratures. Index convention: p, j over kernel terms (0-based,
/// rank k), r, i over subintervals (0-based, m of them).
struct SpecialTables {
  int n = 0;
  int k = 0;
  int m = 0;

  // psi_hat[p][r]          = integral of psi_p over subinterval r
  // psi_hat_phi[p][r][j]   = integral of psi_p times the Cauchy solution
  //                          driven by phi_j on subinterval r
  // psi_hat_a[p][r]        = same with driving term A
  // psi_hat_f[p][r]        = same with driving term f (a vector)
  std::vector<std::vector<Matrix>> psi_hat;
  std::vector<std::vector<std::vector<Matrix>>> psi_hat_phi;
  std::vector<std::vector<Matrix>> psi_hat_a;
  std::vector<std::vector<Vector>> psi_hat_f;

  // Endpoint values of the subinterval Cauchy solutions.
  std::vector<std::vector<Matrix>> e_phi;  // [r][j]
  std::vector<Matrix> e_a;                 // [r]
  std::vector<Vector> e_f;                 // [r]

  Matrix G;                           // nk x nk, blocks G[p][j]
  std::vector<std::vector<Matrix>> V; // [p][r]
  std::vector<Vector> g;              // [p]

  bool regular = false;
  std::optional<Matrix> M;  // (I - G)^{-1} when regular, blocks M[j][p]

  Matrix m_block(int j, int p) const { return get_block(*M, j, p, n, n); }
  Matrix g_block(int p, int j) const { return get_block(G, p, j, n, n); }
};

/// The linear system in the subinterval parameters: one boundary block row
/// followed by the interior continuity rows.
struct ParamSystem {
  int n = 0;
  int m = 0;
  std::vector<std::vector<Matrix>> d_blocks;  // [r][i]
  std::vector<Vector> f_vec;                  // [r]
  Matrix q;                                   // nm x nm
  Vector rhs;                                 // nm
};

struct RegularityReport {
  bool regular = false;
  std::optional<double> norm_inv;
};

struct WellposednessReport {
  std::optional<double> n_constant;
  std::optional<double> epsilon_h;
  bool qstar_certified = false;
};

struct SolveOptions {
  double h_max = 0.0;  // <= 0 selects T / (64 m)
  std::optional<std::vector<int>> steps;  // pin per-subinterval step counts
  int max_refinements = 6;
  bool with_diagnostics = true;
  double pivot_tol = kDefaultPivotTol;
};

/// Every subinterval split at its midpoint; original points survive as a
/// subset and meshes are re-derived under the same h_max policy.
Partition refine_partition(const Partition& part);

/// Run the mk + 2m subinterval Cauchy solves and all quadratures; assemble
/// G, V, g and invert I - G when possible.
SpecialTables build_tables(const Problem& p, const Partition& part);

RegularityReport check_regularity(const SpecialTables& tables);

/// Assemble the parameter system from the tables. The multipoint condition
/// is aligned to the partition: points added by refinement carry zero
/// boundary matrices.
ParamSystem assemble_param_system(const Problem& p, const Partition& part,
                                  const SpecialTables& tables);

/// Solve Q lambda = rhs. A singular Q means the problem is not well-posed
/// for this partition.
std::vector<Vector> solve_params(const ParamSystem& sys,
                                 double pivot_tol = kDefaultPivotTol);

/// Kernel moments recovered from the parameters.
std::vector<Vector> recover_mu(const SpecialTables& tables,
                               const std::vector<Vector>& lambda);

/// The closed-form right-hand side for the reconstruction sweeps:
/// F*(t) = sum_s phi_s(t) [mu_s + sum_r psi_hat_{s,r} lambda_r] + f(t).
VectorFn rhs_function(const Problem& p, const SpecialTables& tables,
                      const std::vector<Vector>& lambda,
                      const std::vector<Vector>& mu);

/// Integrate x' = A x + F* from lambda_r on each subinterval and attach the
/// boundary and continuity residuals.
Solution reconstruct(const Problem& p, const Partition& part,
                     const std::vector<Vector>& lambda, const VectorFn& fstar,
                     const std::vector<Vector>& mu = {});

/// The well-posedness constant of the solved problem plus the perturbation
/// certificate: rebuilt at halved mesh steps, Q is invertible whenever
/// ||Q^{-1}|| * ||Q - Q_half|| < 1.
WellposednessReport wellposedness_diagnostics(const Problem& p,
                                              const Partition& part,
                                              const SpecialTables& tables,
                                              const ParamSystem& sys,
                                              const SolveOptions& opts = {});

/// Factored state reused across repeated solves that differ only in the
/// forcing term (the tables, the system matrix, and its factorization are
/// forcing-independent).
struct DegenerateWorkspace {
  Problem problem;
  Partition partition;
  SpecialTables tables;
  ParamSystem sys;
  LuFactors q_lu;
  int refinements = 0;
  WellposednessReport wellposedness;
  double norm_inv_ig = 0.0;
};

DegenerateWorkspace prepare_workspace(const Problem& p,
                                      const SolveOptions& opts = {});

/// Solve with a forcing term replacing the problem's f. Reuses the
/// workspace tables and the factorization of Q.
Solution solve_with_forcing(const DegenerateWorkspace& ws,
                            const VectorFn& forcing);

/// Full pipeline for a degenerate-kernel problem: tables, regularity (with
/// midpoint refinement on non-regular partitions), parameter solve, moment
/// recovery, reconstruction, diagnostics.
Solution solve_degenerate(const Problem& p, const SolveOptions& opts = {});

}  // namespace fide
