#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fide/linalg.hpp"
#include "fide/odequad.hpp"

namespace fide {

using MatrixFn = std::function<Matrix(double)>;
using VectorFn = std::function<Vector(double)>;
using KernelFn = std::function<Matrix(double, double)>;

/// Separable kernel sum_j phi_j(t) psi_j(tau) of rank k = phi.size().
struct DegenerateKernel {
  std::vector<MatrixFn> phi;
  std::vector<MatrixFn> psi;
  int rank() const { return static_cast<int>(phi.size()); }
};

struct GeneralKernel {
  KernelFn k;
};

using Kernel = std::variant<DegenerateKernel, GeneralKernel>;

/// Linear constraint sum_i B_i x(t_i) = d at the points
/// 0 = t_0 < t_1 < ... < t_m = T.
struct MultipointCondition {
  std::vector<double> points;
  std::vector<Matrix> b;
  Vector d;
};

struct Problem {
  int n = 0;
  double T = 0.0;
  MatrixFn a_fn;
  Kernel kernel;
  VectorFn f_fn;
  MultipointCondition condition;
};

/// Partition of [0, T] with one integration mesh per subinterval. h_max is
/// kept so refinement re-derives meshes under the same density policy.
struct Partition {
  std::vector<double> points;
  std::vector<SubintervalMesh> meshes;
  double h_max = 0.0;

  int m() const { return static_cast<int>(meshes.size()); }
};

/// Meshes chosen as the smallest even step count with h <= h_max.
/// h_max <= 0 selects the default T / (64 * m).
Partition make_partition(const std::vector<double>& points, double h_max = 0.0);

/// Meshes with explicitly pinned per-subinterval step counts.
Partition make_partition_steps(const std::vector<double>& points,
                               const std::vector<int>& steps);

struct SolutionDiagnostics {
  bool regular = false;
  int refinements = 0;
  double norm_inv_ig = std::numeric_limits<double>::quiet_NaN();
  double boundary_residual = std::numeric_limits<double>::quiet_NaN();
  double continuity_residual = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> wellposedness_constant;
  std::optional<double> epsilon_h;
  bool qstar_certified = false;
};

/// Solver output: the parameters (solution values at subinterval left
/// endpoints), the kernel moments, and the per-subinterval node values.
/// grid[r].values[0] equals lambda[r] exactly; x(T) is the last node of the
/// last grid.
struct Solution {
  Partition partition;
  std::vector<Vector> lambda;
  std::vector<Vector> mu;
  std::vector<VectorGrid> grid;
  SolutionDiagnostics diagnostics;
};

/// Max over all grid nodes of the vector max-norm.
double sup_norm(const Solution& s);

/// Max over all grid nodes of || a - b ||; partitions must coincide.
double sup_diff_norm(const Solution& a, const Solution& b);

/// Max over all grid nodes of || f(t) ||, the computable surrogate for the
/// sup norm of a coefficient function.
double sampled_sup_norm(const VectorFn& f, const Partition& part);

struct Finding {
  std::string code;
  std::string message;
};

/// Total validation: returns findings instead of throwing. Empty result
/// means every structural invariant holds and all coefficient functions
/// evaluate finitely on a probe grid.
std::vector<Finding> validate(const Problem& p);

/// Build a problem whose exact solution is a chosen function: the forcing
/// becomes xstar' - A xstar - integral of the kernel against xstar (high
/// resolution Simpson), and d is assembled from the boundary matrices.
Problem manufacture(int n, const VectorFn& xstar, const VectorFn& dxstar,
                    const MatrixFn& a_fn, const Kernel& kernel,
                    const std::vector<double>& points,
                    const std::vector<Matrix>& b, int panels = 2048);

}  // namespace fide
