#pragma once

#include <utility>
#include <vector>

#include "fide/degsolve.hpp"
#include "fide/kapprox.hpp"
#include "fide/model.hpp"

namespace fide {

/// Record of the fixed-point sweep over the separable-approximation solves.
/// iterates[0] is the plain approximating solve; deltas[i-1] is the sup-norm
/// distance between iterates i and i-1; bound_history[i] is the a priori
/// error bound at step i.
struct IterationTrace {
  std::vector<Solution> iterates;
  std::vector<double> deltas;
  std::vector<double> bound_history;
  double epsilon = 0.0;
  double c_k = 0.0;
  double q_estimate = 0.0;
  double norm_fd = 0.0;
  bool converged = false;
  int degree = 0;
};

struct IterOptions {
  SolveOptions base;
  double tol = 1e-8;
  int max_iter = 25;
  /// The measured defect is grid-sampled, so the contraction test applies a
  /// safety factor on top of it.
  double safety = 1.25;
  int eps_t_grid = 129;
  int eps_tau_panels = 256;
};

/// Solve a general-kernel problem by iterating solves of its separable
/// approximation of the given degree. The correction forcing at step i is
/// f(t) + integral of [K - sum phi psi] against the previous iterate,
/// evaluated by Simpson on the stored solution grid. Fails with
/// CONTRACTION_FAILED when safety * C_k * epsilon >= 1 (raise the degree),
/// NO_CONVERGENCE when max_iter is exhausted.
std::pair<Solution, IterationTrace> solve_nondegenerate(
    const Problem& p, int degree, const IterOptions& opts = {});

/// A priori bound on || x* - x^(i) ||: q^i / (1 - q) * C_k * norm_fd.
double error_bound(const IterationTrace& trace, int i, double norm_fd);

}  // namespace fide
