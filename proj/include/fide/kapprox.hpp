#pragma once

#include "fide/model.hpp"

namespace fide {

/// A separable approximation of a general kernel together with its measured
/// defect: epsilon = max over t of the integrated-in-tau max-norm distance
/// between the kernel and the separable sum. epsilon is a grid measurement,
/// not a proved bound.
struct ApproximationReport {
  DegenerateKernel kernel;
  double epsilon = 0.0;
  int degree = 0;
  int sample_grid = 0;
};

/// Entry-wise tensor Chebyshev interpolation of the kernel on [0,T]^2 at
/// degree+1 points per axis. Term p carries the t-basis as a scaled identity
/// (phi_p = T_p * I) and folds the coefficient-combined tau-part into psi_p,
/// so the separable sum has rank degree+1 with n x n factors.
ApproximationReport build_degenerate_approx(const KernelFn& kernel, int degree,
                                            double T, int n,
                                            int eps_t_grid = 129,
                                            int eps_tau_panels = 256);

/// Measured defect of a candidate separable kernel against the original:
/// max over a t-grid of the Simpson approximation of
/// int_0^T || K(t,tau) - sum_j phi_j(t) psi_j(tau) || dtau.
double estimate_epsilon(const KernelFn& kernel, const DegenerateKernel& dk,
                        double T, int t_grid = 129, int tau_panels = 256);

}  // namespace fide
