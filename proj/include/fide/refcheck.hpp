#pragma once

#include "fide/model.hpp"

namespace fide {

/// How well a candidate solution satisfies the original equation and the
/// multipoint condition, judged without the solver's own machinery: the
/// derivative comes from order-4 finite differences on the solution grid and
/// the integral term from composite Simpson over the full grid.
struct ResidualReport {
  double ode_residual = 0.0;
  double boundary_residual = 0.0;
  int probe_count = 0;
};

/// Evaluate both residuals at every grid node. Each subinterval mesh needs
/// at least 4 steps for the one-sided order-4 stencils.
ResidualReport residual(const Problem& p, const Solution& s);

/// Analytic solution of the scalar constant-coefficient rank-1 problem
/// (n = 1, A constant, phi and psi constant): the problem collapses to one
/// scalar moment plus one boundary equation, both solved in closed form,
/// with the forcing convolution evaluated by high-resolution quadrature.
/// Throws NO_UNIQUE_SOLUTION when either scalar denominator vanishes.
Solution rank1_closed_form(const Problem& p, double h_max = 0.0);

}  // namespace fide
