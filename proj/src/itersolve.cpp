#include "fide/itersolve.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>

namespace fide {

namespace {

/// Quadrature of the kernel discrepancy against a stored iterate:
///   c(t) = int_0^T [K(t,tau) - sum_j phi_j(t) psi_j(tau)] x(tau) dtau.
///
/// The tau grid interleaves the solution nodes with the step midpoints, one
/// Simpson panel per integration step, which keeps the quadrature at the
/// same order as the rest of the pipeline. The iterate is known at nodes;
/// midpoint values come from cubic interpolation of the four nearest nodes.
/// Discrepancy rows are cached per t (the sweep visits the same t values on
/// every iteration), so after the first iteration an application is a pure
/// weighted accumulation.
class CorrectionOperator {
 public:
  CorrectionOperator(const Problem& p, const DegenerateKernel& dk,
                     const Partition& part)
      : n_(p.n), kernel_(std::get<GeneralKernel>(p.kernel).k), dk_(dk) {
    for (const SubintervalMesh& mesh : part.meshes) {
      const double w = mesh.h / 6.0;
      for (int i = 0; i < mesh.steps; ++i) {
        push_point(mesh.node(i), w);
        push_point(mesh.midpoint(i), 4.0 * w);
      }
      push_point(mesh.right, w);
    }
  }

  /// Load the iterate the next corrections integrate against.
  void set_iterate(const Solution& s) {
    xvals_.clear();
    xvals_.reserve(tau_.size());
    for (const VectorGrid& g : s.grid) {
      const int steps = g.mesh.steps;
      const auto& v = g.values;
      for (int i = 0; i < steps; ++i) {
        xvals_.push_back(v[i]);
        xvals_.push_back(midpoint_value(v, i, steps));
      }
      xvals_.push_back(v[steps]);
    }
  }

  Vector apply(double t) const {
    const std::vector<Matrix>& row = discrepancy_row(t);
    Vector acc(n_);
    for (std::size_t i = 0; i < tau_.size(); ++i)
      acc += row[i] * xvals_[i] * w_[i];
    return acc;
  }

 private:
  void push_point(double tau, double weight) {
    // Consecutive subintervals share their join node; merge the weights.
    if (!tau_.empty() && tau_.back() == tau) {
      w_.back() += weight;
      return;
    }
    tau_.push_back(tau);
    w_.push_back(weight);
  }

  static Vector midpoint_value(const std::vector<Vector>& v, int i,
                               int steps) {
    if (steps == 2) {
      // Only three nodes: quadratic interpolation.
      if (i == 0) return v[0] * (3.0 / 8) + v[1] * (6.0 / 8) - v[2] * (1.0 / 8);
      return v[0] * (-1.0 / 8) + v[1] * (6.0 / 8) + v[2] * (3.0 / 8);
    }
    if (i == 0)
      return v[0] * (5.0 / 16) + v[1] * (15.0 / 16) - v[2] * (5.0 / 16) +
             v[3] * (1.0 / 16);
    if (i == steps - 1)
      return v[steps - 3] * (1.0 / 16) - v[steps - 2] * (5.0 / 16) +
             v[steps - 1] * (15.0 / 16) + v[steps] * (5.0 / 16);
    return v[i - 1] * (-1.0 / 16) + v[i] * (9.0 / 16) + v[i + 1] * (9.0 / 16) +
           v[i + 2] * (-1.0 / 16);
  }

  const std::vector<Matrix>& discrepancy_row(double t) const {
    const std::uint64_t key = std::bit_cast<std::uint64_t>(t);
    auto it = rows_.find(key);
    if (it != rows_.end()) return it->second;

    const int k = dk_.rank();
    std::vector<Matrix> phis(k);
    for (int j = 0; j < k; ++j) phis[j] = dk_.phi[j](t);
    std::vector<Matrix> row;
    row.reserve(tau_.size());
    for (double tau : tau_) {
      Matrix d = kernel_(t, tau);
      for (int j = 0; j < k; ++j) d -= phis[j] * dk_.psi[j](tau);
      row.push_back(std::move(d));
    }
    return rows_.emplace(key, std::move(row)).first->second;
  }

  int n_;
  KernelFn kernel_;
  DegenerateKernel dk_;
  std::vector<double> tau_;
  std::vector<double> w_;
  std::vector<Vector> xvals_;
  mutable std::unordered_map<std::uint64_t, std::vector<Matrix>> rows_;
};

double bound_value(double q, double c_k, double norm_fd, int i) {
  return std::pow(q, i) / (1.0 - q) * c_k * norm_fd;
}

}  // namespace

double error_bound(const IterationTrace& trace, int i, double norm_fd) {
  if (!(trace.q_estimate < 1.0))
    throw SolveError(ErrorCode::ContractionFailed,
                     "error bound undefined: contraction factor >= 1");
  return bound_value(trace.q_estimate, trace.c_k, norm_fd, i);
}

std::pair<Solution, IterationTrace> solve_nondegenerate(
    const Problem& p, int degree, const IterOptions& opts) {
  const std::vector<Finding> findings = validate(p);
  if (!findings.empty()) {
    std::string msg = "invalid problem:";
    for (const Finding& f : findings) msg += " [" + f.code + "] " + f.message;
    throw SolveError(ErrorCode::InvalidProblem, msg);
  }
  const auto* gk = std::get_if<GeneralKernel>(&p.kernel);
  if (!gk)
    throw std::invalid_argument(
        "solve_nondegenerate: the problem kernel is already degenerate");

  ApproximationReport approx = build_degenerate_approx(
      gk->k, degree, p.T, p.n, opts.eps_t_grid, opts.eps_tau_panels);

  Problem dp = p;
  dp.kernel = approx.kernel;
  SolveOptions base = opts.base;
  base.with_diagnostics = true;  // the contraction test needs the constant
  const DegenerateWorkspace ws = prepare_workspace(dp, base);

  IterationTrace trace;
  trace.epsilon = approx.epsilon;
  trace.degree = degree;
  if (!ws.wellposedness.n_constant)
    throw SolveError(ErrorCode::ContractionFailed,
                     "well-posedness constant unavailable; cannot certify the "
                     "contraction");
  trace.c_k = *ws.wellposedness.n_constant;
  trace.q_estimate = opts.safety * trace.c_k * approx.epsilon;
  trace.norm_fd =
      std::max(sampled_sup_norm(p.f_fn, ws.partition), max_norm(p.condition.d));
  if (trace.q_estimate >= 1.0)
    throw SolveError(
        ErrorCode::ContractionFailed,
        "contraction test failed: q = " + std::to_string(trace.q_estimate) +
            " >= 1 at degree " + std::to_string(degree) +
            "; raise the approximation degree");

  trace.iterates.push_back(solve_with_forcing(ws, p.f_fn));
  trace.bound_history.push_back(
      bound_value(trace.q_estimate, trace.c_k, trace.norm_fd, 0));

  auto correction =
      std::make_shared<CorrectionOperator>(p, approx.kernel, ws.partition);
  const VectorFn f0 = p.f_fn;
  const VectorFn forcing = [correction, f0](double t) {
    return f0(t) + correction->apply(t);
  };

  for (int i = 1; i <= opts.max_iter; ++i) {
    correction->set_iterate(trace.iterates.back());
    Solution next = solve_with_forcing(ws, forcing);
    const double delta = sup_diff_norm(next, trace.iterates.back());
    trace.iterates.push_back(std::move(next));
    trace.deltas.push_back(delta);
    trace.bound_history.push_back(
        bound_value(trace.q_estimate, trace.c_k, trace.norm_fd, i));
    if (delta <= opts.tol) {
      trace.converged = true;
      break;
    }
  }
  if (!trace.converged)
    throw SolveError(ErrorCode::NoConvergence,
                     "no convergence after " + std::to_string(opts.max_iter) +
                         " iterations; last delta = " +
                         std::to_string(trace.deltas.back()));

  Solution best = trace.iterates.back();
  return {std::move(best), std::move(trace)};
}

}  // namespace fide
