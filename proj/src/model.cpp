#include "fide/model.hpp"

#include <cmath>
#include <stdexcept>

namespace fide {

namespace {

int default_steps(double length, double h_max) {
  // Smallest even step count with h <= h_max.
  int steps = 2 * static_cast<int>(std::ceil(length / (2.0 * h_max)));
  return steps < 2 ? 2 : steps;
}

bool finite_matrix(const Matrix& a) {
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (!std::isfinite(a(i, j))) return false;
  return true;
}

bool finite_vector(const Vector& v) {
  for (int i = 0; i < v.dim(); ++i)
    if (!std::isfinite(v[i])) return false;
  return true;
}

}  // namespace

Partition make_partition(const std::vector<double>& points, double h_max) {
  if (points.size() < 2)
    throw std::invalid_argument("make_partition: need at least two points");
  const double T = points.back() - points.front();
  const double h = h_max > 0.0
                       ? h_max
                       : T / (64.0 * static_cast<double>(points.size() - 1));
  Partition part{points, {}, h};
  for (std::size_t r = 0; r + 1 < points.size(); ++r) {
    part.meshes.push_back(SubintervalMesh::make(
        points[r], points[r + 1], default_steps(points[r + 1] - points[r], h)));
  }
  return part;
}

Partition make_partition_steps(const std::vector<double>& points,
                               const std::vector<int>& steps) {
  if (points.size() < 2 || steps.size() != points.size() - 1)
    throw std::invalid_argument("make_partition_steps: size mismatch");
  Partition part{points, {}, 0.0};
  double hmin = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r + 1 < points.size(); ++r) {
    part.meshes.push_back(
        SubintervalMesh::make(points[r], points[r + 1], steps[r]));
    hmin = std::min(hmin, part.meshes.back().h);
  }
  part.h_max = hmin;
  return part;
}

double sup_norm(const Solution& s) {
  double m = 0.0;
  for (const VectorGrid& g : s.grid)
    for (const Vector& v : g.values) m = std::max(m, max_norm(v));
  return m;
}

double sup_diff_norm(const Solution& a, const Solution& b) {
  if (a.grid.size() != b.grid.size())
    throw std::invalid_argument("sup_diff_norm: partition mismatch");
  double m = 0.0;
  for (std::size_t r = 0; r < a.grid.size(); ++r) {
    const auto& ga = a.grid[r].values;
    const auto& gb = b.grid[r].values;
    if (ga.size() != gb.size())
      throw std::invalid_argument("sup_diff_norm: mesh mismatch");
    for (std::size_t i = 0; i < ga.size(); ++i)
      m = std::max(m, max_norm(ga[i] - gb[i]));
  }
  return m;
}

double sampled_sup_norm(const VectorFn& f, const Partition& part) {
  double m = 0.0;
  for (const SubintervalMesh& mesh : part.meshes)
    for (int i = 0; i <= mesh.steps; ++i)
      m = std::max(m, max_norm(f(mesh.node(i))));
  return m;
}

std::vector<Finding> validate(const Problem& p) {
  std::vector<Finding> out;
  auto add = [&out](const char* code, std::string message) {
    out.push_back(Finding{code, std::move(message)});
  };

  if (p.n < 1) add("BAD_DIMENSION", "state dimension must be positive");
  if (!(p.T > 0.0)) add("BAD_HORIZON", "horizon T must be positive");
  if (!out.empty()) return out;  // probing needs sane n and T

  const auto& c = p.condition;
  if (c.points.size() < 2) {
    add("CONDITION_SIZE_MISMATCH", "need at least the two endpoint points");
    return out;
  }
  for (std::size_t i = 0; i + 1 < c.points.size(); ++i)
    if (!(c.points[i] < c.points[i + 1])) {
      add("NONMONOTONE_POINTS", "condition points must strictly increase");
      break;
    }
  if (c.points.front() != 0.0 || c.points.back() != p.T)
    add("ENDPOINT_MISMATCH", "condition points must start at 0 and end at T");
  if (c.b.size() != c.points.size())
    add("CONDITION_SIZE_MISMATCH",
        "one boundary matrix required per condition point");
  for (std::size_t i = 0; i < c.b.size(); ++i)
    if (c.b[i].rows() != p.n || c.b[i].cols() != p.n)
      add("SHAPE_MISMATCH", "B_" + std::to_string(i) + " is not n x n");
  if (c.d.dim() != p.n) add("SHAPE_MISMATCH", "d does not have dimension n");

  // Probe the coefficient functions on a small grid.
  constexpr int kProbes = 9;
  auto probe_matrix_fn = [&](const MatrixFn& fn, const char* name) {
    if (!fn) {
      add("NONFINITE_VALUE", std::string(name) + " is not set");
      return;
    }
    for (int i = 0; i < kProbes; ++i) {
      const double t = p.T * i / (kProbes - 1);
      try {
        const Matrix v = fn(t);
        if (v.rows() != p.n || v.cols() != p.n) {
          add("SHAPE_MISMATCH", std::string(name) + " is not n x n");
          return;
        }
        if (!finite_matrix(v)) {
          add("NONFINITE_VALUE", std::string(name) + " is non-finite on [0,T]");
          return;
        }
      } catch (const std::exception& e) {
        add("NONFINITE_VALUE", std::string(name) + ": " + e.what());
        return;
      }
    }
  };

  probe_matrix_fn(p.a_fn, "A");

  if (!p.f_fn) {
    add("NONFINITE_VALUE", "f is not set");
  } else {
    for (int i = 0; i < kProbes; ++i) {
      const double t = p.T * i / (kProbes - 1);
      try {
        const Vector v = p.f_fn(t);
        if (v.dim() != p.n) {
          add("SHAPE_MISMATCH", "f does not have dimension n");
          break;
        }
        if (!finite_vector(v)) {
          add("NONFINITE_VALUE", "f is non-finite on [0,T]");
          break;
        }
      } catch (const std::exception& e) {
        add("NONFINITE_VALUE", std::string("f: ") + e.what());
        break;
      }
    }
  }

  if (const auto* dk = std::get_if<DegenerateKernel>(&p.kernel)) {
    if (dk->rank() < 1 || dk->psi.size() != dk->phi.size()) {
      add("BAD_KERNEL_RANK",
          "degenerate kernel needs matching phi/psi lists of rank >= 1");
    } else {
      for (int j = 0; j < dk->rank(); ++j) {
        probe_matrix_fn(dk->phi[j], ("phi_" + std::to_string(j + 1)).c_str());
        probe_matrix_fn(dk->psi[j], ("psi_" + std::to_string(j + 1)).c_str());
      }
    }
  } else {
    const auto& gk = std::get<GeneralKernel>(p.kernel);
    if (!gk.k) {
      add("NONFINITE_VALUE", "kernel is not set");
    } else {
      for (int i = 0; i < kProbes && out.empty(); ++i) {
        const double t = p.T * i / (kProbes - 1);
        const double tau = p.T * ((i * 3) % kProbes) / (kProbes - 1);
        try {
          const Matrix v = gk.k(t, tau);
          if (v.rows() != p.n || v.cols() != p.n) {
            add("SHAPE_MISMATCH", "kernel is not n x n");
            break;
          }
          if (!finite_matrix(v)) {
            add("NONFINITE_VALUE", "kernel is non-finite on [0,T]^2");
            break;
          }
        } catch (const std::exception& e) {
          add("NONFINITE_VALUE", std::string("kernel: ") + e.what());
          break;
        }
      }
    }
  }

  return out;
}

Problem manufacture(int n, const VectorFn& xstar, const VectorFn& dxstar,
                    const MatrixFn& a_fn, const Kernel& kernel,
                    const std::vector<double>& points,
                    const std::vector<Matrix>& b, int panels) {
  if (points.size() < 2)
    throw std::invalid_argument("manufacture: need at least two points");
  if (panels % 2 != 0) ++panels;
  const double T = points.back();
  const SubintervalMesh fine = SubintervalMesh::make(0.0, T, panels);

  VectorFn f;
  if (const auto* dk = std::get_if<DegenerateKernel>(&kernel)) {
    // Moments of xstar against each psi_j, computed once.
    std::vector<Vector> moments;
    moments.reserve(dk->rank());
    for (int j = 0; j < dk->rank(); ++j) {
      VectorGrid g{fine, {}};
      g.values.reserve(panels + 1);
      for (int i = 0; i <= panels; ++i) g.values.push_back(xstar(fine.node(i)));
      moments.push_back(simpson(dk->psi[j], g));
    }
    const DegenerateKernel kcopy = *dk;
    f = [n, xstar, dxstar, a_fn, kcopy, moments](double t) {
      Vector v = dxstar(t) - a_fn(t) * xstar(t);
      for (int j = 0; j < kcopy.rank(); ++j) v -= kcopy.phi[j](t) * moments[j];
      return v;
    };
  } else {
    const GeneralKernel gk = std::get<GeneralKernel>(kernel);
    f = [xstar, dxstar, a_fn, gk, fine](double t) {
      VectorGrid g{fine, {}};
      g.values.reserve(fine.steps + 1);
      for (int i = 0; i <= fine.steps; ++i) {
        const double tau = fine.node(i);
        g.values.push_back(gk.k(t, tau) * xstar(tau));
      }
      return dxstar(t) - a_fn(t) * xstar(t) - simpson(g);
    };
  }

  Vector d(n);
  for (std::size_t i = 0; i < points.size(); ++i) d += b[i] * xstar(points[i]);

  Problem p;
  p.n = n;
  p.T = T;
  p.a_fn = a_fn;
  p.kernel = kernel;
  p.f_fn = std::move(f);
  p.condition = MultipointCondition{points, b, std::move(d)};
  return p;
}

}  // namespace fide
