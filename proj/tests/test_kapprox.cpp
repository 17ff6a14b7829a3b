#include <cmath>

#include "doctest.h"
#include "fide/kapprox.hpp"

using fide::ApproximationReport;
using fide::DegenerateKernel;
using fide::KernelFn;
using fide::Matrix;

namespace {

const KernelFn k_ttau = [](double t, double tau) {
  return Matrix::of({{t * tau}});
};

const KernelFn k_exp = [](double t, double tau) {
  return Matrix::of({{std::exp(t * tau)}});
};

}  // namespace

TEST_CASE("separable polynomial kernels are reproduced exactly") {
  for (int degree : {1, 2, 4}) {
    const auto rep = fide::build_degenerate_approx(k_ttau, degree, 1.0, 1);
    CHECK(rep.kernel.rank() == degree + 1);
    CHECK(rep.epsilon <= 1e-12);
  }
}

TEST_CASE("polynomial kernels of matching bi-degree are exact") {
  const KernelFn k = [](double t, double tau) {
    return Matrix::of({{1.0 + t * t * tau - 0.5 * tau * tau * t * t,
                        t * tau * tau},
                       {0.25 * t * t, 2.0 - tau}});
  };
  const auto rep = fide::build_degenerate_approx(k, 2, 1.0, 2);
  CHECK(rep.epsilon <= 1e-10);
}

TEST_CASE("zero kernel approximates to zero") {
  const KernelFn k = [](double, double) { return Matrix(2, 2); };
  const auto rep = fide::build_degenerate_approx(k, 3, 1.0, 2);
  CHECK(rep.epsilon == doctest::Approx(0.0));
  for (int j = 0; j < rep.kernel.rank(); ++j)
    for (double tau : {0.0, 0.4, 1.0})
      CHECK(fide::max_norm(rep.kernel.psi[j](tau)) <= 1e-14);
}

TEST_CASE("exponential kernel defect shrinks with the degree") {
  const auto d5 = fide::build_degenerate_approx(k_exp, 5, 1.0, 1);
  CHECK(d5.epsilon <= 2e-3);

  double prev = 1e9;
  for (int degree : {2, 4, 6}) {
    const auto rep = fide::build_degenerate_approx(k_exp, degree, 1.0, 1);
    CHECK(rep.epsilon <= prev + 1e-12);
    prev = rep.epsilon;
  }
  CHECK(prev <= 1e-6);  // degree 6 is deep in the spectral regime
}

TEST_CASE("measured epsilon is near zero for an exact separable pair") {
  DegenerateKernel dk;
  dk.phi.push_back([](double t) { return Matrix::of({{t}}); });
  dk.psi.push_back([](double tau) { return Matrix::of({{tau}}); });
  CHECK(fide::estimate_epsilon(k_ttau, dk, 1.0) <= 1e-14);
}

TEST_CASE("measured epsilon is positive for a mismatched pair") {
  DegenerateKernel constant;
  constant.phi.push_back([](double) { return Matrix::of({{1.0}}); });
  constant.psi.push_back([](double) { return Matrix::of({{1.0}}); });
  const double eps = fide::estimate_epsilon(k_exp, constant, 1.0);
  CHECK(eps > 0.1);
}

TEST_CASE("measured epsilon is grid-stable") {
  const auto rep = fide::build_degenerate_approx(k_exp, 3, 1.0, 1);
  const double fine =
      fide::estimate_epsilon(k_exp, rep.kernel, 1.0, 257, 512);
  REQUIRE(fine > 0.0);
  CHECK(std::abs(rep.epsilon - fine) / fine <= 0.05);
}

TEST_CASE("interpolant matches the kernel at the sample nodes") {
  const auto rep = fide::build_degenerate_approx(k_exp, 4, 2.0, 1);
  // Chebyshev extrema mapped onto [0, 2].
  for (int i = 0; i <= 4; ++i) {
    const double t = 1.0 + std::cos(std::acos(-1.0) * i / 4);
    for (int j = 0; j <= 4; ++j) {
      const double tau = 1.0 + std::cos(std::acos(-1.0) * j / 4);
      double sum = 0.0;
      for (int q = 0; q < rep.kernel.rank(); ++q)
        sum += rep.kernel.phi[q](t)(0, 0) * rep.kernel.psi[q](tau)(0, 0);
      CHECK(sum == doctest::Approx(std::exp(t * tau)).epsilon(1e-10));
    }
  }
}

TEST_CASE("degree zero yields a constant separable kernel") {
  const auto rep = fide::build_degenerate_approx(k_exp, 0, 1.0, 1);
  CHECK(rep.kernel.rank() == 1);
  CHECK(rep.kernel.phi[0](0.3)(0, 0) == doctest::Approx(1.0));
  const double v1 = rep.kernel.psi[0](0.1)(0, 0);
  const double v2 = rep.kernel.psi[0](0.9)(0, 0);
  CHECK(v1 == doctest::Approx(v2));
  CHECK(rep.epsilon > 0.1);
}

TEST_CASE("argument validation") {
  CHECK_THROWS_AS(fide::build_degenerate_approx(k_exp, -1, 1.0, 1),
                  std::invalid_argument);
  DegenerateKernel dk;
  dk.phi.push_back([](double) { return Matrix::of({{1.0}}); });
  dk.psi.push_back([](double) { return Matrix::of({{1.0}}); });
  CHECK_THROWS_AS(fide::estimate_epsilon(k_exp, dk, 1.0, 32, 256),
                  std::invalid_argument);
  CHECK_THROWS_AS(fide::estimate_epsilon(k_exp, dk, 1.0, 129, 255),
                  std::invalid_argument);
}
