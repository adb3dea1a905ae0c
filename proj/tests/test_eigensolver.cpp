#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "deltawedge/eigensolver.hpp"

using namespace deltawedge;
using Catch::Approx;

namespace {
constexpr double pi = std::numbers::pi;

DiscreteForm small_angle_form(double phi = pi / 2.0, double alpha = 1.0,
                              double L = 6.0, double h = 0.2) {
  return assemble(build_grid(L, h), angle_config(phi, alpha));
}
}  // namespace

TEST_CASE("free Dirichlet box ground energy") {
  const Grid g = build_grid(20.0, 0.1);
  const DiscreteForm form = assemble_laplacian(g);
  const SpectrumEstimate est = lowest_eigenpairs(form, 1, 1e-8);
  REQUIRE(est.converged[0]);
  CHECK(est.eigenvalues[0] == Approx(pi * pi / 800.0).margin(1e-4));
}

TEST_CASE("argument validation") {
  const DiscreteForm form = small_angle_form();
  CHECK_THROWS_AS(lowest_eigenpairs(form, 0, 1e-8), std::domain_error);
  CHECK_THROWS_AS(lowest_eigenpairs(form, 21, 1e-8), std::domain_error);
  CHECK_THROWS_AS(lowest_eigenpairs(form, 1, 1e-13), std::domain_error);
  CHECK_THROWS_AS(lowest_eigenpairs(form, 1, 1e-3), std::domain_error);
  CHECK_THROWS_AS(count_below(form, 0.1), std::domain_error);
  CHECK_THROWS_AS(count_below_by_iteration(form, 0.0), std::domain_error);
}

TEST_CASE("residual contract holds and is independently reproducible") {
  const DiscreteForm form = small_angle_form();
  const double tol = 1e-9;
  const SpectrumEstimate est = lowest_eigenpairs(form, 4, tol);
  REQUIRE(est.all_converged());
  REQUIRE(est.vectors.cols() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(est.residuals[i] <= tol);
    const Eigen::VectorXd x = est.vectors.col(i);
    const double fresh =
        (form.op * x - est.eigenvalues[i] * form.mass_scale * x).norm() / x.norm();
    CHECK(fresh <= tol);
  }
  for (int i = 1; i < 4; ++i)
    CHECK(est.eigenvalues[i - 1] <= est.eigenvalues[i]);
}

TEST_CASE("eigenvectors are orthogonal in the weighted inner product") {
  const DiscreteForm form = small_angle_form();
  const SpectrumEstimate est = lowest_eigenpairs(form, 4, 1e-10);
  REQUIRE(est.all_converged());
  const double h2 = form.mass_scale;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      const double ip = h2 * est.vectors.col(i).dot(est.vectors.col(j));
      const double ni = std::sqrt(h2) * est.vectors.col(i).norm();
      const double nj = std::sqrt(h2) * est.vectors.col(j).norm();
      CHECK(std::abs(ip) / (ni * nj) <= 1e-8);
    }
  }
}

TEST_CASE("Rayleigh quotient of the ground vector equals its eigenvalue") {
  const DiscreteForm form = small_angle_form();
  const SpectrumEstimate est = lowest_eigenpairs(form, 1, 1e-11);
  REQUIRE(est.converged[0]);
  const double rq = form_value(form, est.vectors.col(0));
  CHECK(std::abs(rq - est.eigenvalues[0]) <= 1e-10);
}

TEST_CASE("adding s h^2 I shifts the spectrum by exactly s") {
  const DiscreteForm form = small_angle_form();
  const SpectrumEstimate base = lowest_eigenpairs(form, 3, 1e-10);
  REQUIRE(base.all_converged());

  DiscreteForm shifted = form;
  SparseMatrix identity(form.grid.unknowns(), form.grid.unknowns());
  identity.setIdentity();
  shifted.op = form.op + form.mass_scale * identity;
  const SpectrumEstimate moved = lowest_eigenpairs(shifted, 3, 1e-10);
  REQUIRE(moved.all_converged());
  for (int i = 0; i < 3; ++i)
    CHECK(moved.eigenvalues[i] - base.eigenvalues[i] == Approx(1.0).margin(1e-10));
}

TEST_CASE("solves are deterministic for a fixed seed") {
  const DiscreteForm form = small_angle_form();
  const SpectrumEstimate a = lowest_eigenpairs(form, 2, 1e-9);
  const SpectrumEstimate b = lowest_eigenpairs(form, 2, 1e-9);
  CHECK(a.eigenvalues == b.eigenvalues);
  CHECK(a.iterations == b.iterations);

  SolveOptions opts;
  opts.seed = 7;
  const SpectrumEstimate c = lowest_eigenpairs(form, 2, 1e-9, opts);
  REQUIRE(c.all_converged());
  for (int i = 0; i < 2; ++i)
    CHECK(c.eigenvalues[i] == Approx(a.eigenvalues[i]).margin(1e-8));
}

TEST_CASE("an explicit spectral floor is honored") {
  const DiscreteForm form = small_angle_form();
  SolveOptions opts;
  opts.spectral_floor = -5.0;
  const SpectrumEstimate est = lowest_eigenpairs(form, 1, 1e-9, opts);
  REQUIRE(est.converged[0]);
  const SpectrumEstimate ref = lowest_eigenpairs(form, 1, 1e-9);
  CHECK(est.eigenvalues[0] == Approx(ref.eigenvalues[0]).margin(1e-9));
}

TEST_CASE("iteration cap reports partial results instead of lying") {
  const DiscreteForm form = small_angle_form();
  SolveOptions opts;
  opts.max_iterations = 1;
  const SpectrumEstimate est = lowest_eigenpairs(form, 3, 1e-12, opts);
  CHECK(!est.all_converged());
  CHECK(est.iterations == 1);
  for (double lam : est.eigenvalues) CHECK(std::isfinite(lam));
  for (std::size_t i = 0; i < est.converged.size(); ++i)
    if (est.converged[i]) CHECK(est.residuals[i] <= 1e-12);
}

TEST_CASE("inertia count and iterative count agree") {
  const DiscreteForm form = assemble(build_grid(8.0, 0.1), angle_config(pi / 3.0, 1.0));
  for (double threshold : {-0.40, -0.30, -0.26, -0.15}) {
    const std::int64_t by_inertia = count_below(form, threshold);
    const std::int64_t by_iteration = count_below_by_iteration(form, threshold, 1e-9);
    CHECK(by_inertia == by_iteration);
  }
}

TEST_CASE("counts grow as the threshold rises") {
  const DiscreteForm form = assemble(build_grid(8.0, 0.1), angle_config(pi / 6.0, 1.0));
  std::int64_t prev = 0;
  for (double threshold : {-0.60, -0.40, -0.30, -0.20, -0.05}) {
    const std::int64_t c = count_below(form, threshold);
    CHECK(c >= prev);
    prev = c;
  }
  CHECK(prev >= 1);
}

TEST_CASE("sharper angles bind at least as many states") {
  const Grid g = build_grid(8.0, 0.1);
  const double threshold = -0.30;
  const std::int64_t sharp = count_below(assemble(g, angle_config(pi / 12.0, 1.0)), threshold);
  const std::int64_t right = count_below(assemble(g, angle_config(pi / 2.0, 1.0)), threshold);
  CHECK(sharp >= right);
  CHECK(sharp >= 1);
}

TEST_CASE("the ground energy is non-increasing in the coupling") {
  const Grid g = build_grid(6.0, 0.2);
  double prev = std::numeric_limits<double>::infinity();
  for (double alpha : {0.5, 1.0, 1.5, 2.0, 3.0}) {
    const DiscreteForm form = assemble(g, angle_config(pi / 2.0, alpha));
    const SpectrumEstimate est = lowest_eigenpairs(form, 1, 1e-9);
    REQUIRE(est.converged[0]);
    CHECK(est.eigenvalues[0] <= prev);
    prev = est.eigenvalues[0];
  }
}

TEST_CASE("degenerate cluster from the fourfold symmetric crossing") {
  const DiscreteForm form = assemble(build_grid(8.0, 0.1), lines_config(pi / 2.0, 1.0));
  const SpectrumEstimate est = lowest_eigenpairs(form, 4, 1e-9);
  REQUIRE(est.all_converged());
  // the first excited pair is symmetry-degenerate
  CHECK(est.eigenvalues[1] == Approx(est.eigenvalues[2]).margin(1e-6));
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      CHECK(std::abs(est.vectors.col(i).dot(est.vectors.col(j))) <= 1e-8);
}
