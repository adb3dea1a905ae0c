#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "deltawedge/geometry.hpp"

namespace deltawedge {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Uniform grid of interior nodes on the truncated box [-L, L]^2 with
/// homogeneous Dirichlet boundary. Boundary values are identically zero
/// and not stored; unknowns are the n*n interior nodes in row-major order
/// (y-row index major, x-column index minor).
struct Grid {
  double half_width = 0.0;  ///< L
  double spacing = 0.0;     ///< h
  int n = 0;                ///< interior nodes per axis

  /// Coordinate of interior node index i in [0, n), same on both axes.
  double coord(int i) const { return -half_width + (i + 1) * spacing; }

  /// Upper lattice boundary; equals half_width when h divides 2L.
  double upper() const { return -half_width + (n + 1) * spacing; }

  std::int64_t unknowns() const {
    return static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n);
  }

  int index(int ix, int iy) const { return iy * n + ix; }
};

/// Build a grid with n = floor(2L/h) - 1 interior nodes per axis.
/// The floor is taken with a relative slack so that exact divisions such
/// as 2*20/0.05 are not pushed below the integer by rounding.
inline Grid build_grid(double L, double h,
                       std::int64_t max_unknowns = 4'000'000) {
  if (!(L > 0.0) || !(h > 0.0))
    throw std::domain_error("build_grid: L and h must be > 0");
  const double m = 2.0 * L / h;
  const int n = static_cast<int>(std::floor(m + 1e-9 * m)) - 1;
  if (n < 3)
    throw std::domain_error("build_grid: fewer than 3 interior nodes per axis");
  if (static_cast<std::int64_t>(n) * n > max_unknowns)
    throw std::domain_error("build_grid: unknown count exceeds the cap");
  return Grid{L, h, n};
}

/// One midpoint-rule sample of a ray: an arclength weight and the bilinear
/// stencil that reconstructs the sampled value from interior nodes. Nodes
/// on the Dirichlet boundary are dropped, so the stencil weights may sum
/// to less than one near the box edge.
struct TraceSample {
  double weight = 0.0;
  int count = 0;
  std::array<int, 4> node{};
  std::array<double, 4> coeff{};
};

/// Discrete surrogate of the L^2 norm of the trace of f on one ray.
struct TraceQuadrature {
  int ray_index = 0;
  std::vector<TraceSample> samples;

  double weight_sum() const {
    double s = 0.0;
    for (const TraceSample& q : samples) s += q.weight;
    return s;
  }
};

/// Midpoint-rule quadrature along a ray from the origin: samples at
/// arclength (j + 1/2) h with weight h, each reconstructed by bilinear
/// interpolation from its enclosing cell. Rays that exit the box
/// immediately yield an empty quadrature.
inline TraceQuadrature trace_quadrature(const Grid& grid, double angle,
                                        int ray_index = 0) {
  TraceQuadrature out;
  out.ray_index = ray_index;
  const double h = grid.spacing;
  const double L = grid.half_width;
  const double U = grid.upper();
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  for (std::int64_t j = 0;; ++j) {
    const double arc = (static_cast<double>(j) + 0.5) * h;
    const double px = arc * c;
    const double py = arc * s;
    if (!(px > -L && px < U && py > -L && py < U)) break;

    const double ux = (px + L) / h;
    const double uy = (py + L) / h;
    const int cx = static_cast<int>(std::floor(ux));
    const int cy = static_cast<int>(std::floor(uy));
    const double tx = ux - cx;
    const double ty = uy - cy;

    TraceSample sample;
    sample.weight = h;
    const std::array<std::pair<int, double>, 2> xw{{{cx, 1.0 - tx}, {cx + 1, tx}}};
    const std::array<std::pair<int, double>, 2> yw{{{cy, 1.0 - ty}, {cy + 1, ty}}};
    for (const auto& [ly, wy] : yw) {
      for (const auto& [lx, wx] : xw) {
        if (lx < 1 || lx > grid.n || ly < 1 || ly > grid.n) continue;
        const double w = wx * wy;
        if (w == 0.0) continue;  // sample sits exactly on a grid line
        sample.node[sample.count] = grid.index(lx - 1, ly - 1);
        sample.coeff[sample.count] = w;
        ++sample.count;
      }
    }
    out.samples.push_back(sample);
  }
  return out;
}

/// The assembled quadratic form on the grid. The generalized eigenvalue
/// problem is (K - sum_i alpha_i h T_i) v = lambda h^2 v, where fT K f is
/// the sum of (f_p - f_q)^2 over grid edges and T_i carries the ray-i
/// quadrature divided by h. op caches the pencil numerator.
struct DiscreteForm {
  Grid grid;
  std::optional<RayConfig> config;
  SparseMatrix stiffness;
  std::vector<SparseMatrix> trace;
  std::vector<double> couplings;
  SparseMatrix op;
  double mass_scale = 0.0;  ///< h^2
};

namespace detail {

inline SparseMatrix assemble_stiffness(const Grid& grid) {
  const int n = grid.n;
  const std::int64_t N = grid.unknowns();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(5 * N));
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const int p = grid.index(ix, iy);
      trip.emplace_back(p, p, 4.0);
      if (ix > 0) trip.emplace_back(p, grid.index(ix - 1, iy), -1.0);
      if (ix < n - 1) trip.emplace_back(p, grid.index(ix + 1, iy), -1.0);
      if (iy > 0) trip.emplace_back(p, grid.index(ix, iy - 1), -1.0);
      if (iy < n - 1) trip.emplace_back(p, grid.index(ix, iy + 1), -1.0);
    }
  }
  SparseMatrix K(N, N);
  K.setFromTriplets(trip.begin(), trip.end());
  K.makeCompressed();
  return K;
}

inline SparseMatrix assemble_trace_matrix(const Grid& grid,
                                          const TraceQuadrature& quad) {
  const std::int64_t N = grid.unknowns();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(quad.samples.size() * 16);
  for (const TraceSample& q : quad.samples) {
    const double wh = q.weight / grid.spacing;
    for (int a = 0; a < q.count; ++a)
      for (int b = 0; b < q.count; ++b)
        trip.emplace_back(q.node[a], q.node[b], wh * q.coeff[a] * q.coeff[b]);
  }
  SparseMatrix T(N, N);
  T.setFromTriplets(trip.begin(), trip.end());
  T.makeCompressed();
  return T;
}

}  // namespace detail

/// Assemble the form for a ray star. Rays whose quadrature is empty simply
/// contribute nothing; with no rays at all this is the Dirichlet Laplacian.
inline DiscreteForm assemble(const Grid& grid, const RayConfig& config) {
  DiscreteForm form;
  form.grid = grid;
  form.config = config;
  form.mass_scale = grid.spacing * grid.spacing;
  form.stiffness = detail::assemble_stiffness(grid);
  form.op = form.stiffness;
  const auto& rays = config.rays();
  form.trace.reserve(rays.size());
  form.couplings.reserve(rays.size());
  for (std::size_t i = 0; i < rays.size(); ++i) {
    TraceQuadrature quad =
        trace_quadrature(grid, rays[i].angle, static_cast<int>(i));
    form.trace.push_back(detail::assemble_trace_matrix(grid, quad));
    form.couplings.push_back(rays[i].coupling);
    form.op -= (rays[i].coupling * grid.spacing) * form.trace.back();
  }
  form.op.makeCompressed();
  return form;
}

/// Assemble the pure Dirichlet Laplacian form (zero coupling, no trace).
inline DiscreteForm assemble_laplacian(const Grid& grid) {
  DiscreteForm form;
  form.grid = grid;
  form.mass_scale = grid.spacing * grid.spacing;
  form.stiffness = detail::assemble_stiffness(grid);
  form.op = form.stiffness;
  return form;
}

/// Discrete Rayleigh quotient (fT K f - sum_i alpha_i h fT T_i f)/(h^2 fT f).
inline double form_value(const DiscreteForm& form, const Eigen::VectorXd& f) {
  if (f.size() != form.grid.unknowns())
    throw std::domain_error("form_value: vector size does not match the grid");
  const double nrm2 = f.squaredNorm();
  if (!(nrm2 > 0.0)) throw std::domain_error("form_value: zero vector");
  double q = f.dot(form.stiffness * f);
  for (std::size_t i = 0; i < form.trace.size(); ++i)
    q -= form.couplings[i] * form.grid.spacing * f.dot(form.trace[i] * f);
  return q / (form.mass_scale * nrm2);
}

/// Dump the pencil numerator K - sum_i alpha_i h T_i in symmetric
/// coordinate text form: header "n nnz h L", then one "row col value"
/// triple per line, 0-based, lower triangle only, 17 significant digits.
inline void write_matrix(std::ostream& os, const DiscreteForm& form) {
  const SparseMatrix& A = form.op;
  std::int64_t nnz = 0;
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it)
      if (it.row() >= it.col()) ++nnz;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%lld %lld %.17g %.17g\n",
                static_cast<long long>(A.rows()), static_cast<long long>(nnz),
                form.grid.spacing, form.grid.half_width);
  os << buf;
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) {
      if (it.row() < it.col()) continue;
      std::snprintf(buf, sizeof(buf), "%lld %lld %.17g\n",
                    static_cast<long long>(it.row()),
                    static_cast<long long>(it.col()), it.value());
      os << buf;
    }
  }
}

}  // namespace deltawedge
