#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "deltawedge/geometry.hpp"

namespace deltawedge {

/// Per-wedge coupling split. gammas[k] is the coupling weight assigned to
/// both boundary rays of wedge k; for every ray the two adjacent wedge
/// weights add up to the ray's coupling.
struct SplitSolution {
  std::vector<double> gammas;
};

/// An analytic lower bound for the spectral bottom, together with the split
/// that certifies it. bound equals the minimum of per_wedge_bounds and is
/// never positive.
struct BoundResult {
  double bound = 0.0;
  SplitSolution split;
  std::vector<double> per_wedge_bounds;
};

/// Lower bound for the wedge form |grad f|^2 - gamma |f|_dOmega|^2 on a
/// single wedge of opening theta: -gamma^2/sin^2(theta/2) for theta <= pi
/// and -gamma^2 for reflex wedges.
inline double wedge_lower_bound(double gamma, double theta) {
  if (!(gamma >= 0.0))
    throw std::domain_error("wedge_lower_bound: gamma must be >= 0");
  if (!(theta > 0.0) || !(theta < kTwoPi))
    throw std::domain_error("wedge_lower_bound: theta must lie in (0, 2*pi)");
  if (theta <= std::numbers::pi) {
    const double s = std::sin(theta / 2.0);
    return -(gamma * gamma) / (s * s);
  }
  return -(gamma * gamma);
}

namespace detail {

/// Constant c with wedge bound -c*gamma^2 for a wedge of opening theta.
inline double wedge_coefficient(double theta) {
  if (theta <= std::numbers::pi) {
    const double s = std::sin(theta / 2.0);
    return 1.0 / (s * s);
  }
  return 1.0;
}

/// The cyclic constraints gamma_{k-1} + gamma_k = alpha_k eliminate to a
/// single scalar parameter t with gamma_k(t) = sign_k * t + offset_k,
/// sign_k = (-1)^k. Odd stars have a unique solution; even stars keep one
/// degree of freedom constrained to [t_lo, t_hi] by gamma_k >= 0.
struct SplitProblem {
  std::vector<double> offsets;  // offset_k
  std::vector<double> coeffs;   // wedge coefficients c_k
  bool even = false;
  double t_lo = 0.0;            // feasible interval (even case)
  double t_hi = 0.0;
  double t_unique = 0.0;        // the unique solution (odd case)
};

inline double split_sign(std::size_t k) { return (k % 2 == 0) ? 1.0 : -1.0; }

inline SplitProblem make_split_problem(const RayConfig& config) {
  const auto& rays = config.rays();
  const std::size_t n = rays.size();
  const WedgeDecomposition wd = wedges_of(config);

  SplitProblem p;
  p.coeffs.reserve(n);
  for (const Wedge& w : wd.wedges) p.coeffs.push_back(wedge_coefficient(w.opening));

  // gamma_0 = t; gamma_k = alpha_k - gamma_{k-1}  (ray k separates wedges
  // k-1 and k), hence offset_0 = 0, offset_k = alpha_k - offset_{k-1}.
  p.offsets.assign(n, 0.0);
  for (std::size_t k = 1; k < n; ++k)
    p.offsets[k] = rays[k].coupling - p.offsets[k - 1];

  double scale = 0.0;
  for (const Ray& r : rays) scale = std::max(scale, r.coupling);

  p.even = (n % 2 == 0);
  if (p.even) {
    // Closure gamma_{n-1} + gamma_0 = alpha_0 reduces to the compatibility
    // condition offset_{n-1} = alpha_0; the parameter t stays free.
    if (std::abs(p.offsets[n - 1] - rays[0].coupling) > 1e-10 * scale)
      throw std::domain_error(
          "no admissible split: cyclic coupling constraints are inconsistent");
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      if (k % 2 == 0)
        lo = std::max(lo, -p.offsets[k]);
      else
        hi = std::min(hi, p.offsets[k]);
    }
    if (lo > hi + 1e-12 * scale)
      throw std::domain_error(
          "no admissible split: no nonnegative split satisfies the constraints");
    p.t_lo = lo;
    p.t_hi = std::max(lo, hi);
  } else {
    // Closure gamma_{n-1} + gamma_0 = alpha_0 with sign_{n-1} = +1 pins
    // t = (alpha_0 - offset_{n-1}) / 2.
    p.t_unique = (rays[0].coupling - p.offsets[n - 1]) / 2.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double g = split_sign(k) * p.t_unique + p.offsets[k];
      if (g < -1e-12 * scale)
        throw std::domain_error(
            "no admissible split: the unique split has a negative component");
    }
  }
  return p;
}

inline double split_gamma(const SplitProblem& p, std::size_t k, double t) {
  return std::max(0.0, split_sign(k) * t + p.offsets[k]);
}

/// Objective max_k c_k gamma_k(t)^2: a maximum of strictly convex parabolas,
/// hence strictly convex with a unique minimizer.
inline double split_objective(const SplitProblem& p, double t) {
  double worst = 0.0;
  for (std::size_t k = 0; k < p.offsets.size(); ++k) {
    const double g = split_sign(k) * t + p.offsets[k];
    worst = std::max(worst, p.coeffs[k] * g * g);
  }
  return worst;
}

/// Golden-section minimization of a unimodal function on [lo, hi],
/// refined to the given absolute width in the parameter.
template <typename F>
double golden_section_min(F f, double lo, double hi, double tol_t) {
  constexpr double invphi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol_t) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
  }
  return (f1 < f2) ? x1 : x2;
}

/// Sharpen the golden-section minimizer: at the optimum either two active
/// parabolas equalize or one sits at its vertex, so solve those closed
/// forms near t0 and keep the best feasible candidate.
inline double polish_split_minimizer(const SplitProblem& p, double t0) {
  const std::size_t n = p.offsets.size();
  const double f0 = split_objective(p, t0);

  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < n; ++k) {
    const double g = split_sign(k) * t0 + p.offsets[k];
    if (p.coeffs[k] * g * g >= f0 * (1.0 - 1e-6)) active.push_back(k);
  }

  std::vector<double> candidates{t0, p.t_lo, p.t_hi};
  for (std::size_t k : active) candidates.push_back(-split_sign(k) * p.offsets[k]);
  for (std::size_t ia = 0; ia < active.size(); ++ia) {
    for (std::size_t ib = ia + 1; ib < active.size(); ++ib) {
      const std::size_t a = active[ia], b = active[ib];
      const double ra = std::sqrt(p.coeffs[a]), rb = std::sqrt(p.coeffs[b]);
      const double sa = split_sign(a), sb = split_sign(b);
      // ra*(sa t + da) = +/- rb*(sb t + db)
      for (double sgn : {1.0, -1.0}) {
        const double denom = ra * sa - sgn * rb * sb;
        if (std::abs(denom) < 1e-300) continue;
        candidates.push_back((sgn * rb * p.offsets[b] - ra * p.offsets[a]) / denom);
      }
    }
  }

  double best_t = t0, best_f = f0;
  for (double t : candidates) {
    const double tc = std::clamp(t, p.t_lo, p.t_hi);
    const double f = split_objective(p, tc);
    if (f < best_f) {
      best_f = f;
      best_t = tc;
    }
  }
  return best_t;
}

inline BoundResult split_result(const SplitProblem& p, double t) {
  const std::size_t n = p.offsets.size();
  BoundResult out;
  out.split.gammas.resize(n);
  out.per_wedge_bounds.resize(n);
  double worst = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double g = split_gamma(p, k, t);
    out.split.gammas[k] = g;
    out.per_wedge_bounds[k] = -p.coeffs[k] * g * g;
    worst = std::min(worst, out.per_wedge_bounds[k]);
  }
  out.bound = worst;
  return out;
}

}  // namespace detail

/// Lower bound -alpha^2/(4 sin^2(phi/2)) for the angle of aperture phi.
/// Matches the sharpened bound at phi = pi and diverges as phi -> 0+.
inline double llp_bound(double alpha, double phi) {
  if (!(alpha > 0.0))
    throw std::domain_error("llp_bound: alpha must be > 0");
  if (!(phi > 0.0) || !(phi <= std::numbers::pi))
    throw std::domain_error("llp_bound: phi must lie in (0, pi]");
  const double s = std::sin(phi / 2.0);
  return -(alpha * alpha) / (4.0 * s * s);
}

/// Sharpened lower bound for the angle of aperture phi in (0, pi]:
///   bound = -alpha^2 / (1 + sin(phi/2))^2,
/// certified by splitting the coupling as alpha = beta + (alpha - beta)
/// with beta = alpha sin(phi/2) / (1 + sin(phi/2)). The split is reported
/// in the wedge order of wedges_of(angle_config(phi, alpha)), i.e. the
/// 2*pi-phi wedge first.
inline BoundResult angle_bound(double alpha, double phi) {
  if (!(alpha > 0.0))
    throw std::domain_error("angle_bound: alpha must be > 0");
  if (!(phi > 0.0) || !(phi <= std::numbers::pi))
    throw std::domain_error("angle_bound: phi must lie in (0, pi]");
  const double s = std::sin(phi / 2.0);
  const double beta = alpha * s / (1.0 + s);
  BoundResult out;
  out.split.gammas = {alpha - beta, beta};
  out.per_wedge_bounds = {wedge_lower_bound(alpha - beta, kTwoPi - phi),
                          wedge_lower_bound(beta, phi)};
  out.bound = -(alpha * alpha) / ((1.0 + s) * (1.0 + s));
  return out;
}

/// Lower bound for two lines crossing at angle phi in (0, pi):
///   bound = -alpha^2 / (1 + sin(phi)),
/// certified by beta = alpha tan(phi/2) / (1 + tan(phi/2)) on the two
/// phi-wedges and alpha - beta on the two (pi-phi)-wedges. Split order
/// follows wedges_of(lines_config(phi, alpha)): phi, pi-phi, phi, pi-phi.
inline BoundResult lines_bound(double alpha, double phi) {
  if (!(alpha > 0.0))
    throw std::domain_error("lines_bound: alpha must be > 0");
  if (!(phi > 0.0) || !(phi < std::numbers::pi))
    throw std::domain_error("lines_bound: phi must lie in (0, pi)");
  const double t = std::tan(phi / 2.0);
  const double beta = alpha * t / (1.0 + t);
  BoundResult out;
  out.split.gammas = {beta, alpha - beta, beta, alpha - beta};
  out.per_wedge_bounds = {
      wedge_lower_bound(beta, phi), wedge_lower_bound(alpha - beta, std::numbers::pi - phi),
      wedge_lower_bound(beta, phi), wedge_lower_bound(alpha - beta, std::numbers::pi - phi)};
  out.bound = -(alpha * alpha) / (1.0 + std::sin(phi));
  return out;
}

/// Best lower bound obtainable for an arbitrary star by minimizing
/// max_k c_k gamma_k^2 over all nonnegative per-wedge splits satisfying the
/// cyclic constraints gamma_{k-1} + gamma_k = alpha_k. Odd stars admit a
/// unique split; even stars are optimized over the remaining scalar degree
/// of freedom (the objective is strictly convex, so the minimizer is
/// unique). Throws "no admissible split" when no nonnegative split exists.
inline BoundResult star_bound(const RayConfig& config) {
  const detail::SplitProblem p = detail::make_split_problem(config);
  if (!p.even) return detail::split_result(p, p.t_unique);
  double t = detail::golden_section_min(
      [&p](double x) { return detail::split_objective(p, x); }, p.t_lo, p.t_hi,
      1e-10);
  t = detail::polish_split_minimizer(p, t);
  return detail::split_result(p, t);
}

/// Independent oracle for star_bound: dense grid search over the feasible
/// split set. Intended for validation; resolution is the number of grid
/// points on the feasible interval.
inline BoundResult brute_force_star_bound(const RayConfig& config, long resolution) {
  if (config.size() > 6)
    throw std::domain_error("brute_force_star_bound: at most 6 rays supported");
  if (resolution < 1000)
    throw std::domain_error("brute_force_star_bound: resolution must be >= 1000");
  const detail::SplitProblem p = detail::make_split_problem(config);
  if (!p.even) return detail::split_result(p, p.t_unique);

  double best_t = p.t_lo;
  double best_f = detail::split_objective(p, p.t_lo);
  for (long i = 1; i < resolution; ++i) {
    const double t = p.t_lo + (p.t_hi - p.t_lo) *
                                  (static_cast<double>(i) /
                                   static_cast<double>(resolution - 1));
    const double f = detail::split_objective(p, t);
    if (f < best_f) {
      best_f = f;
      best_t = t;
    }
  }
  return detail::split_result(p, best_t);
}

}  // namespace deltawedge
