#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace deltawedge {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Angular separation below which two rays are considered coincident.
/// Coincident rays would produce a zero-opening wedge, for which the
/// wedge estimates degenerate, so they are rejected at construction.
inline constexpr double kMinRaySeparation = 1e-12;

/// One half-infinite ray from the origin.
struct Ray {
  double angle = 0.0;     ///< radians, normalized into [0, 2*pi)
  double coupling = 0.0;  ///< interaction strength on this ray, > 0
};

/// Normalize an angle into [0, 2*pi).
inline double normalize_angle(double angle) {
  double a = std::fmod(angle, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a == kTwoPi) a = 0.0;
  return a;
}

/// A star of rays through a common origin, each carrying its own coupling
/// strength. Angles are normalized into [0, 2*pi) and sorted ascending at
/// construction; the value is immutable afterwards. A full line is
/// represented as two opposite rays.
class RayConfig {
 public:
  explicit RayConfig(std::vector<Ray> rays) : rays_(std::move(rays)) {
    if (rays_.size() < 2)
      throw std::domain_error("RayConfig: at least 2 rays required");
    for (Ray& r : rays_) {
      if (!(r.coupling > 0.0))
        throw std::domain_error("RayConfig: ray couplings must be > 0");
      if (!std::isfinite(r.angle))
        throw std::domain_error("RayConfig: ray angle must be finite");
      r.angle = normalize_angle(r.angle);
    }
    std::sort(rays_.begin(), rays_.end(),
              [](const Ray& a, const Ray& b) { return a.angle < b.angle; });
    for (std::size_t i = 0; i + 1 < rays_.size(); ++i) {
      if (rays_[i + 1].angle - rays_[i].angle < kMinRaySeparation)
        throw std::domain_error("RayConfig: coincident rays");
    }
    if (rays_.size() >= 2 &&
        rays_.front().angle + kTwoPi - rays_.back().angle < kMinRaySeparation)
      throw std::domain_error("RayConfig: coincident rays across the cut");
  }

  const std::vector<Ray>& rays() const { return rays_; }
  std::size_t size() const { return rays_.size(); }
  const Ray& ray(std::size_t i) const { return rays_.at(i); }

 private:
  std::vector<Ray> rays_;
};

/// One infinite planar sector between two consecutive rays of a star.
struct Wedge {
  double opening = 0.0;    ///< radians in (0, 2*pi)
  int left_ray_index = 0;  ///< ray at the wedge's lower angle
  int right_ray_index = 0; ///< ray at the wedge's upper angle (cyclic)
};

/// The cyclic decomposition of the plane induced by a star of rays.
/// Wedge k is bounded by rays k and k+1 (mod N); openings sum to 2*pi.
struct WedgeDecomposition {
  std::vector<Wedge> wedges;

  std::size_t size() const { return wedges.size(); }

  std::vector<double> openings() const {
    std::vector<double> out;
    out.reserve(wedges.size());
    for (const Wedge& w : wedges) out.push_back(w.opening);
    return out;
  }
};

/// Two rays forming an angle of aperture phi in (0, pi], with the bisector
/// on the positive x-axis. phi = pi yields a straight line (the y-axis).
inline RayConfig angle_config(double phi, double alpha) {
  if (!(phi > 0.0) || !(phi <= std::numbers::pi))
    throw std::domain_error("angle_config: phi must lie in (0, pi]");
  if (!(alpha > 0.0))
    throw std::domain_error("angle_config: alpha must be > 0");
  return RayConfig({Ray{-phi / 2.0, alpha}, Ray{phi / 2.0, alpha}});
}

/// Two full lines crossing at the origin at angle phi in (0, pi),
/// represented as four rays at 0, phi, pi, pi + phi.
inline RayConfig lines_config(double phi, double alpha) {
  if (!(phi > 0.0) || !(phi < std::numbers::pi))
    throw std::domain_error("lines_config: phi must lie in (0, pi)");
  if (!(alpha > 0.0))
    throw std::domain_error("lines_config: alpha must be > 0");
  return RayConfig({Ray{0.0, alpha}, Ray{phi, alpha},
                    Ray{std::numbers::pi, alpha},
                    Ray{std::numbers::pi + phi, alpha}});
}

/// Consecutive angular gaps of the star, cyclic. Openings sum to 2*pi.
inline WedgeDecomposition wedges_of(const RayConfig& config) {
  const auto& rays = config.rays();
  const int n = static_cast<int>(rays.size());
  WedgeDecomposition out;
  out.wedges.reserve(rays.size());
  for (int k = 0; k < n; ++k) {
    const int next = (k + 1) % n;
    double opening = rays[next].angle - rays[k].angle;
    if (next == 0) opening += kTwoPi;
    out.wedges.push_back(Wedge{opening, k, next});
  }
  return out;
}

}  // namespace deltawedge
