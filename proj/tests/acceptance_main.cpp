// Acceptance suite: end-to-end checks of the analytic bounds, the split
// optimizer, and the numerical verification pipeline at production sizes.
// Prints one PASS/FAIL line per criterion and exits nonzero on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "deltawedge/analytic_bounds.hpp"
#include "deltawedge/eigensolver.hpp"
#include "deltawedge/geometry.hpp"
#include "deltawedge/sweep.hpp"

using namespace deltawedge;

namespace {

constexpr double pi = std::numbers::pi;

class Reporter {
 public:
  bool note(int criterion, const std::string& what, bool ok,
            const std::string& details) {
    std::printf("%s  criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", criterion,
                what.c_str(), details.empty() ? "" : " -- ", details.c_str());
    std::fflush(stdout);
    all_ &= ok;
    return ok;
  }
  bool all() const { return all_; }

 private:
  bool all_ = true;
};

double unif(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

void progress(const char* msg) {
  std::fprintf(stderr, "# %s\n", msg);
  std::fflush(stderr);
}

}  // namespace

int main() {
  Reporter report;

  // ---- criterion 1: exact closed forms -------------------------------
  {
    const BoundResult a = angle_bound(1.0, pi);
    const BoundResult l = lines_bound(1.0, pi / 2.0);
    const bool ok = std::abs(a.bound + 0.25) <= 1e-15 &&
                    std::abs(a.split.gammas[1] - 0.5) <= 1e-15 &&
                    std::abs(l.bound + 0.5) <= 1e-15 &&
                    std::abs(l.split.gammas[0] - 0.5) <= 1e-15;
    report.note(1, "exact closed forms at phi = pi and phi = pi/2", ok,
                fmt("angle(1,pi) = %.17g, lines(1,pi/2) = %.17g", a.bound, l.bound));
  }

  // ---- criterion 2: bound ordering on random input -------------------
  {
    std::mt19937_64 rng(2024);
    bool ok = true;
    std::string detail;
    for (int i = 0; i < 10'000 && ok; ++i) {
      const double alpha = unif(rng, 1e-9, 10.0);
      const double phi = unif(rng, 1e-9, pi);
      const double a2 = alpha * alpha;
      const double b = angle_bound(alpha, phi).bound;
      const double llp = llp_bound(alpha, phi);
      if (!(b >= -a2 * (1.0 + 1e-12)) || !(b <= -a2 / 4.0 + 1e-12 * a2)) {
        ok = false;
        detail = fmt("range violated at alpha=%.6g phi=%.6g", alpha, phi);
      } else if (!(b >= llp - 1e-12 * a2)) {
        ok = false;
        detail = fmt("ordering violated at alpha=%.6g phi=%.6g", alpha, phi);
      } else if (std::abs(phi - pi) >= 1e-9 && !(b > llp)) {
        ok = false;
        detail = fmt("strictness violated at alpha=%.6g phi=%.6g", alpha, phi);
      }
    }
    if (angle_bound(1.0, pi).bound != llp_bound(1.0, pi)) {
      ok = false;
      detail = "bounds differ at phi = pi";
    }
    report.note(2, "bound ordering on 10000 random (alpha, phi)", ok, detail);
  }

  // ---- criterion 3: split optimizer against the grid oracle ----------
  {
    std::mt19937_64 rng(77);
    bool ok = true;
    std::string detail;
    int corpus = 0;

    auto check_pair = [&](const RayConfig& config, const char* family) {
      const BoundResult fast = star_bound(config);
      const BoundResult brute = brute_force_star_bound(config, 1'000'000);
      const double scale =
          std::max({std::abs(fast.bound), std::abs(brute.bound), 1e-6});
      if (std::abs(fast.bound - brute.bound) > 1e-4 * scale) {
        ok = false;
        detail = std::string(family) +
                 fmt(": optimizer %.12g vs oracle %.12g", fast.bound, brute.bound);
      }
      ++corpus;
    };

    for (int i = 0; i < 15 && ok; ++i) {  // two-ray family
      const double alpha = unif(rng, 0.2, 5.0);
      const double phi = unif(rng, 0.05, pi);
      const RayConfig c = angle_config(phi, alpha);
      check_pair(c, "2-ray");
      if (std::abs(star_bound(c).bound - angle_bound(alpha, phi).bound) >
          1e-10 * alpha * alpha) {
        ok = false;
        detail = fmt("2-ray closed form mismatch at alpha=%.6g phi=%.6g", alpha, phi);
      }
    }
    for (int i = 0; i < 15 && ok; ++i) {  // four-ray crossing family
      const double alpha = unif(rng, 0.2, 5.0);
      const double phi = unif(rng, 0.05, pi - 0.05);
      const RayConfig c = lines_config(phi, alpha);
      check_pair(c, "4-ray");
      if (std::abs(star_bound(c).bound - lines_bound(alpha, phi).bound) >
          1e-10 * alpha * alpha) {
        ok = false;
        detail = fmt("4-ray closed form mismatch at alpha=%.6g phi=%.6g", alpha, phi);
      }
    }
    for (int i = 0; i < 5 && ok; ++i) {  // symmetric three-ray stars
      const double alpha = unif(rng, 0.2, 5.0);
      check_pair(RayConfig({Ray{0.1, alpha}, Ray{0.1 + 2.0 * pi / 3.0, alpha},
                            Ray{0.1 + 4.0 * pi / 3.0, alpha}}),
                 "3-symmetric");
    }
    int fives = 0;
    while (fives < 15 && ok) {  // random five-ray stars with admissible splits
      std::vector<Ray> rays;
      for (int j = 0; j < 5; ++j)
        rays.push_back(Ray{unif(rng, 0.0, 2.0 * pi), unif(rng, 0.5, 2.0)});
      std::sort(rays.begin(), rays.end(),
                [](const Ray& a, const Ray& b) { return a.angle < b.angle; });
      bool distinct = true;
      for (int j = 0; j + 1 < 5; ++j)
        if (rays[j + 1].angle - rays[j].angle < 1e-2) distinct = false;
      if (rays.front().angle + 2.0 * pi - rays.back().angle < 1e-2) distinct = false;
      if (!distinct) continue;
      const RayConfig c(rays);
      try {
        star_bound(c);
      } catch (const std::domain_error&) {
        continue;
      }
      check_pair(c, "5-ray");
      ++fives;
    }
    report.note(3, "split optimizer matches the grid-search oracle", ok,
                ok ? fmt("%g configurations", corpus) : detail);
  }

  // ---- criterion 4: straight-line ground energy and refinement -------
  {
    progress("criterion 4: refinement study at phi = pi (three solves)");
    SweepParams params;
    const ConvergenceStudy study = run_convergence_study(params);
    const double lam_fine = study.lambda1.back();
    bool ok = lam_fine >= -0.27 && lam_fine <= -0.23;
    for (std::size_t i = 1; i < study.errors.size(); ++i)
      if (!(study.errors[i] < study.errors[i - 1])) ok = false;
    report.note(4, "straight line: lambda1 in [-0.27, -0.23] with monotone errors",
                ok,
                fmt("lambda1(h=0.2,0.1,0.05) = %.6g, %.6g, %.6g", study.lambda1[0],
                    study.lambda1[1], study.lambda1[2]));
  }

  // ---- criteria 5-7 share the two production sweeps -------------------
  SweepParams params;  // alpha 1, L 20, h 0.05, tol_disc 0.02, seed 42
  progress("running the angle-mode sweep (6 apertures at h = 0.05)");
  std::vector<double> angle_phis;
  for (double d : {30., 60., 90., 120., 150., 180.}) angle_phis.push_back(d * pi / 180.0);
  const std::vector<SweepRow> angle_rows =
      run_sweep(SweepMode::angle, angle_phis, params);

  progress("running the lines-mode sweep (4 apertures at h = 0.05)");
  std::vector<double> lines_phis;
  for (double d : {30., 45., 60., 90.}) lines_phis.push_back(d * pi / 180.0);
  const std::vector<SweepRow> lines_rows =
      run_sweep(SweepMode::lines, lines_phis, params);

  // ---- criterion 5: perpendicular crossing ground energy -------------
  {
    const SweepRow& row = lines_rows.back();  // phi = 90 deg
    const bool ok =
        row.converged && row.e_num >= -0.55 && row.e_num <= -0.45;
    report.note(5, "perpendicular lines: lambda1 in [-0.55, -0.45]", ok,
                fmt("lambda1 = %.6g", row.e_num));
  }

  // ---- criterion 6: one-sided verification sweep ----------------------
  {
    bool ok = true;
    double worst_gap = std::numeric_limits<double>::infinity();
    for (const auto* rows : {&angle_rows, &lines_rows}) {
      for (const SweepRow& row : *rows) {
        worst_gap = std::min(worst_gap, row.gap);
        if (!row.converged || !(row.gap >= -0.02)) ok = false;
      }
    }
    report.note(6, "e_num >= bound - 0.02 across both sweeps", ok,
                fmt("worst gap %.6g over %g rows", worst_gap,
                    static_cast<double>(angle_rows.size() + lines_rows.size())));
  }

  // ---- criterion 7: discrete-spectrum counts below -0.27 --------------
  {
    progress("criterion 7: extra inertia count at phi = 15 deg");
    const Grid grid = build_grid(params.L, params.h);
    const double threshold = -0.25 - params.tol_disc;
    const std::int64_t count15 =
        count_below(assemble(grid, angle_config(pi / 12.0, 1.0)), threshold);

    auto row_count = [&](double deg) {
      for (const SweepRow& row : angle_rows)
        if (std::abs(row.phi_rad - deg * pi / 180.0) < 1e-12) return row.n_below_ess;
      return static_cast<std::int64_t>(-1);
    };
    const std::int64_t c30 = row_count(30.0), c60 = row_count(60.0);
    const std::int64_t c90 = row_count(90.0), c180 = row_count(180.0);

    // A state below -0.27 requires the lower bound itself to lie below
    // -0.27, which fails for phi above 136 deg, and the measured spectra
    // at 90-150 deg sit above the threshold as well; the existence
    // assertion therefore covers 30 and 60 deg. Counts at 15 and 90 deg
    // are frozen solver-derived regression values.
    const bool ok = c180 == 0 && c30 >= 1 && c60 >= 1 && count15 >= c90 &&
                    count15 == 2 && c90 == 0;
    report.note(7, "state counts below -0.27: none at pi, present at sharp angles",
                ok,
                fmt("counts: 15deg=%g, 30deg=%g, 60deg=%g",
                    static_cast<double>(count15), static_cast<double>(c30),
                    static_cast<double>(c60)) +
                    fmt(", 90deg=%g, 180deg=%g", static_cast<double>(c90),
                        static_cast<double>(c180)));
  }

  // ---- criterion 8: exact coupling-grid rescaling ---------------------
  {
    progress("criterion 8: assembling and solving the rescaled pair");
    const DiscreteForm strong =
        assemble(build_grid(10.0, 0.05), angle_config(pi / 2.0, 2.0));
    const DiscreteForm weak =
        assemble(build_grid(20.0, 0.1), angle_config(pi / 2.0, 1.0));
    SparseMatrix diff = strong.op - weak.op;
    const bool same_matrix = diff.norm() == 0.0;

    const SpectrumEstimate es = lowest_eigenpairs(strong, 3, 1e-10);
    const SpectrumEstimate ew = lowest_eigenpairs(weak, 3, 1e-10);
    bool ok = same_matrix && es.all_converged() && ew.all_converged();
    double worst = 0.0;
    for (int i = 0; i < 3 && ok; ++i) {
      const double err = std::abs(es.eigenvalues[i] - 4.0 * ew.eigenvalues[i]);
      worst = std::max(worst, err);
      if (err > 1e-10 * std::max(1.0, std::abs(es.eigenvalues[i]))) ok = false;
    }
    report.note(8, "eigenvalues scale by 4 under the exact rescaling", ok,
                fmt("matrix diff %.3g, worst eigenvalue mismatch %.3g",
                    same_matrix ? 0.0 : diff.norm(), worst));
  }

  std::printf("%s\n", report.all() ? "acceptance: ALL CRITERIA PASSED"
                                   : "acceptance: FAILURES PRESENT");
  return report.all() ? 0 : 1;
}
