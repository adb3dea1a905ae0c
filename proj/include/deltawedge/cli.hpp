#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "deltawedge/analytic_bounds.hpp"
#include "deltawedge/eigensolver.hpp"
#include "deltawedge/geometry.hpp"
#include "deltawedge/sweep.hpp"

namespace deltawedge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitSolverFailed = 3;

namespace detail {

inline double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t next = text.find(',', pos);
    if (next == std::string::npos) next = text.size();
    const std::string item = text.substr(pos, next - pos);
    if (!item.empty()) {
      char* end = nullptr;
      const double v = std::strtod(item.c_str(), &end);
      if (end == item.c_str() || *end != '\0')
        throw std::domain_error("could not parse number '" + item + "'");
      out.push_back(v);
    }
    pos = next + 1;
  }
  return out;
}

/// "a:b:step" inclusive range in degrees.
inline std::vector<double> parse_range(const std::string& text) {
  double a = 0, b = 0, s = 0;
  if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &a, &b, &s) != 3 || !(s > 0))
    throw std::domain_error("range must be start:stop:step with step > 0");
  std::vector<double> out;
  for (double v = a; v <= b + 1e-9 * s; v += s) out.push_back(v);
  return out;
}

/// "angle:coupling,angle:coupling,..."
inline std::vector<Ray> parse_rays(const std::string& text, bool degrees) {
  std::vector<Ray> rays;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t next = text.find(',', pos);
    if (next == std::string::npos) next = text.size();
    const std::string item = text.substr(pos, next - pos);
    if (!item.empty()) {
      double ang = 0, coup = 0;
      if (std::sscanf(item.c_str(), "%lf:%lf", &ang, &coup) != 2)
        throw std::domain_error("ray must be angle:coupling, got '" + item + "'");
      rays.push_back(Ray{degrees ? deg2rad(ang) : ang, coup});
    }
    pos = next + 1;
  }
  return rays;
}

/// Plain key=value configuration file; '#' starts a comment.
inline std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::domain_error("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return (b == std::string::npos) ? std::string{} : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!key.empty()) kv[key] = value;
  }
  return kv;
}

inline std::uint64_t env_seed() {
  if (const char* s = std::getenv("DELTA_WEDGE_SEED"))
    return std::strtoull(s, nullptr, 10);
  return 42;
}

struct CommonArgs {
  std::string mode;
  double alpha = 1.0;
  std::string phi_deg, phi_rad, phi_range_deg;
  std::string rays_deg, rays_rad;
  double L = 20.0;
  double h = 0.05;
  int k = 1;
  double tol = 1e-8;
  double tol_disc = 0.02;
  std::uint64_t seed = env_seed();
  int max_iter = 10'000;
  std::string config_path;
  std::string out_path;
};

inline void add_common(CLI::App* cmd, CommonArgs& a, bool needs_grid) {
  cmd->set_help_flag("--help", "print this help and exit");  // frees -h for --h
  cmd->add_option("mode", a.mode, "configuration family")->required(false);
  cmd->add_option("--alpha", a.alpha, "interaction strength");
  cmd->add_option("--phi-deg", a.phi_deg, "aperture(s) in degrees, comma separated");
  cmd->add_option("--phi-rad", a.phi_rad, "aperture(s) in radians, comma separated");
  cmd->add_option("--rays-deg", a.rays_deg, "star rays as angle:coupling list, degrees");
  cmd->add_option("--rays-rad", a.rays_rad, "star rays as angle:coupling list, radians");
  cmd->add_option("--config", a.config_path, "key=value parameter file");
  cmd->add_option("--out", a.out_path, "output file (default: stdout)");
  if (needs_grid) {
    cmd->add_option("--L", a.L, "half-width of the truncated box");
    cmd->add_option("--h", a.h, "grid spacing");
    cmd->add_option("--k", a.k, "number of eigenpairs");
    cmd->add_option("--tol", a.tol, "eigensolver residual tolerance");
    cmd->add_option("--seed", a.seed, "starting-vector seed");
    cmd->add_option("--max-iter", a.max_iter, "eigensolver iteration cap");
  }
}

/// Fill options that were not given on the command line from the config
/// file. Flags always win.
inline void apply_config(CLI::App* cmd, CommonArgs& a) {
  if (a.config_path.empty()) return;
  const auto kv = read_config(a.config_path);
  auto take = [&](const char* key, auto& slot, const char* opt) {
    auto it = kv.find(key);
    if (it == kv.end()) return;
    const CLI::Option* o = cmd->get_option(opt);
    if (o && o->count() > 0) return;
    std::stringstream ss(it->second);
    ss >> slot;
  };
  take("alpha", a.alpha, "--alpha");
  take("phi_deg", a.phi_deg, "--phi-deg");
  take("L", a.L, "--L");
  take("h", a.h, "--h");
  take("k", a.k, "--k");
  take("tol", a.tol, "--tol");
  take("mode", a.mode, "mode");
  take("out", a.out_path, "--out");
}

inline SweepMode parse_mode2(const std::string& mode) {
  if (mode == "angle") return SweepMode::angle;
  if (mode == "lines") return SweepMode::lines;
  throw std::domain_error("mode must be angle or lines, got '" + mode + "'");
}

/// Single aperture from --phi-deg / --phi-rad (exactly one required).
inline double parse_phi(const CommonArgs& a) {
  if (!a.phi_deg.empty() && !a.phi_rad.empty())
    throw std::domain_error("give exactly one of --phi-deg and --phi-rad");
  if (!a.phi_deg.empty()) {
    const auto v = parse_list(a.phi_deg);
    if (v.size() != 1) throw std::domain_error("expected a single aperture");
    return deg2rad(v[0]);
  }
  if (!a.phi_rad.empty()) {
    const auto v = parse_list(a.phi_rad);
    if (v.size() != 1) throw std::domain_error("expected a single aperture");
    return v[0];
  }
  throw std::domain_error("an aperture is required (--phi-deg or --phi-rad)");
}

/// Aperture list for sweeps; falls back to the default verification set
/// when no aperture flag was given at all. An explicitly empty list is a
/// usage error.
inline std::vector<double> parse_phi_list(const CommonArgs& a, SweepMode mode,
                                          bool phi_flag_given) {
  const bool has_deg = !a.phi_deg.empty();
  const bool has_rad = !a.phi_rad.empty();
  const bool has_range = !a.phi_range_deg.empty();
  if (has_deg + has_rad + has_range > 1)
    throw std::domain_error("give at most one of --phi-deg, --phi-rad, --phi-range-deg");
  std::vector<double> out;
  if (has_deg) {
    for (double d : parse_list(a.phi_deg)) out.push_back(deg2rad(d));
  } else if (has_rad) {
    out = parse_list(a.phi_rad);
  } else if (has_range) {
    for (double d : parse_range(a.phi_range_deg)) out.push_back(deg2rad(d));
  } else if (!phi_flag_given) {
    if (mode == SweepMode::angle)
      for (double d : {30., 60., 90., 120., 150., 180.}) out.push_back(deg2rad(d));
    else
      for (double d : {30., 45., 60., 90.}) out.push_back(deg2rad(d));
  }
  if (out.empty()) throw std::domain_error("empty aperture list");
  return out;
}

inline RayConfig config_from_args(const CommonArgs& a) {
  if (a.mode == "star") {
    if (!a.rays_deg.empty() && !a.rays_rad.empty())
      throw std::domain_error("give exactly one of --rays-deg and --rays-rad");
    if (!a.rays_deg.empty()) return RayConfig(parse_rays(a.rays_deg, true));
    if (!a.rays_rad.empty()) return RayConfig(parse_rays(a.rays_rad, false));
    throw std::domain_error("star mode requires --rays-deg or --rays-rad");
  }
  const double phi = parse_phi(a);
  if (a.mode == "angle") return angle_config(phi, a.alpha);
  if (a.mode == "lines") return lines_config(phi, a.alpha);
  throw std::domain_error("mode must be angle, lines or star, got '" + a.mode + "'");
}

inline SweepParams sweep_params(const CommonArgs& a, double fault_scale) {
  SweepParams p;
  p.alpha = a.alpha;
  p.L = a.L;
  p.h = a.h;
  p.k = a.k;
  p.tol = a.tol;
  p.tol_disc = a.tol_disc;
  p.seed = a.seed;
  p.max_iterations = a.max_iter;
  p.fault_scale_bound = fault_scale;
  return p;
}

inline void print_bound_result(std::ostream& os, const BoundResult& b) {
  os << "bound: " << fmt(b.bound) << '\n';
  os << "gammas:";
  for (double g : b.split.gammas) os << ' ' << fmt(g);
  os << '\n';
  os << "per-wedge bounds:";
  for (double w : b.per_wedge_bounds) os << ' ' << fmt(w);
  os << '\n';
}

inline int cmd_bound(const CommonArgs& a, std::ostream& out) {
  if (a.mode == "angle") {
    const double phi = parse_phi(a);
    const BoundResult b = angle_bound(a.alpha, phi);
    out << "mode: angle\nalpha: " << fmt(a.alpha) << "\nphi_rad: " << fmt(phi)
        << '\n';
    print_bound_result(out, b);
    out << "beta: " << fmt(b.split.gammas[1]) << '\n';
    out << "llp_bound: " << fmt(llp_bound(a.alpha, phi)) << '\n';
  } else if (a.mode == "lines") {
    const double phi = parse_phi(a);
    const BoundResult b = lines_bound(a.alpha, phi);
    out << "mode: lines\nalpha: " << fmt(a.alpha) << "\nphi_rad: " << fmt(phi)
        << '\n';
    print_bound_result(out, b);
    out << "beta: " << fmt(b.split.gammas[0]) << '\n';
  } else if (a.mode == "star") {
    const RayConfig config = config_from_args(a);
    const BoundResult b = star_bound(config);
    out << "mode: star\nrays:";
    for (const Ray& r : config.rays())
      out << ' ' << fmt(r.angle) << ':' << fmt(r.coupling);
    out << '\n';
    print_bound_result(out, b);
  } else {
    throw std::domain_error("mode must be angle, lines or star");
  }
  return kExitOk;
}

inline int cmd_solve(const CommonArgs& a, const std::string& dump_path,
                     std::ostream& out) {
  if (!a.out_path.empty() && a.mode == "star")
    throw std::domain_error("CSV output is only defined for angle and lines modes");
  const RayConfig config = config_from_args(a);
  const Grid grid = build_grid(a.L, a.h);
  const DiscreteForm form = assemble(grid, config);

  if (!dump_path.empty()) {
    std::ofstream dump(dump_path);
    if (!dump) throw std::domain_error("cannot open dump file: " + dump_path);
    write_matrix(dump, form);
  }

  SolveOptions opts;
  opts.seed = a.seed;
  opts.max_iterations = a.max_iter;
  opts.keep_vectors = false;
  const SpectrumEstimate est = lowest_eigenpairs(form, a.k, a.tol, opts);

  out << "mode: " << a.mode << "\nalpha: " << fmt(a.alpha) << "\nL: " << fmt(a.L)
      << "\nh: " << fmt(a.h) << "\nn: " << grid.n << "\nunknowns: "
      << grid.unknowns() << "\niterations: " << est.iterations << '\n';
  try {
    out << "analytic_bound: " << fmt(star_bound(config).bound) << '\n';
  } catch (const std::domain_error& e) {
    out << "analytic_bound: unavailable (" << e.what() << ")\n";
  }
  for (std::size_t i = 0; i < est.eigenvalues.size(); ++i) {
    out << "eigenvalue[" << i << "]: " << fmt(est.eigenvalues[i])
        << "  residual: " << fmt(est.residuals[i])
        << (est.converged[i] ? "" : "  NOT CONVERGED") << '\n';
  }

  if (!a.out_path.empty()) {
    const double phi = parse_phi(a);
    SweepRow row;
    row.phi_rad = phi;
    row.h = a.h;
    row.L = a.L;
    row.ess_threshold = -(a.alpha * a.alpha) / 4.0;
    if (a.mode == "angle") {
      row.bound_new = angle_bound(a.alpha, phi).bound;
      row.bound_llp = llp_bound(a.alpha, phi);
    } else {
      row.bound_new = lines_bound(a.alpha, phi).bound;
      row.bound_lines = -(a.alpha * a.alpha) / (1.0 + std::sin(phi));
    }
    row.e_num = est.eigenvalues.front();
    row.converged = est.converged.front();
    row.gap = row.e_num - row.bound_new;
    row.n_below_ess = count_below(form, row.ess_threshold - a.tol_disc, a.tol);
    std::ofstream csv(a.out_path);
    if (!csv) throw std::domain_error("cannot open output file: " + a.out_path);
    write_csv(csv, {row});
  }
  return est.all_converged() ? kExitOk : kExitSolverFailed;
}

inline int cmd_sweep(const CommonArgs& a, const std::string& plot_path,
                     bool phi_flag_given, std::ostream& out) {
  const SweepMode mode = parse_mode2(a.mode);
  const std::vector<double> phis = parse_phi_list(a, mode, phi_flag_given);
  const SweepParams params = sweep_params(a, 1.0);
  const std::vector<SweepRow> rows = run_sweep(mode, phis, params);

  if (!a.out_path.empty()) {
    std::ofstream csv(a.out_path);
    if (!csv) throw std::domain_error("cannot open output file: " + a.out_path);
    write_csv(csv, rows);
  } else {
    write_csv(out, rows);
  }
  if (!plot_path.empty()) {
    std::ofstream plot(plot_path);
    if (!plot) throw std::domain_error("cannot open plot file: " + plot_path);
    write_plot_data(plot, mode, rows);
  }
  for (const SweepRow& r : rows)
    if (!r.converged) return kExitSolverFailed;
  return kExitOk;
}

inline int cmd_verify(const CommonArgs& a, bool convergence_study, double fault_scale,
                      bool phi_flag_given, std::ostream& out) {
  const SweepMode mode = parse_mode2(a.mode);
  const std::vector<double> phis = parse_phi_list(a, mode, phi_flag_given);
  SweepParams params = sweep_params(a, fault_scale);

  if (convergence_study) {
    const ConvergenceStudy study = run_convergence_study(params);
    out << "convergence study at phi = pi (exact ground energy "
        << fmt(-(params.alpha * params.alpha) / 4.0) << "):\n";
    for (std::size_t i = 0; i < study.hs.size(); ++i)
      out << "  h = " << fmt(study.hs[i]) << "  lambda1 = " << fmt(study.lambda1[i])
          << "  error = " << fmt(study.errors[i]) << '\n';
    out << "  observed rate: " << fmt(study.rate) << '\n';
    out << "  tol_disc re-derived: " << fmt(study.suggested_tol_disc)
        << " (was " << fmt(params.tol_disc) << ")\n";
    params.tol_disc = study.suggested_tol_disc;
  }

  const std::vector<SweepRow> rows = run_sweep(mode, phis, params);
  if (!a.out_path.empty()) {
    std::ofstream csv(a.out_path);
    if (!csv) throw std::domain_error("cannot open output file: " + a.out_path);
    write_csv(csv, rows);
  }

  const VerifyReport report = verify_rows(mode, rows, params);
  for (const SweepRow& r : rows) {
    out << "phi = " << fmt(r.phi_rad * 180.0 / std::numbers::pi)
        << " deg: bound = " << fmt(r.bound_new) << ", e_num = " << fmt(r.e_num)
        << ", gap = " << fmt(r.gap) << ", n_below_ess = " << r.n_below_ess
        << (r.converged ? "" : "  [not converged]") << '\n';
  }
  if (report.passed) {
    out << "verify " << a.mode << ": PASS (" << rows.size() << " rows)\n";
    return kExitOk;
  }
  out << "verify " << a.mode << ": FAIL\n";
  for (const std::string& f : report.failures) out << "  " << f << '\n';
  return report.solver_failed ? kExitSolverFailed : kExitVerifyFailed;
}

}  // namespace detail

/// Run the command-line interface. Returns the process exit code:
/// 0 success, 1 verification failure, 2 usage error, 3 solver failure.
inline int run(std::vector<std::string> args, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"analytic lower bounds and numerical verification for 2D "
               "delta-interactions on ray stars"};
  app.require_subcommand(1);

  detail::CommonArgs bound_args, solve_args, sweep_args, verify_args;
  std::string dump_path, sweep_plot_path;
  bool convergence_study = false;
  double fault_scale = 1.0;

  CLI::App* bound = app.add_subcommand("bound", "print the analytic lower bound");
  detail::add_common(bound, bound_args, false);

  CLI::App* solve = app.add_subcommand(
      "solve", "assemble the discrete form and compute the lowest eigenpairs");
  detail::add_common(solve, solve_args, true);
  solve->add_option("--dump-matrix", dump_path,
                    "write the assembled matrix in coordinate text form");
  solve->add_option("--tol-disc", solve_args.tol_disc,
                    "margin for the essential-threshold count");

  CLI::App* sweep = app.add_subcommand("sweep", "compute a CSV over apertures");
  detail::add_common(sweep, sweep_args, true);
  sweep->add_option("--phi-range-deg", sweep_args.phi_range_deg,
                    "aperture range start:stop:step in degrees");
  sweep->add_option("--tol-disc", sweep_args.tol_disc,
                    "margin for the essential-threshold count");
  sweep->add_option("--plot-out", sweep_plot_path, "write two-column plot data");

  CLI::App* verify = app.add_subcommand(
      "verify", "run a sweep and assert the bound inequalities hold");
  detail::add_common(verify, verify_args, true);
  verify->add_option("--phi-range-deg", verify_args.phi_range_deg,
                     "aperture range start:stop:step in degrees");
  verify->add_option("--tol-disc", verify_args.tol_disc,
                     "accepted one-sided discretization margin");
  verify->add_flag("--convergence-study", convergence_study,
                   "re-derive tol_disc from a refinement study at phi = pi");
  verify->add_option("--fault-scale-bound", fault_scale,
                     "testing aid: scale the bound column before verification");

  try {
    std::vector<const char*> argv;
    argv.push_back("deltawedge");
    for (const std::string& s : args) argv.push_back(s.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());

    if (bound->parsed()) {
      detail::apply_config(bound, bound_args);
      return detail::cmd_bound(bound_args, out);
    }
    if (solve->parsed()) {
      detail::apply_config(solve, solve_args);
      return detail::cmd_solve(solve_args, dump_path, out);
    }
    auto phi_flag_given = [](CLI::App* cmd) {
      for (const char* name : {"--phi-deg", "--phi-rad", "--phi-range-deg"}) {
        const CLI::Option* o = cmd->get_option_no_throw(name);
        if (o && o->count() > 0) return true;
      }
      return false;
    };
    if (sweep->parsed()) {
      detail::apply_config(sweep, sweep_args);
      return detail::cmd_sweep(sweep_args, sweep_plot_path, phi_flag_given(sweep),
                               out);
    }
    if (verify->parsed()) {
      detail::apply_config(verify, verify_args);
      return detail::cmd_verify(verify_args, convergence_study, fault_scale,
                                phi_flag_given(verify), out);
    }
    err << "no subcommand given\n";
    return kExitUsage;
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSolverFailed;
  }
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(std::move(args), std::cout, std::cerr);
}

}  // namespace deltawedge::cli
