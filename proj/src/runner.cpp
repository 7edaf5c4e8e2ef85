#include "spincm/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "spincm/verify.hpp"

namespace spincm {

namespace {

namespace fs = std::filesystem;

struct LoadedConfig {
  RunConfig cfg;
  std::string hash;
};

int load_or_report(const RunnerOptions& opt, LoadedConfig& out) {
  if (opt.config_path.empty()) {
    std::cerr << "error: --config is required\n";
    return kExitConfig;
  }
  try {
    const std::string text = read_file(opt.config_path);
    out.cfg = parse_config_text(text);
    out.hash = config_hash(text);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  }
  if (opt.seed) out.cfg.seed = *opt.seed;
  if (opt.format) {
    if (*opt.format != "json" && *opt.format != "csv" &&
        *opt.format != "both") {
      std::cerr << "error: format must be json, csv or both, got '"
                << *opt.format << "'\n";
      return kExitConfig;
    }
    out.cfg.format = *opt.format;
  }
  return kExitOk;
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::string fmt_residual(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

template <class State>
std::vector<std::string> write_trajectory(const RunConfig& cfg,
                                          const RunnerOptions& opt,
                                          const Trajectory<State>& traj,
                                          const OutputMeta& meta,
                                          const std::string& stem) {
  fs::create_directories(opt.out_dir);
  std::vector<std::string> written;
  if (cfg.format == "json" || cfg.format == "both") {
    const std::string path = join_path(opt.out_dir, stem + ".json");
    atomic_write(path, trajectory_json(traj, meta));
    written.push_back(path);
  }
  if (cfg.format == "csv" || cfg.format == "both") {
    const std::string path = join_path(opt.out_dir, stem + ".csv");
    atomic_write(path, trajectory_csv(traj, meta));
    written.push_back(path);
  }
  return written;
}

/// Deterministic descending centered profile; gap dominates the jitter so
/// the ordering is strict.
Vec descending_profile(int N, double gap, double jitter, Rng& rng) {
  std::uniform_real_distribution<double> u(-jitter, jitter);
  Vec v(N);
  for (int i = 0; i < N; ++i) v[i] = gap * 0.5 * (N - 1 - 2 * i) + u(rng);
  std::sort(v.data(), v.data() + N, std::greater<double>());
  v.array() -= v.mean();
  return v;
}

std::vector<RankOneOrbitPoint> aligned_spins(int N,
                                             const std::vector<double>& xi) {
  std::vector<RankOneOrbitPoint> spins;
  spins.reserve(xi.size());
  for (double x : xi) {
    RankOneOrbitPoint sp;
    sp.xi = x;
    sp.a = Vec::Zero(N);
    sp.a[0] = 1.0;
    sp.b = Vec::Zero(N);
    sp.b[0] = x;
    spins.push_back(std::move(sp));
  }
  return spins;
}

bool spectrum_trivial(const Vec& s) {
  return s.size() == 0 || s.cwiseAbs().maxCoeff() < 1e-15;
}

/// Max deviation of the trajectory from uncoupled motion: p frozen and
/// every q coordinate an exact linear function of time.
template <class State>
double free_flight_residual(const Trajectory<State>& traj) {
  const auto m = traj.times.size();
  if (m < 2) return 0.0;
  double worst = 0.0;
  for (std::size_t k = 0; k < m; ++k)
    worst = std::max(worst, (traj.states[k].p - traj.states[0].p)
                                .template lpNorm<Eigen::Infinity>());
  double tbar = 0.0;
  for (double t : traj.times) tbar += t;
  tbar /= static_cast<double>(m);
  double sxx = 0.0;
  for (double t : traj.times) sxx += (t - tbar) * (t - tbar);
  if (sxx < 1e-300) return worst;
  const int N = static_cast<int>(traj.states[0].q.size());
  for (int i = 0; i < N; ++i) {
    double ybar = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < m; ++k) ybar += traj.states[k].q[i];
    ybar /= static_cast<double>(m);
    for (std::size_t k = 0; k < m; ++k)
      sxy += (traj.times[k] - tbar) * (traj.states[k].q[i] - ybar);
    const double beta = sxy / sxx;
    const double alpha = ybar - beta * tbar;
    for (std::size_t k = 0; k < m; ++k)
      worst = std::max(worst, std::abs(traj.states[k].q[i] - alpha -
                                       beta * traj.times[k]));
  }
  return worst;
}

/// Chunked integration: advance one sample at a time so a mid-run
/// regularity loss still leaves a usable partial trajectory.
template <class State>
int run_trajectory(const RunConfig& cfg, const RunnerOptions& opt,
                   const State& s0, OutputMeta meta) {
  Trajectory<State> traj;
  traj.times.push_back(0.0);
  traj.states.push_back(s0);
  State cur = s0;
  const double dt = cfg.T / cfg.samples;
  int exit_code = kExitOk;
  for (int k = 1; k <= cfg.samples; ++k) {
    try {
      auto seg = integrate(cur, cfg.hamiltonian, dt, cfg.integrator, 1);
      cur = seg.states.back();
    } catch (const std::exception& e) {
      meta.failure_time = traj.times.back();
      meta.error = e.what();
      exit_code = kExitRuntime;
      break;
    }
    traj.times.push_back(cfg.T * k / cfg.samples);
    traj.states.push_back(cur);
  }
  const auto written = write_trajectory(cfg, opt, traj, meta, cfg.prefix);
  for (const auto& p : written) std::cout << "wrote " << p << '\n';
  if (exit_code != kExitOk) {
    std::cerr << "runtime error after t=" << traj.times.back() << ": "
              << meta.error << '\n';
    return exit_code;
  }
  if (opt.assert_free_flight) {
    const double res = free_flight_residual(traj);
    if (!(res < 1e-9)) {
      std::cerr << "free-flight assertion failed: residual = "
                << fmt_residual(res) << " (tol 1e-09)\n";
      return kExitRuntime;
    }
    std::cout << "free flight confirmed: residual = " << fmt_residual(res)
              << '\n';
  }
  return kExitOk;
}

PeriodicRadialState fix_gauge(const LieContext& ctx, const ExtendedState& es,
                              const RunConfig& cfg,
                              const PeriodicRadialState&) {
  return gauge_fix_periodic(ctx, es, cfg.site_xi);
}

OpenRadialState fix_gauge(const LieContext& ctx, const ExtendedState& es,
                          const RunConfig& cfg, const OpenRadialState&) {
  return gauge_fix_open(ctx, es, cfg.orbit_spec());
}

template <class State>
int compare_impl(const RunConfig& cfg, const RunnerOptions& opt,
                 const LieContext& ctx, const State& s0,
                 const std::string& hash, double tol) {
  OutputMeta meta;
  meta.config_hash = hash;
  meta.seed = cfg.seed;

  Trajectory<State> ode;
  ode.times.push_back(0.0);
  ode.states.push_back(s0);
  State cur = s0;
  const double dt = cfg.T / cfg.samples;
  for (int k = 1; k <= cfg.samples; ++k) {
    try {
      auto seg = integrate(cur, cfg.hamiltonian, dt, cfg.integrator, 1);
      cur = seg.states.back();
    } catch (const std::exception& e) {
      meta.failure_time = ode.times.back();
      meta.error = e.what();
      write_trajectory(cfg, opt, ode, meta, cfg.prefix + "_ode");
      std::cerr << "runtime error after t=" << ode.times.back() << ": "
                << e.what() << '\n';
      return kExitRuntime;
    }
    ode.times.push_back(cfg.T * k / cfg.samples);
    ode.states.push_back(cur);
  }

  Trajectory<State> exact;
  Report rep;
  rep.suite = "compare";
  rep.trials = static_cast<int>(ode.times.size());
  rep.tolerance = tol;
  rep.max_residual = 0.0;
  rep.pass = true;
  const ExtendedState es0 = embed_extended(s0);
  for (std::size_t k = 0; k < ode.times.size(); ++k) {
    const double t = ode.times[k];
    try {
      ExtendedState es = es0;
      flow_extended(es, cfg.hamiltonian.site, cfg.hamiltonian.degree, t);
      State fixed = fix_gauge(ctx, es, cfg, s0);
      const double d = radial_distance(fixed, ode.states[k]);
      exact.times.push_back(t);
      exact.states.push_back(std::move(fixed));
      std::ostringstream label;
      label << "t=" << t;
      rep.per_case.push_back({label.str(), d, d < tol});
      rep.max_residual = std::max(rep.max_residual, d);
      rep.pass = rep.pass && d < tol;
    } catch (const std::exception& e) {
      meta.failure_time = t;
      meta.error = e.what();
      write_trajectory(cfg, opt, ode, meta, cfg.prefix + "_ode");
      write_trajectory(cfg, opt, exact, meta, cfg.prefix + "_exact");
      std::cerr << "runtime error at t=" << t << ": " << e.what() << '\n';
      return kExitRuntime;
    }
  }

  auto written = write_trajectory(cfg, opt, ode, meta, cfg.prefix + "_ode");
  auto more = write_trajectory(cfg, opt, exact, meta, cfg.prefix + "_exact");
  written.insert(written.end(), more.begin(), more.end());
  const std::string rep_path =
      join_path(opt.out_dir, cfg.prefix + "_compare.json");
  atomic_write(rep_path, report_json(rep, meta));
  written.push_back(rep_path);
  for (const auto& p : written) std::cout << "wrote " << p << '\n';
  std::cout << "compare: " << (rep.pass ? "PASS" : "FAIL")
            << "  sup_distance=" << fmt_residual(rep.max_residual)
            << "  tol=" << fmt_residual(tol) << '\n';
  return rep.pass ? kExitOk : kExitFail;
}

}  // namespace

void configure_threads() {
#ifdef _OPENMP
  const char* env = std::getenv("SPINCM_THREADS");
  if (!env) return;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end && *end == '\0' && v > 0) omp_set_num_threads(static_cast<int>(v));
#endif
}

int cmd_simulate(const RunnerOptions& opt) {
  configure_threads();
  LoadedConfig lc;
  if (const int rc = load_or_report(opt, lc); rc != kExitOk) return rc;
  const RunConfig& cfg = lc.cfg;
  const LieContext ctx(cfg.N);
  Rng rng(cfg.seed);
  OutputMeta meta;
  meta.config_hash = lc.hash;
  meta.seed = cfg.seed;
  try {
    if (cfg.chain == ChainKind::periodic) {
      PeriodicRadialState s0 = [&] {
        if (!opt.assert_free_flight)
          return sample_tame_periodic(ctx, cfg.orbit_spec(), rng);
        double total = 0.0;
        for (double x : cfg.site_xi) total += x;
        if (std::abs(total) > 1e-12)
          throw ConfigError(
              "free flight on the periodic chain needs the site charges "
              "to sum to zero");
        return make_periodic_state(ctx, aligned_spins(cfg.N, cfg.site_xi),
                                   descending_profile(cfg.N, 0.55, 0.08, rng),
                                   descending_profile(cfg.N, 1.9, 0.2, rng));
      }();
      return run_trajectory(cfg, opt, s0, meta);
    }
    OpenRadialState s0 = [&] {
      if (!opt.assert_free_flight)
        return sample_tame_open(ctx, cfg.orbit_spec(), rng);
      if (!spectrum_trivial(cfg.left_spectrum) ||
          !spectrum_trivial(cfg.right_spectrum))
        throw ConfigError(
            "free flight on the open chain needs trivial boundary orbits");
      return make_open_state(ctx, sample_k_orbit(cfg.N, Vec::Zero(0), rng),
                             sample_k_orbit(cfg.N, Vec::Zero(0), rng),
                             aligned_spins(cfg.N, cfg.site_xi),
                             descending_profile(cfg.N, 0.5, 0.08, rng),
                             descending_profile(cfg.N, 1.9, 0.2, rng));
    }();
    return run_trajectory(cfg, opt, s0, meta);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int cmd_verify(const std::string& suite, const RunnerOptions& opt) {
  configure_threads();
  const auto leaves = suite_group(suite);
  if (leaves.empty()) {
    std::cerr << "error: unknown suite '" << suite << "'\nknown suites:";
    for (const auto& s : suite_names()) std::cerr << ' ' << s;
    std::cerr << "\ngroups: dk commute conserve angles projection psi dims "
                 "liouville all\n";
    return kExitConfig;
  }
  unsigned long long seed = 1;
  if (!opt.config_path.empty()) {
    try {
      seed = load_config(opt.config_path).seed;
    } catch (const ConfigError& e) {
      std::cerr << e.what() << '\n';
      return kExitConfig;
    }
  }
  if (opt.seed) seed = *opt.seed;
  fs::create_directories(opt.out_dir);
  bool all_pass = true;
  for (const auto& leaf : leaves) {
    Report rep;
    try {
      rep = run_suite(leaf, seed, opt.tol);
    } catch (const std::exception& e) {
      std::cerr << "runtime error in suite " << leaf << ": " << e.what()
                << '\n';
      return kExitRuntime;
    }
    OutputMeta meta;
    std::ostringstream desc;
    desc << "verify " << leaf << " seed=" << seed;
    if (opt.tol) desc << " tol=" << *opt.tol;
    meta.config_hash = config_hash(desc.str());
    meta.seed = seed;
    const std::string path =
        join_path(opt.out_dir, "report_" + leaf + ".json");
    atomic_write(path, report_json(rep, meta));
    std::cout << leaf << ": " << (rep.pass ? "PASS" : "FAIL")
              << "  max_residual=" << fmt_residual(rep.max_residual)
              << "  tol=" << fmt_residual(rep.tolerance)
              << "  trials=" << rep.trials << '\n';
    all_pass = all_pass && rep.pass;
  }
  return all_pass ? kExitOk : kExitFail;
}

int cmd_compare(const RunnerOptions& opt) {
  configure_threads();
  LoadedConfig lc;
  if (const int rc = load_or_report(opt, lc); rc != kExitOk) return rc;
  const RunConfig& cfg = lc.cfg;
  const double tol = opt.tol.value_or(1e-6);
  const LieContext ctx(cfg.N);
  Rng rng(cfg.seed);
  try {
    if (cfg.chain == ChainKind::periodic) {
      const PeriodicRadialState s0 =
          sample_tame_periodic(ctx, cfg.orbit_spec(), rng);
      return compare_impl(cfg, opt, ctx, s0, lc.hash, tol);
    }
    const OpenRadialState s0 = sample_tame_open(ctx, cfg.orbit_spec(), rng);
    return compare_impl(cfg, opt, ctx, s0, lc.hash, tol);
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace spincm
