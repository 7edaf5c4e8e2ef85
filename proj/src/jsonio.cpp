#include "spincm/jsonio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace spincm {

namespace {

using Json = nlohmann::ordered_json;

Json vec_to_json(const Vec& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json meta_to_json(const OutputMeta& meta) {
  Json m;
  m["config_hash"] = meta.config_hash;
  m["seed"] = meta.seed;
  if (meta.failure_time) {
    m["failure_time"] = *meta.failure_time;
    m["error"] = meta.error;
  }
  return m;
}

Json spin_to_json(const RankOneOrbitPoint& sp) {
  Json j;
  j["xi"] = sp.xi;
  j["a"] = vec_to_json(sp.a);
  j["b"] = vec_to_json(sp.b);
  return j;
}

Json state_to_json(const PeriodicRadialState& s) {
  Json j;
  j["p"] = vec_to_json(s.p);
  j["q"] = vec_to_json(s.q);
  Json spins = Json::array();
  for (const auto& sp : s.spins) spins.push_back(spin_to_json(sp));
  j["spins"] = spins;
  return j;
}

Json state_to_json(const OpenRadialState& s) {
  Json j;
  j["p"] = vec_to_json(s.p);
  j["q"] = vec_to_json(s.q);
  Json spins = Json::array();
  for (const auto& sp : s.spins) spins.push_back(spin_to_json(sp));
  j["spins"] = spins;
  j["mu_left"] = vec_to_json(upper_tri(s.left.y));
  j["mu_right"] = vec_to_json(upper_tri(s.right.y));
  return j;
}

template <class State>
Json trajectory_to_json(const Trajectory<State>& traj, const OutputMeta& meta,
                        const char* chain) {
  Json j;
  j["meta"] = meta_to_json(meta);
  j["chain"] = chain;
  if (!traj.states.empty()) {
    j["N"] = traj.states.front().ctx.N();
    j["sites"] = traj.states.front().n();
  }
  Json times = Json::array();
  for (double t : traj.times) times.push_back(t);
  j["times"] = times;
  Json states = Json::array();
  for (const auto& s : traj.states) states.push_back(state_to_json(s));
  j["states"] = states;
  return j;
}

void append_csv(std::ostringstream* os, const Vec& v) {
  for (int i = 0; i < v.size(); ++i) *os << ',' << v[i];
}

/// JSON has no inf/nan literals; failed-trial residuals become a huge
/// finite sentinel so reports stay machine readable.
double finite_or_cap(double v) {
  if (std::isnan(v)) return 9e99;
  if (std::isinf(v)) return v > 0 ? 9e99 : -9e99;
  return v;
}

template <class State>
std::string trajectory_csv_impl(const Trajectory<State>& traj,
                                const OutputMeta& meta, bool open) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "# config_hash=" << meta.config_hash << " seed=" << meta.seed;
  if (meta.failure_time)
    os << " failure_time=" << *meta.failure_time << " error=\"" << meta.error
       << "\"";
  os << '\n';
  if (traj.states.empty()) {
    os << "time\n";
    return os.str();
  }
  const int N = traj.states.front().ctx.N();
  const int n = traj.states.front().n();
  const int tri = N * (N - 1) / 2;
  os << "time";
  for (int i = 1; i <= N; ++i) os << ",p" << i;
  for (int i = 1; i <= N; ++i) os << ",q" << i;
  for (int k = 1; k <= n; ++k) {
    for (int i = 1; i <= N; ++i) os << ",a" << k << "_" << i;
    for (int i = 1; i <= N; ++i) os << ",b" << k << "_" << i;
  }
  if (open) {
    for (int i = 1; i <= tri; ++i) os << ",left" << i;
    for (int i = 1; i <= tri; ++i) os << ",right" << i;
  }
  os << '\n';
  for (size_t row = 0; row < traj.states.size(); ++row) {
    const auto& s = traj.states[row];
    os << traj.times[row];
    append_csv(&os, s.p);
    append_csv(&os, s.q);
    for (const auto& sp : s.spins) {
      append_csv(&os, sp.a);
      append_csv(&os, sp.b);
    }
    if constexpr (std::is_same_v<State, OpenRadialState>) {
      append_csv(&os, upper_tri(s.left.y));
      append_csv(&os, upper_tri(s.right.y));
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace

std::string trajectory_json(const Trajectory<PeriodicRadialState>& traj,
                            const OutputMeta& meta) {
  return trajectory_to_json(traj, meta, "periodic").dump(2) + "\n";
}

std::string trajectory_json(const Trajectory<OpenRadialState>& traj,
                            const OutputMeta& meta) {
  return trajectory_to_json(traj, meta, "open").dump(2) + "\n";
}

std::string trajectory_csv(const Trajectory<PeriodicRadialState>& traj,
                           const OutputMeta& meta) {
  return trajectory_csv_impl(traj, meta, false);
}

std::string trajectory_csv(const Trajectory<OpenRadialState>& traj,
                           const OutputMeta& meta) {
  return trajectory_csv_impl(traj, meta, true);
}

std::string report_json(const Report& rep, const OutputMeta& meta) {
  Json j;
  j["suite"] = rep.suite;
  j["trials"] = rep.trials;
  j["tolerance"] = rep.tolerance;
  j["max_residual"] = finite_or_cap(rep.max_residual);
  j["pass"] = rep.pass;
  Json cases = Json::array();
  for (const auto& c : rep.per_case) {
    Json cc;
    cc["label"] = c.label;
    cc["residual"] = finite_or_cap(c.residual);
    cc["pass"] = c.pass;
    cases.push_back(cc);
  }
  j["per_case"] = cases;
  j["meta"] = meta_to_json(meta);
  return j.dump(2) + "\n";
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp + "' for write");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("rename failed for '" + path + "'");
}

}  // namespace spincm
