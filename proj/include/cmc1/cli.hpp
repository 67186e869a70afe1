/**
 * @file cli.hpp
 * @brief Job-level front end shared by the command-line binary and the
 *        tests: flat key-value job configs, dispatch onto the module
 *        operations, artifact export, and a deterministic verification
 *        battery.
 *
 * A job is a flat string-to-string map.  The command-line binary fills the
 * map from a config file plus flag overrides and calls run_job, which
 * returns the process exit status: 0 when every tolerance gate passes,
 * 2 on a tolerance failure, while input errors surface as typed exceptions
 * (the binary maps them to status 1).  All artifact paths are explicit;
 * nothing is written unless a path key is present.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "cmc1/bryant.hpp"
#include "cmc1/exprlang.hpp"
#include "cmc1/liouville.hpp"
#include "cmc1/mesh.hpp"
#include "json.hpp"

namespace cmc1 {

/// Flat job description; see run_job for the recognized keys per job kind.
using JobConfig = std::map<std::string, std::string>;

// ---------------------------------------------------------------------------
// Config file format: one `key = value` per line, `#` comments, values
// optionally double-quoted (serialization always quotes, so expressions
// survive round-trips verbatim).
// ---------------------------------------------------------------------------

namespace detail {

inline std::string escape_config_value(const std::string& v) {
  std::string out;
  out.reserve(v.size() + 2);
  for (char ch : v) {
    if (ch == '"' || ch == '\\') out.push_back('\\');
    out.push_back(ch);
  }
  return out;
}

inline std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline JobConfig parse_job_config(const std::string& text) {
  JobConfig cfg;
  size_t pos = 0;
  int lineno = 0;
  while (pos <= text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string raw = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    const std::string line = detail::trim(raw);
    if (line.empty() || line[0] == '#') {
      if (pos > text.size()) break;
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument("config line " + std::to_string(lineno) +
                            ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    if (key.empty())
      throw InvalidArgument("config line " + std::to_string(lineno) +
                            ": empty key");
    std::string value = detail::trim(line.substr(eq + 1));
    if (!value.empty() && value[0] == '"') {
      std::string unescaped;
      bool closed = false;
      for (size_t i = 1; i < value.size(); ++i) {
        if (value[i] == '\\' && i + 1 < value.size()) {
          unescaped.push_back(value[++i]);
        } else if (value[i] == '"') {
          closed = i + 1 == value.size();
          break;
        } else {
          unescaped.push_back(value[i]);
        }
      }
      if (!closed)
        throw InvalidArgument("config line " + std::to_string(lineno) +
                              ": unterminated quoted value");
      value = unescaped;
    }
    cfg[key] = value;
    if (pos > text.size()) break;
  }
  return cfg;
}

inline std::string serialize_job_config(const JobConfig& cfg) {
  std::string out;
  for (const auto& [key, value] : cfg)
    out += key + " = \"" + detail::escape_config_value(value) + "\"\n";
  return out;
}

inline JobConfig load_job_config(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw IoError("config: cannot open '" + path + "'");
  std::string text;
  char buf[1 << 14];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) text.append(buf, n);
  std::fclose(f);
  return parse_job_config(text);
}

// ---------------------------------------------------------------------------
// Typed config accessors (missing required keys and malformed numbers are
// input errors).
// ---------------------------------------------------------------------------

inline std::string cfg_string(const JobConfig& cfg, const std::string& key,
                              std::optional<std::string> fallback = {}) {
  const auto it = cfg.find(key);
  if (it != cfg.end()) return it->second;
  if (fallback) return *fallback;
  throw InvalidArgument("config: missing required key '" + key + "'");
}

inline double cfg_number(const JobConfig& cfg, const std::string& key,
                         std::optional<double> fallback = {}) {
  const auto it = cfg.find(key);
  if (it == cfg.end()) {
    if (fallback) return *fallback;
    throw InvalidArgument("config: missing required key '" + key + "'");
  }
  const char* p = it->second.c_str();
  char* stop = nullptr;
  const double v = std::strtod(p, &stop);
  if (stop == p || *stop != '\0')
    throw InvalidArgument("config: key '" + key + "' is not a number: '" +
                          it->second + "'");
  return v;
}

inline int cfg_integer(const JobConfig& cfg, const std::string& key,
                       std::optional<int> fallback = {}) {
  const double v = cfg_number(cfg, key,
                              fallback ? std::optional<double>(*fallback)
                                       : std::nullopt);
  const int i = static_cast<int>(std::llround(v));
  if (std::abs(v - i) > 0.0)
    throw InvalidArgument("config: key '" + key + "' is not an integer");
  return i;
}

inline std::optional<double> cfg_optional_number(const JobConfig& cfg,
                                                 const std::string& key) {
  if (cfg.find(key) == cfg.end()) return std::nullopt;
  return cfg_number(cfg, key);
}

inline AnalyticMap cfg_expression(const JobConfig& cfg, const std::string& key,
                                  std::optional<std::string> fallback = {}) {
  const std::string text = cfg_string(cfg, key, std::move(fallback));
  return parse_map(text, "s");
}

/// Rectangle from rect_smin/rect_smax/rect_tmin/rect_tmax (all four or none).
inline Rect cfg_rect(const JobConfig& cfg, const Rect& fallback) {
  const int present = int(cfg.count("rect_smin")) + int(cfg.count("rect_smax")) +
                      int(cfg.count("rect_tmin")) + int(cfg.count("rect_tmax"));
  if (present == 0) return fallback;
  if (present != 4)
    throw InvalidArgument(
        "config: rect_smin/rect_smax/rect_tmin/rect_tmax must be given "
        "together");
  Rect r{cfg_number(cfg, "rect_smin"), cfg_number(cfg, "rect_smax"),
         cfg_number(cfg, "rect_tmin"), cfg_number(cfg, "rect_tmax")};
  if (!(r.s_min < r.s_max) || !(r.t_min <= r.t_max))
    throw InvalidArgument("config: malformed rectangle");
  return r;
}

namespace detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline CurveMap cfg_curve(const JobConfig& cfg, const std::string& prefix) {
  return CurveMap(cfg_expression(cfg, prefix + "0"),
                  cfg_expression(cfg, prefix + "1"),
                  cfg_expression(cfg, prefix + "2"),
                  cfg_expression(cfg, prefix + "3"));
}

/// Common tail of the surface jobs: verified mesh, optional artifacts,
/// tolerance gates.
inline int finish_surface_job(const JobConfig& cfg, std::ostream& out,
                              const BjorlingSolution& sol,
                              const BjorlingData& data, const Rect& rect,
                              int ns, int nt) {
  const MeshGrid grid = sample_mesh(sol.surface, rect, ns, nt);
  const double residual = data_residual(sol.surface, data);
  out << "grid: " << ns << "x" << nt << " on [" << num(rect.s_min) << ", "
      << num(rect.s_max) << "] x [" << num(rect.t_min) << ", "
      << num(rect.t_max) << "]\n";
  out << "masked vertices: " << grid.masked_count() << "\n";
  if (grid.stitched) out << "seam: stitched\n";
  out << "max |H - 1|: " << num(sol.sample.max_mean_deviation()) << "\n";
  out << "max |<psi,psi> + 1|: " << num(sol.sample.max_membership()) << "\n";
  out << "boundary residual: " << num(residual) << "\n";
  if (grid.curvature_valid) {
    out << "total curvature: " << num(grid.total_curvature) << "\n";
    out << "dual total curvature: " << num(grid.dual_total_curvature) << "\n";
  }
  if (cfg.count("export")) {
    const MeshFormat fmt = mesh_format_from_string(cfg_string(cfg, "export"));
    const std::string path = cfg_string(cfg, "out");
    export_mesh(grid, fmt, path);
    out << "wrote " << cfg_string(cfg, "export") << ": " << path << "\n";
  }
  if (cfg.count("report")) {
    const std::string path = cfg_string(cfg, "report");
    export_mesh(grid, MeshFormat::json_report, path);
    out << "wrote json-report: " << path << "\n";
  }
  const bool ok = sol.sample.max_mean_deviation() <= 1e-6 &&
                  sol.sample.max_membership() <= 1e-9 && residual <= 1e-6;
  out << "verdict: " << (ok ? "pass" : "tolerance failure") << "\n";
  return ok ? 0 : 2;
}

inline int run_liouville(const JobConfig& cfg, std::ostream& out,
                         const std::string& route) {
  const AnalyticMap a = cfg_expression(cfg, "a");
  const AnalyticMap d = cfg_expression(cfg, "d", std::string("0"));
  const double s_min = cfg_number(cfg, "smin", -1.0);
  const double s_max = cfg_number(cfg, "smax", 1.0);
  LiouvilleSolution sol = [&] {
    if (route == "analytic" || route == "geometric") {
      const double c = cfg_number(cfg, "c", 1.0);
      const auto data = LiouvilleCauchyData::from_slope(a, d, c, s_min, s_max);
      return route == "analytic" ? solve_cauchy_analytic(data)
                                 : solve_cauchy_geometric(data);
    }
    if (route == "degenerate") return solve_degenerate(a, d, s_min, s_max);
    if (route == "lightcone")
      return solve_cauchy_lightcone(a, d, s_min, s_max).solution;
    throw InvalidArgument("unknown liouville route '" + route + "'");
  }();

  const Rect rect = cfg_rect(cfg, Rect{s_min, s_max, -0.8, 0.8});
  const int ns = cfg_integer(cfg, "ns", 41);
  const int nt = cfg_integer(cfg, "nt", 21);
  const double residual =
      sol.max_interior_residual(rect, std::min(ns, 9), std::min(nt, 9));
  const double bval = sol.max_boundary_value_error(65);
  const double bslope = sol.max_boundary_slope_error(65);
  out << "job: liouville-" << route << "\n";
  out << "interval: [" << num(s_min) << ", " << num(s_max) << "]\n";
  out << "interior residual: " << num(residual) << "\n";
  out << "boundary value error: " << num(bval) << "\n";
  out << "boundary slope error: " << num(bslope) << "\n";

  if (cfg.count("out")) {
    const auto grid = sol.sample(rect, ns, nt);
    std::string csv = "s,t,phi\n";
    for (int it = 0; it < nt; ++it)
      for (int is = 0; is < ns; ++is) {
        const auto& cell = grid.at(is, it);
        if (cell.masked) continue;
        csv += fmt17(grid.s(is)) + "," + fmt17(grid.t(it)) + "," +
               fmt17(cell.value.real()) + "\n";
      }
    write_file_atomic(cfg_string(cfg, "out"), csv);
    out << "wrote csv: " << cfg_string(cfg, "out") << "\n";
  }

  const double res_tol = route == "degenerate" ? 1e-8 : 1e-6;
  const bool ok = residual <= res_tol && bval <= 1e-8 && bslope <= 1e-6;
  out << "verdict: " << (ok ? "pass" : "tolerance failure") << "\n";
  return ok ? 0 : 2;
}

inline int run_bjorling(const JobConfig& cfg, std::ostream& out) {
  const CurveMap beta = cfg_curve(cfg, "beta");
  const CurveMap v = cfg_curve(cfg, "v");
  const double s_min = cfg_number(cfg, "smin");
  const double s_max = cfg_number(cfg, "smax");
  const BjorlingData data(beta, v, s_min, s_max,
                          cfg_optional_number(cfg, "period"));
  const Rect rect = cfg_rect(cfg, Rect{s_min, s_max, -1.0, 1.0});
  const int ns = cfg_integer(cfg, "ns", 41);
  const int nt = cfg_integer(cfg, "nt", 21);
  out << "job: bjorling\n";
  const BjorlingSolution sol = solve_bjorling(data, rect, ns, nt);
  if (sol.surface.horosphere()) out << "surface: horosphere (umbilic)\n";
  return finish_surface_job(cfg, out, sol, data, rect, ns, nt);
}

inline int run_geodesic_route(const JobConfig& cfg, std::ostream& out,
                              bool pregeodesic) {
  const CurveMap beta = cfg_curve(cfg, "beta");
  const int sign = cfg_integer(cfg, "sign", 1);
  const double s_min = cfg_number(cfg, "smin");
  const double s_max = cfg_number(cfg, "smax");
  const auto period = cfg_optional_number(cfg, "period");
  const BjorlingData data =
      pregeodesic ? pregeodesic_data(beta, sign, s_min, s_max, period)
                  : planar_geodesic_data(beta, sign, s_min, s_max, period);
  const Rect rect = cfg_rect(cfg, Rect{s_min, s_max, -1.0, 1.0});
  const int ns = cfg_integer(cfg, "ns", 41);
  const int nt = cfg_integer(cfg, "nt", 21);
  out << "job: " << (pregeodesic ? "pregeodesic" : "planar-geodesic") << "\n";
  const BjorlingSolution sol =
      pregeodesic
          ? solve_bjorling(data, rect, ns, nt)
          : planar_geodesic_surface(beta, sign, s_min, s_max, period, rect,
                                    ns, nt);
  return finish_surface_job(cfg, out, sol, data, rect, ns, nt);
}

inline int run_gallery(const JobConfig& cfg, std::ostream& out) {
  const std::string name = cfg_string(cfg, "gallery");
  GalleryResult entry;
  Rect fallback{};
  if (name == "catenoid-cousin") {
    entry = gallery_catenoid_cousin(cfg_number(cfg, "b", 0.75),
                                    cfg_integer(cfg, "eps", 1));
    fallback = Rect{0.0, 2.0 * kPi, -2.0, 2.0};
  } else if (name == "hyperbolic-invariant") {
    entry = gallery_hyperbolic_invariant(
        cfg_number(cfg, "a"), cfg_number(cfg, "b"), cfg_number(cfg, "c"),
        cfg_number(cfg, "d"), cfg_number(cfg, "lambda"));
    fallback = Rect{-1.5, 1.5, -0.5, 0.5};
  } else if (name == "helicoid") {
    entry = gallery_helicoid(cfg_number(cfg, "alpha"), cfg_number(cfg, "phi"),
                             cfg_number(cfg, "c"), cfg_number(cfg, "b"));
    fallback = Rect{0.0, 2.0, -0.3, 0.3};
  } else {
    throw InvalidArgument(
        "unknown gallery entry '" + name +
        "' (expected catenoid-cousin|hyperbolic-invariant|helicoid)");
  }
  out << "job: gallery\n";
  out << "entry: " << entry.name << "\n";
  for (const auto& [key, value] : entry.params)
    out << "  " << key << " = " << num(value) << "\n";
  out << "k = " << num(entry.k) << "\n";
  out << "k1 = " << num(entry.k1.real()) << " + " << num(entry.k1.imag())
      << "i\n";
  if (entry.period) out << "period = " << num(*entry.period) << "\n";
  if (entry.horosphere) {
    out << "verdict: horosphere (umbilic limit); no strip to solve\n";
    return 0;
  }
  const Rect rect = cfg_rect(cfg, fallback);
  const int ns = cfg_integer(cfg, "ns", 41);
  const int nt = cfg_integer(cfg, "nt", 21);
  const BjorlingSolution sol = gallery_surface(entry, rect, ns, nt);
  return finish_surface_job(cfg, out, sol, *entry.data, rect, ns, nt);
}

inline int run_holonomy(const JobConfig& cfg, std::ostream& out) {
  const AnalyticMap kappa = cfg_expression(cfg, "kappa");
  const AnalyticMap uprime =
      cfg_expression(cfg, "uprime", std::string("1"));
  const double T = cfg_number(cfg, "T");
  const int q_max = cfg_integer(cfg, "qmax", 64);
  const double rational_tol = cfg_number(cfg, "rational_tol", 1e-6);
  const HolonomyResult res =
      holonomy_S2(uprime, kappa, T, {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}},
                  q_max, rational_tol);
  out << "job: holonomy\n";
  out << "theta = " << num(res.theta) << "\n";
  out << "theta / (2 pi) = " << num(res.theta / (2.0 * kPi)) << "\n";
  out << "orthogonality error: " << num(res.orthogonality_error) << "\n";
  out << "verdict: " << res.verdict << "\n";
  if (cfg.count("out")) {
    nlohmann::json j;
    j["theta"] = res.theta;
    j["closes"] = res.closes;
    j["folds"] = res.folds;
    j["verdict"] = res.verdict;
    j["orthogonality_error"] = res.orthogonality_error;
    write_file_atomic(cfg_string(cfg, "out"), j.dump(2) + "\n");
    out << "wrote json: " << cfg_string(cfg, "out") << "\n";
  }
  const bool ok = res.orthogonality_error <= 1e-6;
  if (!ok) out << "tolerance failure: holonomy frame drifted\n";
  return ok ? 0 : 2;
}

}  // namespace detail

inline int run_verify(const JobConfig& cfg, std::ostream& out);

/// Dispatch a job map onto the module operations.  Returns the exit status
/// (0 pass, 2 tolerance failure); input errors throw typed exceptions.
inline int run_job(const JobConfig& cfg, std::ostream& out) {
  const std::string job = cfg_string(cfg, "job");
  if (job.rfind("liouville-", 0) == 0)
    return detail::run_liouville(cfg, out, job.substr(10));
  if (job == "bjorling") return detail::run_bjorling(cfg, out);
  if (job == "planar-geodesic") return detail::run_geodesic_route(cfg, out, false);
  if (job == "pregeodesic") return detail::run_geodesic_route(cfg, out, true);
  if (job == "gallery") return detail::run_gallery(cfg, out);
  if (job == "holonomy") return detail::run_holonomy(cfg, out);
  if (job == "verify") return run_verify(cfg, out);
  throw InvalidArgument("unknown job kind '" + job + "'");
}

// ---------------------------------------------------------------------------
// Verification battery: a fast deterministic pass over the module-level
// closed-form oracles.  Writes a JSON summary when `out` names a path.
// ---------------------------------------------------------------------------

inline int run_verify(const JobConfig& cfg, std::ostream& out) {
  struct Check {
    std::string name;
    double value;
    double threshold;
  };
  std::vector<Check> checks;
  const auto add = [&checks](const std::string& name, double value,
                             double threshold) {
    checks.push_back({name, value, threshold});
  };

  // Liouville closed form and route agreement.
  {
    const auto data = LiouvilleCauchyData::from_slope(
        map_constant(1.0), map_constant(0.0), 1.0, -1.0, 1.0);
    const auto sa = solve_cauchy_analytic(data);
    const auto sg = solve_cauchy_geometric(data);
    double werr = 0.0, wgap = 0.0;
    for (int i = 0; i < 9; ++i)
      for (int j = 0; j < 9; ++j) {
        const double s = -1.0 + 2.0 * i / 8.0;
        const double t = -0.8 + 1.6 * j / 8.0;
        const double want = 1.0 / std::pow(std::cosh(t), 2);
        werr = std::max(werr, std::abs(sa.phi(s, t) - want));
        wgap = std::max(wgap, std::abs(sa.phi(s, t) - sg.phi(s, t)));
      }
    add("liouville-sech2-closed-form", werr, 1e-9);
    add("liouville-route-agreement", wgap, 1e-8);
  }

  // Oracle triangle on a generic battery point.
  {
    const AnalyticMap a = parse_map("2 + sin(s)", "s");
    const AnalyticMap d = parse_map("cos(s)", "s");
    const auto data = LiouvilleCauchyData::from_slope(a, d, 1.0, -1.0, 1.0);
    const auto sa = solve_cauchy_analytic(data);
    const auto sg = solve_cauchy_geometric(data);
    const auto sl = solve_cauchy_lightcone(a, d, -1.0, 1.0).solution;
    double tri = 0.0;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        const double s = -0.5 + 1.0 * i / 4.0;
        const double t = -0.4 + 0.8 * j / 4.0;
        const double pa = sa.phi(s, t);
        tri = std::max({tri, std::abs(pa - sg.phi(s, t)),
                        std::abs(pa - sl.phi(s, t))});
      }
    add("liouville-oracle-triangle", tri, 1e-7);
    add("liouville-interior-residual",
        sa.max_interior_residual(Rect{-0.5, 0.5, -0.4, 0.4}, 5, 5), 1e-6);
  }

  // Degenerate closed forms (c = 0, log phi harmonic).
  {
    const auto s1 = solve_degenerate(map_constant(1.0), map_constant(0.0),
                                     -1.0, 1.0);
    const auto s2 = solve_degenerate(parse_map("exp(2*s)", "s"),
                                     map_constant(0.0), -1.0, 1.0);
    const auto s3 = solve_degenerate(map_constant(1.0), map_constant(2.0),
                                     -1.0, 1.0);
    double werr = 0.0;
    for (int i = 0; i < 5; ++i) {
      const double s = -0.5 + 1.0 * i / 4.0, t = 0.3 - 0.15 * i;
      werr = std::max(werr, std::abs(s1.phi(s, t) - 1.0));
      werr = std::max(werr, std::abs(s2.phi(s, t) - std::exp(2.0 * s)));
      werr = std::max(werr, std::abs(s3.phi(s, t) - std::exp(2.0 * t)));
    }
    add("liouville-degenerate-closed-forms", werr, 1e-10);
    add("liouville-degenerate-harmonic-residual",
        s2.max_interior_residual(Rect{-0.5, 0.5, -0.4, 0.4}, 5, 5), 1e-8);
  }

  // Rotational gallery surface: closed forms, verified strip, symmetry,
  // periodicity, two-route agreement.
  {
    const auto entry = gallery_catenoid_cousin(0.75, 1);
    double gerr = std::abs(entry.k - 2.0);
    for (int i = 0; i < 7; ++i) {
      const complex z(2.0 * kPi * i / 6.0, 0.1 * (i % 3 - 1));
      gerr = std::max(gerr, std::abs(entry.G.value(z) -
                                     std::exp(complex(0.0, -1.0) * z)));
      gerr = std::max(gerr, std::abs(entry.q.value(z) - complex(-0.75)));
      gerr = std::max(gerr, std::abs(entry.g.value(z) -
                                     std::exp(complex(0.0, 2.0) * z)));
    }
    add("gallery-rotational-closed-forms", gerr, 1e-8);

    const Rect rect{0.0, 2.0 * kPi, -0.5, 0.5};
    const auto sol = solve_bjorling(*entry.data, rect, 21, 9);
    add("surface-mean-curvature", sol.sample.max_mean_deviation(), 1e-6);
    add("surface-membership", sol.sample.max_membership(), 1e-9);
    add("surface-boundary-residual",
        data_residual(sol.surface, *entry.data), 1e-7);

    const BryantSurface lift = sol.surface.lift_route();
    double gap = 0.0;
    for (int i = 0; i < 7; ++i)
      for (int j = 0; j < 3; ++j) {
        const double s = 2.0 * kPi * i / 6.0, t = -0.4 + 0.4 * j;
        gap = std::max(gap,
                       euclid_norm(sol.surface.psi(s, t) - lift.psi(s, t)));
      }
    add("surface-two-route-agreement", gap, 1e-7);

    const double del = 0.5;
    const SL2C rot{std::exp(complex(0.0, del / 2)), complex(0.0),
                   complex(0.0), std::exp(complex(0.0, -del / 2))};
    add("surface-rotation-symmetry",
        symmetry_check(sol.surface, rot,
                       map_add(map_identity(), map_constant(complex(del))),
                       Rect{0.0, 2.0 * kPi - del, -0.3, 0.3}),
        1e-7);
    const auto rep = period_check(sol.surface);
    add("surface-period-deviation", rep.max_deviation, 1e-8);
    add("surface-lift-monodromy", rep.g_monodromy, 1e-8);

    // Mesh determinism and CSV round-trip (in memory; no files written).
    const MeshGrid grid = sample_mesh(sol.surface, rect, 17, 7);
    const std::string obj1 = detail::render_obj(grid);
    const std::string obj2 = detail::render_obj(grid);
    add("mesh-deterministic-bytes", obj1 == obj2 ? 0.0 : 1.0, 0.5);
    const auto rows = parse_mesh_csv(detail::render_csv(grid));
    double rerr = rows.empty() ? 1.0 : 0.0;
    size_t k = 0;
    for (const auto& v : grid.verts) {
      if (v.masked) continue;
      const MeshCsvRow want{v.s, v.t, v.position.x0, v.position.x1,
                            v.position.x2, v.position.x3, v.mean};
      for (int c2 = 0; c2 < 7; ++c2)
        rerr = std::max(rerr, std::abs(rows[k][c2] - want[c2]));
      ++k;
    }
    add("mesh-csv-round-trip", rerr, 1e-15);
  }

  // Translation-invariant gallery: dual metric closed form.
  {
    const double a = std::sqrt(2.0), b = 1.0, lam = 0.6, d = 0.8;
    const auto entry = gallery_hyperbolic_invariant(a, b, a * lam / b, d, lam);
    const auto sol =
        solve_bjorling(*entry.data, Rect{-1.0, 1.0, -0.2, 0.2}, 9, 5);
    const auto rep = metrics(sol.surface, Rect{-1.0, 1.0, 0.0, 1e-4}, 20, 2);
    double werr = 0.0;
    for (int i = 0; i < 20; ++i) {
      const double s = rep.s(i);
      const double want =
          std::norm((2.0 * entry.k + 1.0) / (4.0 * entry.k1)) *
          std::pow(1.0 + std::norm(entry.k1) * std::exp(-2.0 * s), 2) *
          std::exp(2.0 * s);
      werr = std::max(werr, std::abs(rep.at(i, 0).dual - want));
    }
    add("gallery-invariant-dual-density", werr, 1e-9);
    add("gallery-invariant-horosphere-flag",
        gallery_hyperbolic_invariant(1.0, 0.0, 0.0, 1.0, -1.0).horosphere
            ? 0.0
            : 1.0,
        0.5);
  }

  // Helix gallery: Gauss map rate and constant Hopf coefficient.
  {
    const auto entry = gallery_helicoid(0.8, 0.4, std::sqrt(2.0), 1.0);
    const AnalyticMap G = hyperbolic_gauss(*entry.data);
    const AnalyticMap q = hopf_q(*entry.data);
    const complex q0 = q.value(complex(0.0));
    double gerr = 0.0, qdev = 0.0;
    for (int i = 0; i <= 8; ++i) {
      const double s = -1.0 + 2.0 * i / 8.0;
      gerr = std::max(gerr, std::abs(G.value(complex(s)) -
                                     entry.G.value(complex(s))));
      qdev = std::max(qdev, std::abs(q.value(complex(s)) - q0));
    }
    add("gallery-helix-gauss-map", gerr, 1e-8);
    add("gallery-helix-hopf-constant", qdev, 1e-9);
  }

  // Holonomy oracles.
  {
    const auto res =
        holonomy_S2(map_constant(1.0), map_constant(std::sqrt(3.0)),
                    2.0 * kPi);
    add("holonomy-sqrt3-closes",
        res.closes && res.folds == 1 ? 0.0 : 1.0, 0.5);
    const auto r1 = holonomy_S2(map_constant(1.0), map_constant(1.0),
                                2.0 * kPi);
    const double want = 2.0 * kPi * (std::sqrt(2.0) - 1.0);
    const double gap = std::min(std::abs(r1.theta - want),
                                2.0 * kPi - std::abs(r1.theta - want));
    add("holonomy-angle-oracle", gap, 1e-6);
  }

  // Expression language: print/parse round-trip and jet consistency.
  {
    const char* samples[] = {"(1 + s^2) / (3 - s)", "exp(2*s) * sin(s)",
                             "sqrt(4 + cos(s)^2)", "2 + sin(s) - s/5"};
    double worst = 0.0;
    for (const char* text : samples) {
      const Expr e = parse_expr(text, "s");
      const Expr back = parse_expr(e.print(), "s");
      if (!Expr::identical(e, back)) worst = std::max(worst, 1.0);
      const double h = 1e-5;
      for (double s : {0.3, 1.1}) {
        const double fd = ((e.eval(complex(s + h)) - e.eval(complex(s - h))) /
                           (2.0 * h))
                              .real();
        const double jd = e.eval_jet(complex(s), 1).derivative(1).real();
        worst = std::max(worst,
                         std::abs(fd - jd) / std::max(1.0, std::abs(jd)));
      }
    }
    add("exprlang-round-trip-and-jets", worst, 1e-7);
  }

  bool all_pass = true;
  nlohmann::json summary;
  summary["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    const bool pass = c.value <= c.threshold;
    all_pass = all_pass && pass;
    out << (pass ? "[ok]   " : "[FAIL] ") << c.name << ": "
        << detail::num(c.value) << " (tolerance " << detail::num(c.threshold)
        << ")\n";
    summary["checks"].push_back({{"name", c.name},
                                 {"value", c.value},
                                 {"threshold", c.threshold},
                                 {"pass", pass}});
  }
  summary["all_pass"] = all_pass;
  out << "verify: " << (all_pass ? "all checks passed" : "FAILURES present")
      << "\n";
  if (cfg.count("out")) {
    detail::write_file_atomic(cfg_string(cfg, "out"),
                              summary.dump(2) + "\n");
    out << "wrote json: " << cfg_string(cfg, "out") << "\n";
  }
  return all_pass ? 0 : 2;
}

}  // namespace cmc1
