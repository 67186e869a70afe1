/**
 * @file cmc1_cli.cpp
 * @brief Command-line binary: maps subcommands and flags onto a flat job
 *        config and dispatches it through run_job.
 *
 * Exit status: 0 when every tolerance gate passes, 2 on a tolerance
 * failure, 1 on any input error (bad flags, malformed config, violated
 * operation preconditions, I/O failures).
 */
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cmc1/cli.hpp"

namespace {

/// Bind --flag on cmd to cfg[key] (stored as the raw string).
void bind_flag(CLI::App* cmd, cmc1::JobConfig& cfg, const std::string& flag,
          const std::string& key, const std::string& desc) {
  cmd->add_option_function<std::string>(
      flag, [&cfg, key](const std::string& v) { cfg[key] = v; }, desc);
}

/// Bind --rect smin smax tmin tmax.
void bind_rect(CLI::App* cmd, cmc1::JobConfig& cfg) {
  cmd->add_option_function<std::vector<std::string>>(
         "--rect",
         [&cfg](const std::vector<std::string>& v) {
           cfg["rect_smin"] = v[0];
           cfg["rect_smax"] = v[1];
           cfg["rect_tmin"] = v[2];
           cfg["rect_tmax"] = v[3];
         },
         "evaluation rectangle: smin smax tmin tmax")
      ->expected(4);
}

void bind_grid(CLI::App* cmd, cmc1::JobConfig& cfg) {
  bind_flag(cmd, cfg, "--ns", "ns", "grid points along s");
  bind_flag(cmd, cfg, "--nt", "nt", "grid points along t");
}

void bind_artifacts(CLI::App* cmd, cmc1::JobConfig& cfg) {
  bind_flag(cmd, cfg, "--export", "export",
       "mesh format: obj|ply|csv|json-report (requires --out)");
  bind_flag(cmd, cfg, "--out", "out", "output path for the exported artifact");
  bind_flag(cmd, cfg, "--report", "report", "path for a json-report artifact");
}

void bind_curve(CLI::App* cmd, cmc1::JobConfig& cfg, const std::string& prefix,
                const std::string& what) {
  for (int k = 0; k < 4; ++k)
    bind_flag(cmd, cfg, "--" + prefix + std::to_string(k),
         prefix + std::to_string(k),
         what + " component x" + std::to_string(k) + " (expression in s)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mean-curvature-one surface toolkit"};
  app.require_subcommand(0, 1);

  std::string config_path;
  app.add_option("--config", config_path, "flat key-value job file");
  std::vector<std::string> overrides;
  app.add_option("--set", overrides, "extra key=value overrides");

  cmc1::JobConfig flags;

  auto* liou = app.add_subcommand("liouville", "strip Cauchy problem");
  liou->fallthrough();
  liou->require_subcommand(1);
  for (const std::string route :
       {"analytic", "geometric", "degenerate", "lightcone"}) {
    auto* r = liou->add_subcommand(route, route + std::string(" route"));
    r->fallthrough();
    r->callback([&flags, route] { flags["job"] = "liouville-" + route; });
    bind_flag(r, flags, "--a", "a", "boundary value a(s) > 0 (expression)");
    bind_flag(r, flags, "--d", "d", "boundary slope d(s) (expression)");
    if (route == "analytic" || route == "geometric")
      bind_flag(r, flags, "--c", "c", "curvature constant (nonzero)");
    bind_flag(r, flags, "--smin", "smin", "interval start");
    bind_flag(r, flags, "--smax", "smax", "interval end");
    bind_rect(r, flags);
    bind_grid(r, flags);
    bind_flag(r, flags, "--out", "out", "CSV output path (s,t,phi)");
  }

  auto* bjor = app.add_subcommand("bjorling", "surface from curve + normal");
  bjor->fallthrough();
  bjor->callback([&flags] { flags["job"] = "bjorling"; });
  bind_curve(bjor, flags, "beta", "curve");
  bind_curve(bjor, flags, "v", "unit normal field");
  bind_flag(bjor, flags, "--smin", "smin", "interval start");
  bind_flag(bjor, flags, "--smax", "smax", "interval end");
  bind_flag(bjor, flags, "--period", "period", "period of the data (optional)");
  bind_rect(bjor, flags);
  bind_grid(bjor, flags);
  bind_artifacts(bjor, flags);

  for (const std::string kind : {"planar-geodesic", "pregeodesic"}) {
    auto* cmd = app.add_subcommand(
        kind, kind == "planar-geodesic"
                  ? "surface meeting the plane of the curve orthogonally"
                  : "surface containing the curve as a geodesic");
    cmd->fallthrough();
    cmd->callback([&flags, kind] { flags["job"] = kind; });
    bind_curve(cmd, flags, "beta", "curve");
    bind_flag(cmd, flags, "--sign", "sign", "normal orientation: 1 or -1");
    bind_flag(cmd, flags, "--smin", "smin", "interval start");
    bind_flag(cmd, flags, "--smax", "smax", "interval end");
    bind_flag(cmd, flags, "--period", "period", "period of the data (optional)");
    bind_rect(cmd, flags);
    bind_grid(cmd, flags);
    bind_artifacts(cmd, flags);
  }

  auto* gal = app.add_subcommand("gallery", "closed-form example families");
  gal->fallthrough();
  gal->callback([&flags] { flags["job"] = "gallery"; });
  gal->add_option_function<std::string>(
      "name", [&flags](const std::string& v) { flags["gallery"] = v; },
      "catenoid-cousin | hyperbolic-invariant | helicoid");
  for (const char* p : {"b", "eps", "a", "c", "d", "lambda", "alpha", "phi"})
    bind_flag(gal, flags, std::string("--") + p, p, std::string("parameter ") + p);
  bind_rect(gal, flags);
  bind_grid(gal, flags);
  bind_artifacts(gal, flags);

  auto* hol = app.add_subcommand("holonomy", "sphere-curve frame holonomy");
  hol->fallthrough();
  hol->callback([&flags] { flags["job"] = "holonomy"; });
  bind_flag(hol, flags, "--kappa", "kappa", "geodesic curvature (expression)");
  bind_flag(hol, flags, "--uprime", "uprime", "speed u'(s) > 0 (expression)");
  bind_flag(hol, flags, "--T", "T", "period of the data");
  bind_flag(hol, flags, "--qmax", "qmax", "largest fold count tested");
  bind_flag(hol, flags, "--rational-tol", "rational_tol",
       "closure tolerance on theta/(2 pi)");
  bind_flag(hol, flags, "--out", "out", "JSON output path");

  auto* ver = app.add_subcommand("verify", "deterministic invariant battery");
  ver->fallthrough();
  ver->callback([&flags] { flags["job"] = "verify"; });
  bind_flag(ver, flags, "--out", "out", "JSON summary path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    cmc1::JobConfig cfg;
    if (!config_path.empty()) cfg = cmc1::load_job_config(config_path);
    for (const auto& [key, value] : flags) cfg[key] = value;
    for (const std::string& kv : overrides) {
      const size_t eq = kv.find('=');
      if (eq == std::string::npos || eq == 0)
        throw cmc1::InvalidArgument("--set expects key=value, got '" + kv +
                                    "'");
      cfg[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    if (cfg.find("job") == cfg.end()) {
      std::cerr << "error: no job given (pass a subcommand or a --config "
                   "file with a job key)\n";
      return 1;
    }
    return cmc1::run_job(cfg, std::cout);
  } catch (const cmc1::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
