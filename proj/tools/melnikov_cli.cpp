#include "melnikov/config.hpp"
#include "melnikov/melnikov.hpp"
#include "melnikov/report.hpp"
#include "melnikov/separatrix.hpp"
#include "melnikov/verify.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace melnikov;

namespace {

enum ExitCode { kOk = 0, kParse = 2, kNumeric = 3, kThreshold = 4 };

struct Common {
  std::string config;
  std::vector<double> tau, action, angle, eta, eps;
  std::optional<double> tol, newton_tol, horizon_c;
  std::optional<std::string> format, output;
  std::optional<int> grid_points;
  std::optional<double> min_slope, max_rel_error, max_gap;
};

struct Context {
  RunConfig run;
  SystemConfig sys;
  SeparatrixOrbit orb;
  Common opt;

  Vec pick(const std::vector<double>& cli, const std::optional<std::vector<double>>& file, int dim,
           const Vec& dflt, const char* name) const {
    std::vector<double> v = !cli.empty() ? cli : file ? *file : std::vector<double>{};
    if (v.empty()) return dflt;
    if (v.size() == 1 && dim > 1) v.assign(dim, v[0]);
    if (static_cast<int>(v.size()) != dim)
      throw ConfigError("expected " + std::to_string(dim) + " values", std::string("--") + name);
    return Eigen::Map<const Vec>(v.data(), dim);
  }

  Vec tau() const {
    return pick(opt.tau, run.run.tau, sys.layout().n, Vec::Zero(sys.layout().n), "tau");
  }
  Phase phase() const {
    const Layout L = sys.layout();
    return {pick(opt.action, run.run.action, L.d, Vec::Zero(L.d), "action"),
            pick(opt.angle, run.run.angle, L.d, Vec::Zero(L.d), "angle"),
            pick(opt.eta, run.run.eta, L.m, sys.clock.eta0(), "eta")};
  }
  std::vector<double> eps_list(std::vector<double> dflt) const {
    if (!opt.eps.empty()) return opt.eps;
    if (run.run.eps_list) return *run.run.eps_list;
    return dflt;
  }
  MelnikovOptions quad() const {
    MelnikovOptions m;
    m.tol = opt.tol.value_or(run.run.tol.value_or(m.tol));
    return m;
  }
  NewtonOptions newton() const {
    NewtonOptions n;
    n.tol = opt.newton_tol.value_or(run.run.newton_tol.value_or(n.tol));
    return n;
  }
  SeedGrid grid() const {
    SeedGrid g;
    if (run.run.grid) g = {run.run.grid->lo, run.run.grid->hi, run.run.grid->points};
    if (opt.grid_points) g.points = *opt.grid_points;
    return g;
  }
  ShootOptions shoot() const {
    ShootOptions s;
    s.horizon_c = opt.horizon_c.value_or(run.run.horizon_c.value_or(s.horizon_c));
    return s;
  }
  std::string format() const { return opt.format.value_or(run.run.format.value_or("json")); }
};

Context load(const Common& c) {
  Context ctx;
  ctx.opt = c;
  ctx.run = load_config(c.config);
  ctx.sys = ctx.run.finalized();
  ctx.orb = build_separatrix(ctx.sys.penduli);
  return ctx;
}

void emit(const Context& ctx, const std::string& text) {
  const std::optional<std::string> path = ctx.opt.output ? ctx.opt.output : ctx.run.run.output;
  if (!path || path->empty() || *path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(*path);
  if (!out) throw ConfigError("cannot write output file '" + *path + "'");
  out << text;
}

void emit_json(const Context& ctx, const std::string& command, Json result) {
  emit(ctx, envelope(command, ctx.run, std::move(result)).dump(2) + "\n");
}

int cmd_eval(const Context& ctx) {
  const Vec tau = ctx.tau();
  const Phase ph = ctx.phase();
  Json r;
  r["tau"] = to_json(tau);
  r["phase"] = to_json(ph);
  r["melnikov_vector"] = to_json(melnikov_vector(ctx.sys, ctx.orb, tau, ph, ctx.quad()));
  if (ctx.sys.perturbation.is_hamiltonian())
    r["melnikov_potential"] = to_json(melnikov_potential(ctx.sys, ctx.orb, tau, ph, ctx.quad()));
  else
    r["melnikov_potential"] = {{"available", false},
                               {"reason", "the perturbation is not Hamiltonian, so no potential exists"}};
  emit_json(ctx, "eval", r);
  return kOk;
}

int cmd_critical(const Context& ctx) {
  const Phase ph = ctx.phase();
  CriticalPoint c = !ctx.opt.tau.empty() || ctx.run.run.tau
                        ? find_critical_tau(ctx.sys, ctx.orb, ctx.tau(), ph, ctx.newton())
                        : locate_critical_tau(ctx.sys, ctx.orb, ph, ctx.grid(), ctx.newton());
  emit_json(ctx, "critical", to_json(c));
  return c.nondegenerate() ? kOk : kNumeric;
}

int cmd_reduced(const Context& ctx, const std::vector<double>& actions, const std::vector<double>& thetas,
                std::optional<double> min_gradient) {
  const Layout L = ctx.sys.layout();
  const Phase base = ctx.phase();
  std::vector<double> Is = actions.empty() ? std::vector<double>{base.action[0]} : actions;
  std::vector<double> ths = thetas.empty() ? std::vector<double>{base.angle[0]} : thetas;

  Json samples = Json::array();
  double cert = std::numeric_limits<double>::infinity();
  std::optional<Vec> guess;
  if (!ctx.opt.tau.empty() || ctx.run.run.tau) guess = ctx.tau();
  ReducedOptions ro;
  ro.newton = ctx.newton();
  for (double I : Is) {
    for (double th : ths) {
      const Vec a = Vec::Constant(L.d, I);
      const Vec t = Vec::Constant(L.d, th);
      const ReducedSample s = reduced_potential(ctx.sys, ctx.orb, a, t, guess, ro);
      guess = s.tau_star;
      cert = std::min(cert, s.dtheta.norm());
      samples.push_back(to_json(s));
    }
  }
  Json r;
  r["samples"] = samples;
  r["h4_certificate"] = {{"min_dtheta_norm", cert}, {"nondegenerate", cert > 0.0}};
  const bool pass = !min_gradient || cert >= *min_gradient;
  r["threshold"] = min_gradient ? Json({{"min_dtheta_norm", *min_gradient}, {"pass", pass}}) : Json(nullptr);
  emit_json(ctx, "reduced", r);
  return pass ? kOk : kThreshold;
}

bool slope_ok(const std::optional<OrderFit>& fit, const std::optional<double>& min_slope) {
  if (!min_slope) return true;
  return fit && fit->slope >= *min_slope;
}

int cmd_splitting(const Context& ctx) {
  const SplittingReport rep =
      measure_splitting(ctx.sys, ctx.orb, ctx.tau(), ctx.phase(), ctx.eps_list({1e-2, 5e-3, 2.5e-3, 1.25e-3}),
                        ctx.shoot());
  const bool pass = slope_ok(rep.fit, ctx.opt.min_slope);
  if (ctx.format() == "csv") {
    std::ostringstream os;
    write_splitting_csv(os, rep);
    emit(ctx, os.str());
  } else {
    Json r = to_json(rep);
    r["threshold"] = ctx.opt.min_slope ? Json({{"min_slope", *ctx.opt.min_slope}, {"pass", pass}}) : Json(nullptr);
    emit_json(ctx, "verify-splitting", r);
  }
  return pass ? kOk : kThreshold;
}

JumpReport run_jump(const Context& ctx, const std::vector<double>& eps) {
  const Phase ph = ctx.phase();
  const CriticalPoint c = !ctx.opt.tau.empty() || ctx.run.run.tau
                              ? find_critical_tau(ctx.sys, ctx.orb, ctx.tau(), ph, ctx.newton())
                              : locate_critical_tau(ctx.sys, ctx.orb, ph, ctx.grid(), ctx.newton());
  JumpOptions jo;
  jo.shoot = ctx.shoot();
  jo.reduced.newton = ctx.newton();
  return measure_jump(ctx.sys, ctx.orb, c, eps, jo);
}

bool jump_ok(const JumpReport& rep, const Common& opt) {
  bool ok = slope_ok(rep.fit, opt.min_slope);
  if (opt.max_rel_error)
    for (const JumpRow& row : rep.rows) ok = ok && row.relative_error <= *opt.max_rel_error;
  return ok;
}

int cmd_jump(const Context& ctx) {
  const JumpReport rep = run_jump(ctx, ctx.eps_list({4e-3, 2e-3, 1e-3, 5e-4}));
  const bool pass = jump_ok(rep, ctx.opt);
  if (ctx.format() == "csv") {
    std::ostringstream os;
    write_jump_csv(os, rep);
    emit(ctx, os.str());
  } else {
    Json r = to_json(rep);
    r["threshold"] = {{"min_slope", ctx.opt.min_slope ? Json(*ctx.opt.min_slope) : Json(nullptr)},
                      {"max_relative_error", ctx.opt.max_rel_error ? Json(*ctx.opt.max_rel_error) : Json(nullptr)},
                      {"pass", pass}};
    emit_json(ctx, "verify-jump", r);
  }
  return pass ? kOk : kThreshold;
}

int cmd_additivity(const Context& ctx, const std::vector<double>& spreads) {
  const int n = ctx.sys.layout().n;
  const Phase ph = ctx.phase();
  const double lp = ctx.orb.lambda_plus();
  std::vector<double> ds = spreads.empty() ? std::vector<double>{2, 4, 6, 8, 10, 15} : spreads;
  Json rows = Json::array();
  bool pass = true;
  for (double D : ds) {
    Vec tau(n);
    for (int i = 0; i < n; ++i) tau[i] = (i - 0.5 * (n - 1)) * D / lp;
    const ScalarValue g = additivity_gap(ctx.sys, ctx.orb, tau, ph, ctx.quad());
    const double bound = g.quad_error + g.tail_bound;
    rows.push_back({{"spread", D / lp}, {"tau", to_json(tau)}, {"gap", to_json(g)}, {"error_bound", bound}});
    if (ctx.opt.max_gap) pass = pass && g.value <= *ctx.opt.max_gap;
  }
  Json r;
  r["rows"] = rows;
  r["threshold"] = ctx.opt.max_gap ? Json({{"max_gap", *ctx.opt.max_gap}, {"pass", pass}}) : Json(nullptr);
  emit_json(ctx, "additivity", r);
  return pass ? kOk : kThreshold;
}

int cmd_sweep(const Context& ctx) {
  const SplittingReport split =
      measure_splitting(ctx.sys, ctx.orb, ctx.tau(), ctx.phase(), ctx.eps_list({1e-2, 5e-3, 2.5e-3, 1.25e-3}),
                        ctx.shoot());
  bool pass = slope_ok(split.fit, ctx.opt.min_slope);
  std::optional<JumpReport> jump;
  if (ctx.sys.perturbation.is_hamiltonian()) {
    jump = run_jump(ctx, ctx.eps_list({4e-3, 2e-3, 1e-3, 5e-4}));
    pass = pass && jump_ok(*jump, ctx.opt);
  }
  if (ctx.format() == "csv") {
    std::ostringstream os;
    os << "# splitting\n";
    write_splitting_csv(os, split);
    if (jump) {
      os << "# jump\n";
      write_jump_csv(os, *jump);
    }
    emit(ctx, os.str());
  } else {
    Json r;
    r["splitting"] = to_json(split);
    r["jump"] = jump ? to_json(*jump) : Json(nullptr);
    r["pass"] = pass;
    emit_json(ctx, "sweep", r);
  }
  return pass ? kOk : kThreshold;
}

int cmd_export(const Context& ctx, double s_max, double step) {
  std::ostringstream os;
  write_separatrix_csv(os, ctx.orb, s_max, step);
  emit(ctx, os.str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Melnikov vectors and potentials for penduli-rotator systems"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  Common common;
  std::vector<double> actions, thetas, spreads;
  std::optional<double> min_gradient;
  double s_max = 20.0, step = 0.01;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", common.config, "System configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--tau", common.tau, "Separatrix phases tau_i")->delimiter(',');
    sub->add_option("--action", common.action, "Actions I")->delimiter(',');
    sub->add_option("--angle", common.angle, "Angles phi")->delimiter(',');
    sub->add_option("--eta", common.eta, "Clock state (t for the affine clock)")->delimiter(',');
    sub->add_option("--tol", common.tol, "Total tolerance of each improper integral (default 1e-11)");
    sub->add_option("--newton-tol", common.newton_tol, "Newton tolerance on ||M(tau)|| (default 1e-10)");
    sub->add_option("--format", common.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("-o,--output", common.output, "Output path (stdout by default)");
  };
  auto add_grid = [&](CLI::App* sub) {
    sub->add_option("--grid-points", common.grid_points, "Seed grid points per dimension (default 8)")
        ->check(CLI::PositiveNumber);
  };
  auto add_shoot = [&](CLI::App* sub) {
    sub->add_option("--eps", common.eps, "Perturbation sizes")->delimiter(',');
    sub->add_option("--horizon-c", common.horizon_c, "Horizon constant c in T = c log(1/eps) / lambda (default 3)");
    sub->add_option("--min-slope", common.min_slope, "Fail with exit code 4 below this residual slope");
  };

  CLI::App* eval = app.add_subcommand("eval", "Melnikov vector and potential at one point");
  add_common(eval);
  CLI::App* critical = app.add_subcommand("critical", "Non-degenerate zero tau* of the Melnikov vector");
  add_common(critical);
  add_grid(critical);
  CLI::App* reduced = app.add_subcommand("reduced", "Reduced potential over an (I, theta) grid");
  add_common(reduced);
  add_grid(reduced);
  reduced->add_option("--actions", actions, "Action values (broadcast to all components)")->delimiter(',');
  reduced->add_option("--thetas", thetas, "Angle values (broadcast to all components)")->delimiter(',');
  reduced->add_option("--min-gradient", min_gradient, "Fail with exit code 4 when min ||d_theta|| is below");
  CLI::App* split = app.add_subcommand("verify-splitting", "Shooting measurement of the splitting");
  add_common(split);
  add_shoot(split);
  CLI::App* jump = app.add_subcommand("verify-jump", "Direct measurement of the action jump");
  add_common(jump);
  add_grid(jump);
  add_shoot(jump);
  jump->add_option("--max-rel-error", common.max_rel_error, "Fail with exit code 4 above this relative error");
  CLI::App* add = app.add_subcommand("additivity", "Gap between the potential and the sum of single potentials");
  add_common(add);
  add->add_option("--spreads", spreads, "Phase spreads in units of 1/lambda_plus")->delimiter(',');
  add->add_option("--max-gap", common.max_gap, "Fail with exit code 4 above this gap");
  CLI::App* sweep = app.add_subcommand("sweep", "Splitting and jump sweeps with order fits");
  add_common(sweep);
  add_grid(sweep);
  add_shoot(sweep);
  sweep->add_option("--max-rel-error", common.max_rel_error, "Fail with exit code 4 above this relative error");
  CLI::App* exp = app.add_subcommand("export-separatrix", "Tabulate the separatrices as CSV");
  add_common(exp);
  exp->add_option("--s-max", s_max, "Half-width of the table")->check(CLI::PositiveNumber);
  exp->add_option("--step", step, "Sampling step")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParse;
  }

  try {
    const Context ctx = load(common);
    if (*eval) return cmd_eval(ctx);
    if (*critical) return cmd_critical(ctx);
    if (*reduced) return cmd_reduced(ctx, actions, thetas, min_gradient);
    if (*split) return cmd_splitting(ctx);
    if (*jump) return cmd_jump(ctx);
    if (*add) return cmd_additivity(ctx, spreads);
    if (*sweep) return cmd_sweep(ctx);
    if (*exp) return cmd_export(ctx, s_max, step);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kParse;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kParse;
  } catch (const DomainError& e) {
    std::cerr << "domain error at t = " << e.time << ": " << e.what() << "\n";
    return kNumeric;
  } catch (const Error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumeric;
  }
  return kOk;
}
