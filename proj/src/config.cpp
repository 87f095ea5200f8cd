#include "melnikov/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace melnikov {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct Reader {
  const json& j;
  std::string path;

  Reader at(const std::string& key) const { return {j.at(key), path + "/" + key}; }
  Reader at(std::size_t k) const { return {j.at(k), path + "/" + std::to_string(k)}; }
  bool has(const std::string& key) const { return j.contains(key); }

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(what, path.empty() ? "/" : path); }

  const Reader& object(std::initializer_list<const char*> allowed) const {
    if (!j.is_object()) fail("expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!ok.count(it.key())) throw ConfigError("unknown key", path + "/" + it.key());
    return *this;
  }
  void require(const std::string& key) const {
    if (!j.contains(key)) throw ConfigError("missing required key", path + "/" + key);
  }
  std::size_t array() const {
    if (!j.is_array()) fail("expected an array");
    return j.size();
  }
  double number() const {
    if (!j.is_number()) fail("expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }
  long long integer() const {
    if (!j.is_number_integer()) fail("expected an integer");
    return j.get<long long>();
  }
  std::string string() const {
    if (!j.is_string()) fail("expected a string");
    return j.get<std::string>();
  }
  std::vector<double> numbers() const {
    std::vector<double> v(array());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = at(k).number();
    return v;
  }
  Vec vec() const {
    const std::vector<double> v = numbers();
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  double number_or(const std::string& key, double dflt) const { return has(key) ? at(key).number() : dflt; }
};

std::vector<double> to_std(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

TrigPotential parse_potential(const Reader& r) {
  r.object({"cos", "sin"});
  std::vector<double> a = r.has("cos") ? r.at("cos").numbers() : std::vector<double>{};
  std::vector<double> b = r.has("sin") ? r.at("sin").numbers() : std::vector<double>{};
  return TrigPotential(std::move(a), std::move(b));
}

Var var_at(const Reader& r, const std::string& name, bool affine) {
  try {
    return parse_var(name, affine);
  } catch (const ConfigError& e) {
    throw ConfigError("unknown variable '" + name + "'", r.path);
  }
}

Factor parse_factor(const Reader& r, bool affine) {
  if (!r.j.is_object()) r.fail("expected an object");
  for (const char* wave : {"cos", "sin"}) {
    if (!r.has(wave)) continue;
    r.object({wave, "phase"});
    const Reader w = r.at(wave);
    if (!w.j.is_object()) w.fail("expected an object mapping variables to frequencies");
    std::vector<std::pair<Var, double>> terms;
    for (auto it = w.j.begin(); it != w.j.end(); ++it)
      terms.emplace_back(var_at(w.at(it.key()), it.key(), affine), w.at(it.key()).number());
    const double phase = r.number_or("phase", 0.0);
    return std::string(wave) == "cos" ? Factor::cos(std::move(terms), phase) : Factor::sin(std::move(terms), phase);
  }
  if (r.has("pow")) {
    r.object({"pow", "exponent"});
    r.require("exponent");
    const long long e = r.at("exponent").integer();
    if (e < 0) r.at("exponent").fail("exponent must be non-negative");
    return Factor::power(var_at(r.at("pow"), r.at("pow").string(), affine), static_cast<int>(e));
  }
  for (const char* bump : {"sech", "gauss"}) {
    if (!r.has(bump)) continue;
    r.object({bump, "rate", "center"});
    const Var v = var_at(r.at(bump), r.at(bump).string(), affine);
    const double rate = r.number_or("rate", 1.0);
    const double center = r.number_or("center", 0.0);
    return std::string(bump) == "sech" ? Factor::sech(v, rate, center) : Factor::gauss(v, rate, center);
  }
  r.fail("factor needs one of cos, sin, pow, sech, gauss");
}

Expression parse_expression(const Reader& r, bool affine) {
  std::vector<Term> terms(r.array());
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const Reader t = r.at(k);
    t.object({"coeff", "factors"});
    terms[k].coeff = t.number_or("coeff", 1.0);
    if (t.has("factors")) {
      const Reader fs = t.at("factors");
      for (std::size_t f = 0; f < fs.array(); ++f) terms[k].factors.push_back(parse_factor(fs.at(f), affine));
    }
  }
  return Expression(std::move(terms));
}

ClockDriver parse_clock(const Reader& r) {
  r.object({"kind", "t0", "frequency", "frequencies", "rates", "eta0"});
  r.require("kind");
  const std::string kind = r.at("kind").string();
  if (kind == "affine_time") {
    r.object({"kind", "t0"});
    return ClockDriver::affine_time(r.number_or("t0", 0.0));
  }
  if (kind == "periodic") {
    r.object({"kind", "frequency", "eta0"});
    r.require("frequency");
    return ClockDriver::periodic(r.at("frequency").number(), r.number_or("eta0", 0.0));
  }
  if (kind == "quasiperiodic" || kind == "linear") {
    const char* rates = kind == "linear" ? "rates" : "frequencies";
    r.object({"kind", rates, "eta0"});
    r.require(rates);
    const Vec f = r.at(rates).vec();
    const Vec e0 = r.has("eta0") ? r.at("eta0").vec() : Vec::Zero(f.size());
    if (e0.size() != f.size()) r.at("eta0").fail("dimension differs from the clock rates");
    try {
      return kind == "linear" ? ClockDriver::linear(f, e0) : ClockDriver::quasiperiodic(f, e0);
    } catch (const ConfigError& e) {
      throw ConfigError("invalid clock", r.path);
    }
  }
  r.at("kind").fail("unknown clock kind '" + kind + "'");
}

Perturbation parse_perturbation(const Reader& r, const Layout& L, bool affine) {
  r.object({"type", "h", "components", "bound", "lipschitz"});
  r.require("type");
  Perturbation pert;
  const std::string type = r.at("type").string();
  if (type == "hamiltonian") {
    r.object({"type", "h", "bound", "lipschitz"});
    pert.field = HamiltonianField{r.has("h") ? parse_expression(r.at("h"), affine) : Expression::zero()};
  } else if (type == "general") {
    r.object({"type", "components", "bound", "lipschitz"});
    GeneralField g;
    g.components.assign(2 * L.n + 2 * L.d, Expression::zero());
    if (r.has("components")) {
      const Reader c = r.at("components");
      if (!c.j.is_object()) c.fail("expected an object keyed by coordinate name");
      for (auto it = c.j.begin(); it != c.j.end(); ++it) {
        const Reader comp = c.at(it.key());
        Var v;
        try {
          v = parse_var(it.key(), affine);
        } catch (const ConfigError&) {
          comp.fail("unknown coordinate");
        }
        if (v.kind == VarKind::Eta || !L.contains(v)) comp.fail("not a dynamic coordinate of this system");
        g.components[L.offset(v)] = parse_expression(comp, affine);
      }
    }
    pert.field = std::move(g);
  } else {
    r.at("type").fail("unknown perturbation type '" + type + "'");
  }
  pert.bound = r.number_or("bound", 0.0);
  if (r.has("lipschitz")) pert.lipschitz = r.at("lipschitz").number();
  return pert;
}

RunSettings parse_run(const Reader& r) {
  r.object({"tau", "action", "angle", "eta", "eps_list", "tol", "newton_tol", "horizon_c", "grid", "format",
            "output"});
  RunSettings s;
  if (r.has("tau")) s.tau = r.at("tau").numbers();
  if (r.has("action")) s.action = r.at("action").numbers();
  if (r.has("angle")) s.angle = r.at("angle").numbers();
  if (r.has("eta")) s.eta = r.at("eta").numbers();
  if (r.has("eps_list")) s.eps_list = r.at("eps_list").numbers();
  if (r.has("tol")) s.tol = r.at("tol").number();
  if (r.has("newton_tol")) s.newton_tol = r.at("newton_tol").number();
  if (r.has("horizon_c")) s.horizon_c = r.at("horizon_c").number();
  if (r.has("grid")) {
    const Reader g = r.at("grid");
    g.object({"lo", "hi", "points"});
    SeedGridSettings grid;
    grid.lo = g.number_or("lo", grid.lo);
    grid.hi = g.number_or("hi", grid.hi);
    if (g.has("points")) grid.points = static_cast<int>(g.at("points").integer());
    if (grid.points < 1) g.fail("points must be positive");
    s.grid = grid;
  }
  if (r.has("format")) {
    s.format = r.at("format").string();
    if (*s.format != "json" && *s.format != "csv") r.at("format").fail("format must be json or csv");
  }
  if (r.has("output")) s.output = r.at("output").string();
  return s;
}

ordered_json factor_json(const Factor& f, bool affine) {
  ordered_json o;
  switch (f.kind) {
    case Factor::Kind::Cos:
    case Factor::Kind::Sin: {
      ordered_json w = ordered_json::object();
      for (const auto& [v, a] : f.wave) w[var_name(v, affine)] = a;
      o[f.kind == Factor::Kind::Cos ? "cos" : "sin"] = w;
      o["phase"] = f.phase;
      break;
    }
    case Factor::Kind::Power:
      o["pow"] = var_name(f.var, affine);
      o["exponent"] = f.exponent;
      break;
    case Factor::Kind::Sech:
    case Factor::Kind::Gauss:
      o[f.kind == Factor::Kind::Sech ? "sech" : "gauss"] = var_name(f.var, affine);
      o["rate"] = f.rate;
      o["center"] = f.center;
      break;
  }
  return o;
}

ordered_json expression_json(const Expression& e, bool affine) {
  ordered_json terms = ordered_json::array();
  for (const Term& t : e.terms()) {
    ordered_json fs = ordered_json::array();
    for (const Factor& f : t.factors) fs.push_back(factor_json(f, affine));
    terms.push_back({{"coeff", t.coeff}, {"factors", fs}});
  }
  return terms;
}

ordered_json clock_json(const ClockDriver& c) {
  switch (c.kind()) {
    case ClockDriver::Kind::AffineTime:
      return {{"kind", "affine_time"}, {"t0", c.eta0()[0]}};
    case ClockDriver::Kind::Periodic:
      return {{"kind", "periodic"}, {"frequency", c.frequencies()[0]}, {"eta0", c.eta0()[0]}};
    case ClockDriver::Kind::Quasiperiodic:
      return {{"kind", "quasiperiodic"}, {"frequencies", to_std(c.frequencies())}, {"eta0", to_std(c.eta0())}};
    case ClockDriver::Kind::Custom:
      if (!c.is_linear()) throw ConfigError("a custom clock flow cannot be serialized", "/clock");
      return {{"kind", "linear"}, {"rates", to_std(c.frequencies())}, {"eta0", to_std(c.eta0())}};
  }
  return {};
}

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t k = 0; k + 1 < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

SystemConfig RunConfig::finalized() const {
  SystemConfig s = system;
  s.finalize();
  return s;
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    const auto colon = msg.rfind(": ");
    if (colon != std::string::npos) msg = msg.substr(colon + 2);
    throw ConfigError(line_column(text, e.byte) + ": " + msg);
  }
  const Reader r{root, ""};
  r.object({"schema_version", "penduli", "rotator", "clock", "perturbation", "domain", "epsilon", "seed", "run"});
  r.require("schema_version");
  if (r.at("schema_version").integer() != kSchemaVersion)
    r.at("schema_version").fail("unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")");

  RunConfig cfg;
  SystemConfig& s = cfg.system;

  r.require("penduli");
  const Reader pen = r.at("penduli");
  const std::size_t n = pen.array();
  if (n == 0) pen.fail("at least one pendulum is required");
  std::vector<TrigPotential> pots;
  std::vector<int> signs, branches;
  for (std::size_t i = 0; i < n; ++i) {
    const Reader p = pen.at(i);
    p.object({"sign", "potential", "branch"});
    p.require("potential");
    pots.push_back(parse_potential(p.at("potential")));
    const long long sg = p.has("sign") ? p.at("sign").integer() : 1;
    const long long br = p.has("branch") ? p.at("branch").integer() : 1;
    if (sg != 1 && sg != -1) p.at("sign").fail("sign must be 1 or -1");
    if (br != 1 && br != -1) p.at("branch").fail("branch must be 1 or -1");
    signs.push_back(static_cast<int>(sg));
    branches.push_back(static_cast<int>(br));
  }
  s.penduli = PenduliSpec(std::move(pots), std::move(signs), std::move(branches));

  r.require("rotator");
  const Reader rot = r.at("rotator");
  rot.object({"dimension", "h0"});
  rot.require("dimension");
  const long long d = rot.at("dimension").integer();
  if (d < 1) rot.at("dimension").fail("dimension must be at least 1");
  if (rot.has("h0")) {
    const Reader h0 = rot.at("h0");
    std::vector<Polynomial::Monomial> mons(h0.array());
    for (std::size_t k = 0; k < mons.size(); ++k) {
      const Reader m = h0.at(k);
      m.object({"coeff", "powers"});
      m.require("coeff");
      m.require("powers");
      mons[k].coeff = m.at("coeff").number();
      const Reader pw = m.at("powers");
      if (pw.array() != static_cast<std::size_t>(d)) pw.fail("needs one exponent per action");
      for (std::size_t j = 0; j < pw.j.size(); ++j) {
        const long long e = pw.at(j).integer();
        if (e < 0) pw.at(j).fail("exponent must be non-negative");
        mons[k].powers.push_back(static_cast<int>(e));
      }
    }
    s.rotator.h0 = Polynomial(static_cast<int>(d), std::move(mons));
  } else {
    s.rotator.h0 = Polynomial::half_square(static_cast<int>(d));
  }

  if (r.has("clock")) s.clock = parse_clock(r.at("clock"));
  const bool affine = s.clock.kind() == ClockDriver::Kind::AffineTime;

  if (r.has("perturbation")) s.perturbation = parse_perturbation(r.at("perturbation"), s.layout(), affine);

  if (r.has("domain")) {
    const Reader dom = r.at("domain");
    dom.object({"tube", "action_center", "action_radius"});
    s.domain.tube = dom.number_or("tube", 0.0);
    if (dom.has("action_center")) s.domain.action_center = dom.at("action_center").vec();
    if (dom.has("action_radius")) s.domain.action_radius = dom.at("action_radius").number();
  }
  s.epsilon = r.number_or("epsilon", 0.0);
  if (r.has("seed")) {
    const long long sd = r.at("seed").integer();
    if (sd < 0) r.at("seed").fail("seed must be non-negative");
    s.seed = static_cast<std::uint64_t>(sd);
  }
  if (r.has("run")) cfg.run = parse_run(r.at("run"));

  try {
    cfg.finalized();
  } catch (const ConfigError& e) {
    const std::string field = e.field.empty() ? "/" : (e.field.front() == '/' ? e.field : "/" + e.field);
    std::string what = e.what();
    if (!e.field.empty() && what.rfind(e.field + ": ", 0) == 0) what = what.substr(e.field.size() + 2);
    throw ConfigError(what, field);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

ordered_json to_json(const RunConfig& cfg) {
  const SystemConfig& s = cfg.system;
  const bool affine = s.clock.kind() == ClockDriver::Kind::AffineTime;
  const Layout L = s.layout();
  ordered_json o;
  o["schema_version"] = kSchemaVersion;

  ordered_json pen = ordered_json::array();
  for (int i = 0; i < s.penduli.count(); ++i) {
    const TrigPotential& V = s.penduli.potentials[i];
    pen.push_back({{"sign", s.penduli.signs[i]},
                   {"potential", {{"cos", V.cos_coeffs()}, {"sin", V.sin_coeffs()}}},
                   {"branch", s.penduli.branches[i]}});
  }
  o["penduli"] = pen;

  ordered_json h0 = ordered_json::array();
  for (const auto& m : s.rotator.h0.monomials()) h0.push_back({{"coeff", m.coeff}, {"powers", m.powers}});
  o["rotator"] = {{"dimension", s.rotator.dim()}, {"h0", h0}};
  o["clock"] = clock_json(s.clock);

  ordered_json pert;
  if (const auto* g = std::get_if<GeneralField>(&s.perturbation.field)) {
    pert["type"] = "general";
    ordered_json comps = ordered_json::object();
    for (std::size_t k = 0; k < g->components.size(); ++k) {
      if (g->components[k].is_zero()) continue;
      const int off = static_cast<int>(k);
      Var v;
      if (off < L.n) v = {VarKind::P, off};
      else if (off < 2 * L.n) v = {VarKind::Q, off - L.n};
      else if (off < 2 * L.n + L.d) v = {VarKind::I, off - 2 * L.n};
      else v = {VarKind::Phi, off - 2 * L.n - L.d};
      comps[var_name(v, affine)] = expression_json(g->components[k], affine);
    }
    pert["components"] = comps;
  } else {
    pert["type"] = "hamiltonian";
    pert["h"] = expression_json(s.perturbation.hamiltonian(), affine);
  }
  pert["bound"] = s.perturbation.bound;
  if (s.perturbation.lipschitz) pert["lipschitz"] = *s.perturbation.lipschitz;
  o["perturbation"] = pert;

  ordered_json dom;
  dom["tube"] = s.domain.tube;
  if (s.domain.action_center.size() > 0) dom["action_center"] = to_std(s.domain.action_center);
  if (std::isfinite(s.domain.action_radius)) dom["action_radius"] = s.domain.action_radius;
  o["domain"] = dom;
  o["epsilon"] = s.epsilon;
  o["seed"] = s.seed;

  const RunSettings& r = cfg.run;
  ordered_json run = ordered_json::object();
  if (r.tau) run["tau"] = *r.tau;
  if (r.action) run["action"] = *r.action;
  if (r.angle) run["angle"] = *r.angle;
  if (r.eta) run["eta"] = *r.eta;
  if (r.eps_list) run["eps_list"] = *r.eps_list;
  if (r.tol) run["tol"] = *r.tol;
  if (r.newton_tol) run["newton_tol"] = *r.newton_tol;
  if (r.horizon_c) run["horizon_c"] = *r.horizon_c;
  if (r.grid) run["grid"] = {{"lo", r.grid->lo}, {"hi", r.grid->hi}, {"points", r.grid->points}};
  if (r.format) run["format"] = *r.format;
  if (r.output) run["output"] = *r.output;
  o["run"] = run;
  return o;
}

std::string serialize_config(const RunConfig& cfg) { return to_json(cfg).dump(2); }

std::string config_hash(const RunConfig& cfg) {
  const std::string text = to_json(cfg).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace melnikov
