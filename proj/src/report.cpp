#include "melnikov/report.hpp"

#include <cstdio>
#include <ostream>

namespace melnikov {

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// JSON has no infinities; they are written as null.
Json scalar(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

}  // namespace

Json to_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(scalar(v[k]));
  return a;
}

Json to_json(const Phase& ph) {
  return {{"action", to_json(ph.action)}, {"angle", to_json(ph.angle)}, {"eta", to_json(ph.eta)}};
}

Json to_json(const ScalarValue& v) {
  return {{"value", scalar(v.value)},
          {"quad_error", scalar(v.quad_error)},
          {"tail_bound", scalar(v.tail_bound)},
          {"window", scalar(v.window)},
          {"converged", v.converged}};
}

Json to_json(const VectorValue& v) {
  return {{"value", to_json(v.value)},
          {"quad_error", scalar(v.quad_error)},
          {"tail_bound", scalar(v.tail_bound)},
          {"window", scalar(v.window)},
          {"converged", v.converged}};
}

Json to_json(const CriticalPoint& c) {
  Json jac = Json::array();
  for (Eigen::Index r = 0; r < c.jacobian.rows(); ++r) jac.push_back(to_json(Vec(c.jacobian.row(r).transpose())));
  Json o;
  o["tau_star"] = to_json(c.tau_star);
  o["residual_norm"] = scalar(c.residual_norm);
  o["jacobian"] = jac;
  o["singular_values"] = to_json(c.singular_values);
  o["rank"] = c.rank;
  o["condition"] = scalar(c.condition);
  o["nondegenerate"] = c.nondegenerate();
  o["iterations"] = c.iterations;
  o["residual_history"] = c.residual_history;
  o["context"] = to_json(c.context);
  return o;
}

Json to_json(const ReducedSample& s) {
  return {{"action", to_json(s.action)},        {"theta", to_json(s.theta)},
          {"value", scalar(s.value)},           {"dtheta", to_json(s.dtheta)},
          {"dI", to_json(s.dI)},                {"dtheta_envelope", to_json(s.dtheta_envelope)},
          {"tau_star", to_json(s.tau_star)}};
}

Json to_json(const OrderFit& f) {
  return {{"slope", scalar(f.slope)},
          {"intercept", scalar(f.intercept)},
          {"slope_stderr", scalar(f.slope_stderr)},
          {"points", f.points}};
}

Json to_json(const GraphPoint& g) {
  return {{"tau", to_json(g.tau)},         {"phase", to_json(g.phase)},
          {"P", to_json(g.P)},             {"horizon", scalar(g.horizon)},
          {"shoot_residual", scalar(g.shoot_residual)}, {"newton_iterations", g.newton_iterations}};
}

Json to_json(const SplittingReport& r) {
  Json rows = Json::array();
  for (const SplittingRow& row : r.rows)
    rows.push_back({{"eps", row.eps},
                    {"stable", to_json(row.stable)},
                    {"unstable", to_json(row.unstable)},
                    {"measured", to_json(row.measured)},
                    {"predicted", to_json(row.predicted)},
                    {"residual", scalar(row.residual)}});
  Json o;
  o["tau"] = to_json(r.tau);
  o["phase"] = to_json(r.phase);
  o["melnikov_vector"] = to_json(r.melnikov);
  o["rows"] = rows;
  o["residual_fit"] = r.fit ? to_json(*r.fit) : Json(nullptr);
  o["graph_fit"] = r.graph_fit ? to_json(*r.graph_fit) : Json(nullptr);
  return o;
}

Json to_json(const JumpReport& r) {
  Json rows = Json::array();
  for (const JumpRow& row : r.rows)
    rows.push_back({{"eps", row.eps},
                    {"tau_homoclinic", to_json(row.tau_homoclinic)},
                    {"measured", to_json(row.measured)},
                    {"predicted", to_json(row.predicted)},
                    {"residual", scalar(row.residual)},
                    {"relative_error", scalar(row.relative_error)}});
  Json o;
  o["critical"] = to_json(r.critical);
  o["dtheta"] = to_json(r.dtheta);
  o["rows"] = rows;
  o["residual_fit"] = r.fit ? to_json(*r.fit) : Json(nullptr);
  return o;
}

Json envelope(const std::string& command, const RunConfig& cfg, Json result) {
  Json o;
  o["tool"] = "melnikov";
  o["version"] = kToolVersion;
  o["command"] = command;
  o["config_hash"] = config_hash(cfg);
  o["result"] = std::move(result);
  return o;
}

void write_splitting_csv(std::ostream& os, const SplittingReport& r) {
  os << "eps,component,measured,predicted,residual\n";
  for (const SplittingRow& row : r.rows)
    for (Eigen::Index i = 0; i < row.measured.size(); ++i)
      os << num(row.eps) << ',' << i + 1 << ',' << num(row.measured[i]) << ',' << num(row.predicted[i]) << ','
         << num(row.measured[i] - row.predicted[i]) << '\n';
}

void write_jump_csv(std::ostream& os, const JumpReport& r) {
  os << "eps,component,measured,predicted,residual\n";
  for (const JumpRow& row : r.rows)
    for (Eigen::Index j = 0; j < row.measured.size(); ++j)
      os << num(row.eps) << ',' << j + 1 << ',' << num(row.measured[j]) << ',' << num(row.predicted[j]) << ','
         << num(row.measured[j] - row.predicted[j]) << '\n';
}

}  // namespace melnikov
