#include "kelvin/config.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kelvin {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument(what); }

Eigen::VectorXd to_vector(const json& j, const std::string& key) {
  if (!j.is_array()) fail(key + " must be an array of numbers");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j[i].get<double>();
  return v;
}

/// Scalar broadcast or explicit per-dipole array.
Eigen::VectorXd broadcast(const json& j, int n, const std::string& key) {
  if (j.is_number()) return Eigen::VectorXd::Constant(n, j.get<double>());
  Eigen::VectorXd v = to_vector(j, key);
  if (v.size() != n) fail(key + " must be a scalar or have one entry per dipole");
  return v;
}

Eigen::MatrixXd to_matrix(const json& j, int dim, const std::string& key) {
  if (!j.is_array() || j.empty()) fail(key + " must be a non-empty array of points");
  Eigen::MatrixXd m(dim, static_cast<int>(j.size()));
  for (std::size_t c = 0; c < j.size(); ++c) {
    Eigen::VectorXd col = to_vector(j[c], key);
    if (col.size() != dim) fail(key + " entries must have length " + std::to_string(dim));
    m.col(static_cast<int>(c)) = col;
  }
  return m;
}

DipoleArray parse_dipoles(const json& j) {
  DipoleArray dipoles;
  if (j.contains("ring")) {
    const json& r = j.at("ring");
    dipoles = DipoleArray::ring(r.at("count").get<int>(), r.at("radius").get<double>());
  } else if (j.contains("positions")) {
    dipoles.dim = static_cast<int>(j.at("positions").at(0).size());
    dipoles.positions = to_matrix(j.at("positions"), dipoles.dim, "dipoles.positions");
    dipoles.directions = to_matrix(j.at("directions"), dipoles.dim, "dipoles.directions");
    if (dipoles.directions.cols() != dipoles.positions.cols()) {
      fail("dipoles.directions must match dipoles.positions in count");
    }
  } else {
    fail("dipoles requires either a 'ring' or explicit 'positions'/'directions'");
  }
  return dipoles;
}

Curve parse_curve(const json& j, const std::string& key) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") return Curve::constant(to_vector(j.at("value"), key + ".value"));
  if (kind == "line") {
    return Curve::line(to_vector(j.at("start"), key + ".start"),
                       to_vector(j.at("velocity"), key + ".velocity"));
  }
  if (kind == "circle_arc") {
    return Curve::circle_arc(to_vector(j.at("center"), key + ".center"),
                             j.at("amplitude").get<double>(), j.at("angle0").get<double>(),
                             j.at("angle_rate").get<double>());
  }
  if (kind == "tabulated") {
    Eigen::VectorXd params = to_vector(j.at("params"), key + ".params");
    Eigen::MatrixXd values =
        to_matrix(j.at("values"), static_cast<int>(j.at("values").at(0).size()), key + ".values");
    return Curve::tabulated(params, values);
  }
  fail(key + ": unknown curve kind '" + kind + "'");
}

ScalarCurve parse_scalar_curve(const json& j, const std::string& key) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") return ScalarCurve::constant(j.at("value").get<double>());
  if (kind == "linear") {
    return ScalarCurve::linear(j.at("start").get<double>(), j.at("slope").get<double>());
  }
  if (kind == "tabulated") {
    return ScalarCurve::tabulated(to_vector(j.at("params"), key + ".params"),
                                  to_vector(j.at("values"), key + ".values"));
  }
  fail(key + ": unknown scaling kind '" + kind + "'");
}

TargetField parse_target(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") return TargetField::constant(to_vector(j.at("value"), "target.value"));
  if (kind == "rotating") {
    return TargetField::rotating(j.at("amplitude").get<double>(), j.at("angle0").get<double>(),
                                 j.at("angle_rate").get<double>());
  }
  if (kind == "tabulated") {
    return TargetField::tabulated(
        to_vector(j.at("params"), "target.params"),
        to_matrix(j.at("values"), static_cast<int>(j.at("values").at(0).size()),
                  "target.values"));
  }
  fail("target: unknown kind '" + kind + "'");
}

MotionLaw parse_motion(const json& j) {
  MotionLaw law;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "time") {
    law.kind = MotionLaw::Kind::Time;
  } else if (kind == "arc") {
    law.kind = MotionLaw::Kind::Arc;
  } else {
    fail("motion.kind must be 'time' or 'arc'");
  }
  const json& disk = j.at("disk");
  law.disk.center = to_vector(disk.at("center"), "motion.disk.center");
  law.disk.radius = disk.at("radius").get<double>();
  if (law.disk.radius <= 0.0) fail("motion.disk.radius must be positive");
  law.translation = parse_curve(j.at("translation"), "motion.translation");
  if (j.contains("scaling")) {
    law.scaling = parse_scalar_curve(j.at("scaling"), "motion.scaling");
  } else {
    law.scaling = ScalarCurve::constant(1.0);
  }
  law.horizon = j.at("horizon").get<double>();
  if (law.horizon <= 0.0) fail("motion.horizon must be positive");
  return law;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text, nullptr, /*allow_exceptions=*/true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(origin + ": " + e.what());
  }

  RunConfig cfg;
  try {
    cfg.name = j.value("name", std::string{});
    cfg.dipoles = parse_dipoles(j.at("dipoles"));
    const int np = cfg.dipoles.count();

    const json& dom = j.at("domain");
    cfg.domain_center = to_vector(dom.at("center"), "domain.center");
    cfg.domain_radius = dom.at("radius").get<double>();
    if (cfg.domain_radius <= 0.0) fail("domain.radius must be positive");
    cfg.dipoles.validate(cfg.domain_center, cfg.domain_radius);

    cfg.law = parse_motion(j.at("motion"));

    if (j.contains("quadrature")) {
      cfg.quad_n_r = j.at("quadrature").value("radial", 8);
      cfg.quad_n_phi = j.at("quadrature").value("angular", 16);
      if (cfg.quad_n_r < 1 || cfg.quad_n_phi < 1) fail("quadrature orders must be >= 1");
    }
    DiskQuadrature quad = build_disk_quadrature(cfg.law.disk, cfg.quad_n_r, cfg.quad_n_phi);

    if (j.contains("target")) {
      cfg.target = parse_target(j.at("target"));
      cfg.has_target = true;
    }

    if (j.contains("problem1")) {
      if (cfg.law.kind != MotionLaw::Kind::Time) fail("problem1 requires a time motion law");
      if (!cfg.has_target) fail("problem1 requires a target field");
      const json& p = j.at("problem1");
      cfg.problem1.dipoles = cfg.dipoles;
      cfg.problem1.law = cfg.law;
      cfg.problem1.target = cfg.target;
      cfg.problem1.T = cfg.law.horizon;
      cfg.problem1.N = p.at("steps").get<int>();
      cfg.problem1.lambda = p.at("lambda").get<double>();
      cfg.problem1.quad = quad;
      cfg.problem1.alpha0 = broadcast(p.at("alpha0"), np, "problem1.alpha0");
      cfg.problem1.alpha_lower = broadcast(p.at("alpha_lower"), np, "problem1.alpha_lower");
      cfg.problem1.alpha_upper = broadcast(p.at("alpha_upper"), np, "problem1.alpha_upper");
      cfg.problem1.validate();
      cfg.law.check_containment(cfg.domain_center, cfg.domain_radius, cfg.problem1.N + 1);
      cfg.has_problem1 = true;
    }

    if (j.contains("problem2")) {
      if (cfg.law.kind != MotionLaw::Kind::Arc) fail("problem2 requires an arc motion law");
      const json& p = j.at("problem2");
      cfg.problem2.dipoles = cfg.dipoles;
      cfg.problem2.law = cfg.law;
      cfg.problem2.s_F = cfg.law.horizon;
      cfg.problem2.M = p.at("steps").get<int>();
      cfg.problem2.lambda = p.at("lambda").get<double>();
      cfg.problem2.eta = p.at("eta").get<double>();
      cfg.problem2.beta = p.at("beta").get<double>();
      cfg.problem2.quad = quad;
      cfg.problem2.alpha0 = broadcast(p.at("alpha0"), np, "problem2.alpha0");
      cfg.problem2.theta0 = p.at("theta0").get<double>();
      cfg.problem2.alpha_lower = broadcast(p.at("alpha_lower"), np, "problem2.alpha_lower");
      cfg.problem2.alpha_upper = broadcast(p.at("alpha_upper"), np, "problem2.alpha_upper");
      cfg.problem2.theta_lower = p.at("theta_lower").get<double>();
      cfg.problem2.theta_upper = p.at("theta_upper").get<double>();
      cfg.problem2.validate();
      cfg.law.check_containment(cfg.domain_center, cfg.domain_radius, cfg.problem2.M + 1);
      cfg.has_problem2 = true;
    }

    if (j.contains("optimizer")) {
      const json& p = j.at("optimizer");
      cfg.optimizer.tol = p.value("tol", cfg.optimizer.tol);
      cfg.optimizer.max_iters = p.value("max_iters", cfg.optimizer.max_iters);
      cfg.optimizer.armijo_c = p.value("armijo_c", cfg.optimizer.armijo_c);
      cfg.optimizer.backtrack = p.value("backtrack", cfg.optimizer.backtrack);
      cfg.optimizer.step0 = p.value("step0", cfg.optimizer.step0);
      cfg.optimizer.memory = p.value("memory", cfg.optimizer.memory);
      cfg.optimizer.max_backtracks = p.value("max_backtracks", cfg.optimizer.max_backtracks);
    }
    cfg.optimizer.validate();

    if (j.contains("transport")) {
      const json& p = j.at("transport");
      cfg.transport.eps = p.value("eps", cfg.transport.eps);
      cfg.transport.mesh_n = p.value("mesh_n", cfg.transport.mesh_n);
      cfg.transport.time_steps = p.value("time_steps", cfg.transport.time_steps);
      cfg.transport.T = p.value("T", cfg.transport.T);
      if (p.contains("bump_center")) {
        Eigen::VectorXd bc = to_vector(p.at("bump_center"), "transport.bump_center");
        if (bc.size() != 2) fail("transport.bump_center must have 2 entries");
        cfg.transport.bump_center = bc;
      }
      cfg.transport.bump_radius = p.value("bump_radius", cfg.transport.bump_radius);
      cfg.transport.supg = p.value("supg", cfg.transport.supg);
      if (cfg.transport.eps <= 0.0) fail("transport.eps must be positive");
      if (cfg.transport.mesh_n < 2) fail("transport.mesh_n must be >= 2");
      if (cfg.transport.time_steps < 1) fail("transport.time_steps must be >= 1");
    }

    cfg.output_dir = j.value("output_dir", cfg.output_dir);
  } catch (const json::exception& e) {
    throw std::invalid_argument(origin + ": malformed configuration: " + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open configuration file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

// --- result export ----------------------------------------------------------

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_control_csv(const std::string& path, const ControlPath& control, double horizon,
                       const std::string& param_name) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const int rows = static_cast<int>(control.values.rows());
  const int np = static_cast<int>(control.values.cols());
  out << param_name;
  for (int i = 1; i <= np; ++i) out << ",alpha_" << i;
  out << "\n";
  const double step = horizon / (rows - 1);
  for (int n = 0; n < rows; ++n) {
    out << format_full(n * step);
    for (int i = 0; i < np; ++i) out << "," << format_full(control.values(n, i));
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failure on " + path);
}

ControlPath read_control_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");
  const int np = static_cast<int>(rows.front().size()) - 1;
  if (np < 1) throw std::runtime_error(path + ": expected parameter plus intensity columns");
  ControlPath control;
  control.values.resize(static_cast<int>(rows.size()), np);
  for (std::size_t n = 0; n < rows.size(); ++n) {
    if (static_cast<int>(rows[n].size()) != np + 1) {
      throw std::runtime_error(path + ": inconsistent column count");
    }
    for (int i = 0; i < np; ++i) control.values(static_cast<int>(n), i) = rows[n][i + 1];
  }
  return control;
}

void write_speed_csv(const std::string& path, const Eigen::VectorXd& speed, double kappa) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "s,theta,t\n";
  const auto [t_final, times] = recover_final_time(speed, kappa);
  (void)t_final;
  for (int m = 0; m < speed.size(); ++m) {
    out << format_full(m * kappa) << "," << format_full(speed(m)) << ","
        << format_full(times(m)) << "\n";
  }
  if (!out) throw std::runtime_error("write failure on " + path);
}

void write_trace_csv(const std::string& path, const std::vector<IterationRecord>& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "iteration,cost,residual,step\n";
  for (const IterationRecord& r : trace) {
    out << r.iteration << "," << format_full(r.cost) << "," << format_full(r.residual) << ","
        << format_full(r.step) << "\n";
  }
  if (!out) throw std::runtime_error("write failure on " + path);
}

}  // namespace kelvin
