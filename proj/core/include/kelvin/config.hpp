#pragma once

#include <string>
#include <vector>

#include "kelvin/objective.hpp"
#include "kelvin/optimizer.hpp"
#include "kelvin/transport.hpp"

namespace kelvin {

/// Declarative run description: dipoles, domain, motion, target, problem
/// parameters, optimizer and transport settings. Loaded from a JSON document
/// (comments allowed) and fully validated, including the containment check.
struct RunConfig {
  std::string name;

  DipoleArray dipoles;
  Eigen::VectorXd domain_center;
  double domain_radius = 1.0;

  MotionLaw law;
  TargetField target;
  bool has_target = false;

  bool has_problem1 = false;
  bool has_problem2 = false;
  Problem1Spec problem1;
  Problem2Spec problem2;

  OptimizerOptions optimizer;
  TransportConfig transport;

  int quad_n_r = 8;
  int quad_n_phi = 16;

  std::string output_dir = "out";
};

/// Parses and validates a configuration document. Throws std::runtime_error
/// with position info on parse failure and std::invalid_argument naming the
/// failing invariant on validation failure.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text, const std::string& origin = "<string>");

/// Bundled presets: paper_p1_f1, paper_p1_f2, paper_p2, paper_transport.
std::vector<std::string> preset_names();
const std::string& preset_text(const std::string& name);
RunConfig load_preset(const std::string& name);

// --- result export ---------------------------------------------------------

/// Full-precision (17 significant digits) decimal formatting used by every
/// numeric export, so identical runs give byte-identical files.
std::string format_full(double v);

void write_control_csv(const std::string& path, const ControlPath& control, double horizon,
                       const std::string& param_name);
ControlPath read_control_csv(const std::string& path);

void write_speed_csv(const std::string& path, const Eigen::VectorXd& speed, double kappa);
void write_trace_csv(const std::string& path, const std::vector<IterationRecord>& trace);

}  // namespace kelvin
