#include "kelvin/config.hpp"

#include <map>
#include <stdexcept>

namespace kelvin {

namespace {

// Translating-disk experiment with a constant rightward target force.
const char* const kPresetP1F1 = R"json({
  "name": "paper_p1_f1",
  "dipoles": {
    // Eight radially directed dipoles on the circle of radius 1.2,
    // at angles k*pi/4, k = 0..7.
    "ring": { "count": 8, "radius": 1.2 }
  },
  "domain": {
    // Unit disk holding the fluid; dipoles sit outside it.
    "center": [0.0, 0.0],
    "radius": 1.0
  },
  "motion": {
    "kind": "time",
    // Reference disk of radius 0.2 centered at (-0.75, 0).
    "disk": { "center": [-0.75, 0.0], "radius": 0.2 },
    // Rigid translation phi(t) = (t, 0): the disk center travels from
    // (-0.75, 0) at t = 0 to (0.25, 0) at t = 1.
    "translation": { "kind": "line", "start": [0.0, 0.0], "velocity": [1.0, 0.0] },
    // No dilation: psi = 1.
    "scaling": { "kind": "constant", "value": 1.0 },
    "horizon": 1.0
  },
  // Constant desired force f_1 = (1, 0).
  "target": { "kind": "constant", "value": [1.0, 0.0] },
  "problem1": {
    "steps": 80,
    "lambda": 1e-5,
    // Start intensities alpha^0 = (1, ..., 1); admissible box [-2, 2]^8.
    "alpha0": 1.0,
    "alpha_lower": -2.0,
    "alpha_upper": 2.0
  },
  "quadrature": { "radial": 8, "angular": 16 },
  "optimizer": { "tol": 1e-5, "max_iters": 50000 },
  "output_dir": "out"
})json";

// Circulating-disk experiment with a rotating target force.
const char* const kPresetP1F2 = R"json({
  "name": "paper_p1_f2",
  "dipoles": {
    "ring": { "count": 8, "radius": 1.2 }
  },
  "domain": {
    "center": [0.0, 0.0],
    "radius": 1.0
  },
  "motion": {
    "kind": "time",
    // Reference disk at the origin; the translation below carries it along
    // the semicircle of radius 0.6, from (-0.6, 0) at t = 0 to (0.6, 0).
    "disk": { "center": [0.0, 0.0], "radius": 0.2 },
    // phi(t) = 0.6*(cos(pi*(1-t)), sin(pi*(1-t))).
    "translation": {
      "kind": "circle_arc",
      "center": [0.0, 0.0],
      "amplitude": 0.6,
      "angle0": 3.14159265358979323846,
      "angle_rate": -3.14159265358979323846
    },
    "scaling": { "kind": "constant", "value": 1.0 },
    "horizon": 1.0
  },
  // Rotating desired force f_2(t) = (sin(pi*(1-t)), -cos(pi*(1-t))),
  // tangent to the semicircular trajectory.
  "target": {
    "kind": "rotating",
    "amplitude": 1.0,
    "angle0": 3.14159265358979323846,
    "angle_rate": -3.14159265358979323846
  },
  "problem1": {
    "steps": 80,
    "lambda": 1e-5,
    "alpha0": 1.0,
    "alpha_lower": -2.0,
    "alpha_upper": 2.0
  },
  "quadrature": { "radial": 8, "angular": 16 },
  "optimizer": { "tol": 1e-5, "max_iters": 50000 },
  "output_dir": "out"
})json";

// Minimum-final-time experiment: straight unit-speed path of length 0.75.
const char* const kPresetP2 = R"json({
  "name": "paper_p2",
  "dipoles": {
    "ring": { "count": 8, "radius": 1.2 }
  },
  "domain": {
    "center": [0.0, 0.0],
    "radius": 1.0
  },
  "motion": {
    "kind": "arc",
    "disk": { "center": [0.0, 0.0], "radius": 0.2 },
    // Arc-length parametrized segment rho(s) from (0, -0.75) toward the
    // origin; |rho'| = 1, total length s_F = 0.75.
    "translation": { "kind": "line", "start": [0.0, -0.75], "velocity": [0.0, 1.0] },
    "scaling": { "kind": "constant", "value": 1.0 },
    "horizon": 0.75
  },
  "problem2": {
    // M = 80 arc intervals.
    "steps": 80,
    "lambda": 1e-6,
    "eta": 1e-4,
    // Weight on the elapsed-time term.
    "beta": 0.1,
    // Near-zero feasible start for intensities and speed.
    "alpha0": 1e-6,
    "theta0": 1e-6,
    // Intensity box [-1, 1]^8; speed box [1e-10, 10].
    "alpha_lower": -1.0,
    "alpha_upper": 1.0,
    "theta_lower": 1e-10,
    "theta_upper": 10.0
  },
  "quadrature": { "radial": 8, "angular": 16 },
  "optimizer": { "tol": 1e-5, "max_iters": 50000 },
  "output_dir": "out"
})json";

// Transport demonstration driven by the optimized translating-disk force.
const char* const kPresetTransport = R"json({
  "name": "paper_transport",
  "dipoles": {
    "ring": { "count": 8, "radius": 1.2 }
  },
  "domain": {
    "center": [0.0, 0.0],
    "radius": 1.0
  },
  "motion": {
    "kind": "time",
    "disk": { "center": [-0.75, 0.0], "radius": 0.2 },
    "translation": { "kind": "line", "start": [0.0, 0.0], "velocity": [1.0, 0.0] },
    "scaling": { "kind": "constant", "value": 1.0 },
    "horizon": 1.0
  },
  "target": { "kind": "constant", "value": [1.0, 0.0] },
  "problem1": {
    "steps": 80,
    "lambda": 1e-5,
    "alpha0": 1.0,
    "alpha_lower": -2.0,
    "alpha_upper": 2.0
  },
  "transport": {
    // Diffusion coefficient epsilon in A = eps*I.
    "eps": 1e-5,
    "mesh_n": 128,
    "time_steps": 160,
    "T": 1.0,
    // Initial concentration bump matching the initial target disk.
    "bump_center": [-0.75, 0.0],
    "bump_radius": 0.2,
    "supg": true
  },
  "quadrature": { "radial": 8, "angular": 16 },
  "optimizer": { "tol": 1e-5, "max_iters": 50000 },
  "output_dir": "out"
})json";

const std::map<std::string, const char*>& preset_map() {
  static const std::map<std::string, const char*> presets = {
      {"paper_p1_f1", kPresetP1F1},
      {"paper_p1_f2", kPresetP1F2},
      {"paper_p2", kPresetP2},
      {"paper_transport", kPresetTransport},
  };
  return presets;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : preset_map()) names.push_back(name);
  return names;
}

const std::string& preset_text(const std::string& name) {
  static std::map<std::string, std::string> cache;
  auto it = preset_map().find(name);
  if (it == preset_map().end()) {
    throw std::invalid_argument("unknown preset '" + name + "' (available: paper_p1_f1, paper_p1_f2, paper_p2, paper_transport)");
  }
  return cache.emplace(name, it->second).first->second;
}

RunConfig load_preset(const std::string& name) {
  return parse_config(preset_text(name), "preset:" + name);
}

}  // namespace kelvin
