#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kelvin/objective.hpp"

namespace kelvin {

struct OptimizerOptions {
  double tol = 1e-5;        // projected-gradient stopping tolerance
  int max_iters = 50000;
  double armijo_c = 1e-4;   // sufficient-decrease constant
  double backtrack = 0.5;   // step shrink factor
  double step0 = 1.0;       // initial trial step
  int memory = 10;          // quasi-Newton history length
  unsigned seed = 0;        // reserved for randomized tie-breaking; default path unused
  int max_backtracks = 60;

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double cost = 0.0;
  double residual = 0.0;
  double step = 0.0;
};

struct RunReport {
  bool converged = false;
  int iterations = 0;
  std::vector<IterationRecord> trace;  // one record per accepted iteration
  double final_cost = 0.0;
  double final_residual = 0.0;
  std::vector<std::uint8_t> active_set;  // 1 where a bound is active at the solution
  double wall_time_s = 0.0;
  Eigen::VectorXd solution;
  std::string message;
  // Non-convex objective: the result is a local minimizer and depends on the
  // starting point.
  bool local_minimizer_caveat = true;
};

/// Componentwise clamp min{upper, max{x, lower}}; idempotent.
Eigen::VectorXd project_box(const Eigen::VectorXd& x, const Eigen::VectorXd& lower,
                            const Eigen::VectorXd& upper);

/// First-order stationarity measure |x - Proj(x - grad)| for the box problem.
double projected_gradient_residual(const Eigen::VectorXd& x, const Eigen::VectorXd& grad,
                                   const Eigen::VectorXd& lower,
                                   const Eigen::VectorXd& upper);

/// Objective handle: returns the cost, fills the gradient when requested.
using ObjectiveFn = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;

/// Projected limited-memory BFGS with Armijo backtracking along the projected
/// arc. Every evaluated point is feasible; curvature pairs failing the
/// curvature condition are skipped (the iteration falls back to the projected
/// gradient direction).
RunReport solve(const ObjectiveFn& objective, const Eigen::VectorXd& x0,
                const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                const OptimizerOptions& opts = {});

/// Sequential one-step initialization for Problem 1: chains N box-constrained
/// n_p-dimensional solves, each terminated at residual < tol_inner.
ControlPath warm_start_p1(const Problem1Objective& objective, double tol_inner = 1e-3);

/// Sequential one-step initialization for Problem 2 over (alpha, theta).
ControlPath warm_start_p2(const Problem2Objective& objective, double tol_inner = 1e-3);

}  // namespace kelvin
