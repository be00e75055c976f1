#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "kelvin/field.hpp"
#include "kelvin/motion.hpp"

namespace kelvin {

/// Piecewise-linear-in-parameter nodal controls. Row n of `values` holds the
/// intensities at node n; node 0 is pinned data and never a free variable.
/// `speed` is present only for the minimum-time problem.
struct ControlPath {
  Eigen::MatrixXd values;  // (N+1) x n_p
  Eigen::VectorXd speed;   // (M+1) or empty

  bool has_speed() const { return speed.size() > 0; }
};

struct Problem1Spec {
  DipoleArray dipoles;
  MotionLaw law;       // time kind
  TargetField target;
  double T = 1.0;
  int N = 80;
  double lambda = 1e-5;
  DiskQuadrature quad;
  Eigen::VectorXd alpha0;
  Eigen::VectorXd alpha_lower, alpha_upper;

  double tau() const { return T / N; }
  void validate() const;
};

struct Problem2Spec {
  DipoleArray dipoles;
  MotionLaw law;       // arc kind
  double s_F = 0.75;
  int M = 80;
  double lambda = 1e-6;
  double eta = 1e-4;
  double beta = 0.1;
  DiskQuadrature quad;
  Eigen::VectorXd alpha0;
  double theta0 = 1e-6;
  Eigen::VectorXd alpha_lower, alpha_upper;
  double theta_lower = 1e-10, theta_upper = 10.0;

  double kappa() const { return s_F / M; }
  void validate() const;
};

/// Cost split. Problem 1 uses tracking + alpha_penalty; Problem 2 uses all
/// four (tracking F1, time_penalty F2, alpha_penalty F3, speed_penalty F4).
struct CostParts {
  double tracking = 0.0;
  double time_penalty = 0.0;
  double alpha_penalty = 0.0;
  double speed_penalty = 0.0;

  double total() const { return tracking + time_penalty + alpha_penalty + speed_penalty; }
};

/// Discrete fixed-final-time functional. Assembles the pulled-back matrices
/// P-hat_i^n at the node times and the interval-averaged targets once; eval
/// and grad are then pure functions of the path.
class Problem1Objective {
public:
  explicit Problem1Objective(const Problem1Spec& spec);

  const Problem1Spec& spec() const { return spec_; }

  CostParts eval(const ControlPath& path) const;
  /// Gradient w.r.t. free nodes 1..N, one row per node.
  Eigen::MatrixXd grad(const ControlPath& path) const;

  // Flat free-variable view (row-major over nodes 1..N) for the optimizer.
  int num_free() const { return spec_.N * np_; }
  Eigen::VectorXd pack(const ControlPath& path) const;
  ControlPath unpack(const Eigen::VectorXd& x) const;
  Eigen::VectorXd lower_bounds() const;
  Eigen::VectorXd upper_bounds() const;
  double value_and_grad(const Eigen::VectorXd& x, Eigen::VectorXd* grad_out) const;

  /// One-step warm-start objective at node n (Algorithm-1 inner problem):
  ///   1/2 sum_i ||x^T Phat_i^n x - fhat_i^n||^2 + lambda/(2 tau^2) |x - xprev|^2
  double step_value_and_grad(int n, const Eigen::VectorXd& x, const Eigen::VectorXd& xprev,
                             Eigen::VectorXd* grad_out) const;

private:
  void check_feasible(const ControlPath& path) const;

  Problem1Spec spec_;
  int np_ = 0;
  // Phat_[n-1][q][i]: n_p x n_p; fhat_[n-1]: d x Q.
  std::vector<std::vector<std::vector<Eigen::MatrixXd>>> Phat_;
  std::vector<Eigen::MatrixXd> fhat_;
};

/// Discrete minimum-final-time functional over (alpha, theta).
class Problem2Objective {
public:
  explicit Problem2Objective(const Problem2Spec& spec);

  const Problem2Spec& spec() const { return spec_; }

  CostParts eval(const ControlPath& path) const;
  /// Gradients w.r.t. free alpha nodes (M x n_p) and free theta nodes (M).
  void grad(const ControlPath& path, Eigen::MatrixXd& grad_alpha,
            Eigen::VectorXd& grad_theta) const;

  int num_free() const { return spec_.M * (np_ + 1); }
  Eigen::VectorXd pack(const ControlPath& path) const;
  ControlPath unpack(const Eigen::VectorXd& x) const;
  Eigen::VectorXd lower_bounds() const;
  Eigen::VectorXd upper_bounds() const;
  double value_and_grad(const Eigen::VectorXd& x, Eigen::VectorXd* grad_out) const;

  /// One-step warm-start objective at node m (Algorithm-2 inner problem) over
  /// z = (x, y) in R^(n_p+1).
  double step_value_and_grad(int m, const Eigen::VectorXd& z, const Eigen::VectorXd& zprev,
                             Eigen::VectorXd* grad_out) const;

  double rho_scaled(int m, int i) const { return rho_prime_(i, m - 1); }
  double psi_scale(int m) const { return psi_half_(m - 1); }

private:
  void check_feasible(const ControlPath& path) const;

  Problem2Spec spec_;
  int np_ = 0;
  std::vector<std::vector<std::vector<Eigen::MatrixXd>>> Ptilde_;  // [m-1][q][i]
  Eigen::MatrixXd rho_prime_;  // d x M, rho'_i(s^m)
  Eigen::VectorXd psi_half_;   // M, psi-tilde^(d/2)(s^m)
};

/// Trapezoid-consistent recursion t^i = t^(i-1) + 2 kappa / (theta^i + theta^(i-1)).
/// Returns the recovered final time and all nodal times t^0..t^M.
std::pair<double, Eigen::VectorXd> recover_final_time(const Eigen::VectorXd& speed,
                                                      double kappa);

}  // namespace kelvin
