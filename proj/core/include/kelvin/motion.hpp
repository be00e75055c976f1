#pragma once

#include <Eigen/Dense>
#include <vector>

#include "kelvin/field.hpp"

namespace kelvin {

/// Named parametric vector curve with first derivative. The closed set of
/// families covers the trajectories used in practice; tabulated data falls
/// back to piecewise-linear interpolation with exact nodal derivatives.
struct Curve {
  enum class Kind { Constant, Line, CircleArc, Tabulated };

  Kind kind = Kind::Constant;
  Eigen::VectorXd offset;     // Constant: value. Line: value at t=0.
  Eigen::VectorXd velocity;   // Line: constant derivative.
  // CircleArc: offset + amplitude*(cos(a+b*t), sin(a+b*t)), 2-D only.
  double amplitude = 0.0;
  double angle0 = 0.0;
  double angle_rate = 0.0;
  // Tabulated: uniform parameter grid on [0, horizon].
  Eigen::VectorXd table_params;   // sorted knots
  Eigen::MatrixXd table_values;   // dim x knots

  static Curve constant(const Eigen::VectorXd& value);
  static Curve line(const Eigen::VectorXd& start, const Eigen::VectorXd& velocity);
  static Curve circle_arc(const Eigen::VectorXd& center, double amplitude,
                          double angle0, double angle_rate);
  static Curve tabulated(const Eigen::VectorXd& params, const Eigen::MatrixXd& values);

  Eigen::VectorXd value(double t) const;
  Eigen::VectorXd derivative(double t) const;
  int dim() const;
};

/// Scalar curve for the domain scaling psi (resp. psi-tilde).
struct ScalarCurve {
  enum class Kind { Constant, Linear, Tabulated };

  Kind kind = Kind::Constant;
  double c0 = 1.0;
  double slope = 0.0;
  Eigen::VectorXd table_params;
  Eigen::VectorXd table_values;

  static ScalarCurve constant(double value);
  static ScalarCurve linear(double start, double slope);
  static ScalarCurve tabulated(const Eigen::VectorXd& params, const Eigen::VectorXd& values);

  double value(double t) const;
  double derivative(double t) const;
};

struct ReferenceDisk {
  Eigen::VectorXd center;
  double radius = 0.0;
};

/// Moving subdomain X(param, xhat) = translation(param) + scale(param)*xhat.
/// Time kind: translation = phi over [0,T]. Arc kind: translation = rho over
/// [0,s_F], with rho unit-speed so the parameter is arc length.
struct MotionLaw {
  enum class Kind { Time, Arc };

  Kind kind = Kind::Time;
  ReferenceDisk disk;
  Curve translation;
  ScalarCurve scaling;
  double horizon = 1.0;  // T or s_F

  Eigen::VectorXd map_point(double param, const Eigen::VectorXd& xhat) const;
  double scale(double param) const { return scaling.value(param); }
  Eigen::VectorXd tangent(double param) const { return translation.derivative(param); }

  /// Arc laws must be parametrized by arc length: |rho'| = 1 at n_check
  /// uniformly spaced parameters. Throws std::invalid_argument on violation.
  void check_unit_speed(int n_check = 81) const;

  /// All boundary points of X(param, disk) at the quadrature angles must lie
  /// strictly inside the ball (domain_center, domain_radius), checked at
  /// n_params grid parameters. Throws std::invalid_argument on violation.
  void check_containment(const Eigen::VectorXd& domain_center, double domain_radius,
                         int n_params, int n_angles = 16) const;
};

/// Desired force field f(t, x).
struct TargetField {
  enum class Kind { Constant, Rotating, Tabulated };

  Kind kind = Kind::Constant;
  Eigen::VectorXd constant_value;
  // Rotating: amplitude*(sin(a+b*t), cos-phase partner), i.e.
  // f(t) = amplitude*(sin(angle0+rate*t), -cos(angle0+rate*t)). 2-D only.
  double amplitude = 0.0;
  double angle0 = 0.0;
  double angle_rate = 0.0;
  // Tabulated in time, space independent, linear interpolation.
  Eigen::VectorXd table_params;
  Eigen::MatrixXd table_values;  // dim x knots

  static TargetField constant(const Eigen::VectorXd& value);
  static TargetField rotating(double amplitude, double angle0, double angle_rate);
  static TargetField tabulated(const Eigen::VectorXd& params, const Eigen::MatrixXd& values);

  Eigen::VectorXd eval(double t, const Eigen::VectorXd& x) const;
  int dim() const;
};

/// Fixed node/weight rule on the reference disk for all L2(D-hat) integrals.
struct DiskQuadrature {
  Eigen::MatrixXd nodes;    // dim x Q, absolute coordinates
  Eigen::VectorXd weights;  // Q positive weights summing to the disk area

  int size() const { return static_cast<int>(weights.size()); }
};

/// Polar tensor rule: Gauss-Legendre(n_r) in radius with Jacobian weight r,
/// uniform trapezoid (= rectangle, periodic) with n_phi angles.
DiskQuadrature build_disk_quadrature(const ReferenceDisk& disk, int n_r = 8, int n_phi = 16);

/// Gauss-Legendre nodes/weights on [a, b].
void gauss_legendre(int n, double a, double b, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

/// Pulled-back matrices at every quadrature node:
///   P_i(X(param, node)) * scale(param)^(d/2), i = 1..d.
/// Result: per node, the d matrices (each n_p x n_p).
std::vector<std::vector<Eigen::MatrixXd>> pullback_P(const DipoleArray& dipoles,
                                                     const MotionLaw& law, double param,
                                                     const DiskQuadrature& quad);

/// Interval average (1/tau) int_{t^(n-1)}^{t^n} f_i(t, X(t,xhat)) psi^(d/2) dt
/// per quadrature node, by a 2-point Gauss rule in time. Returns dim x Q.
Eigen::MatrixXd time_averaged_target(const TargetField& target, const MotionLaw& law,
                                     int n, double tau, const DiskQuadrature& quad);

}  // namespace kelvin
