#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace kelvin {

/// Raised when a field evaluation point falls within the guard radius of a
/// dipole position. Dipoles live outside the computational domain, so a
/// legitimate run never triggers this.
class SingularPointError : public std::domain_error {
public:
  explicit SingularPointError(const std::string& what) : std::domain_error(what) {}
};

inline constexpr double kSingularGuardRadius = 1e-9;

/// Fixed magnetic point sources: positions and unit directions are data,
/// only the per-dipole intensities are controlled.
struct DipoleArray {
  int dim = 2;                 // spatial dimension, 2 or 3
  Eigen::MatrixXd positions;   // dim x n_p
  Eigen::MatrixXd directions;  // dim x n_p, unit columns

  int count() const { return static_cast<int>(positions.cols()); }

  /// n dipoles on a circle of given radius, radially directed
  /// (positions r*(cos k*2pi/n, sin k*2pi/n), same unit vectors as directions).
  static DipoleArray ring(int n, double radius);

  /// Checks unit directions and that every dipole lies strictly outside the
  /// closed ball of the given center/radius. Throws std::invalid_argument.
  void validate(const Eigen::VectorXd& domain_center, double domain_radius) const;
};

/// Everything the objective needs at a single point: per-dipole fields,
/// their Jacobians, and the intensity-space matrices P_k with
/// component k of grad|H|^2 = alpha^T P_k alpha.
struct FieldSample {
  Eigen::MatrixXd H;                       // dim x n_p
  std::vector<Eigen::MatrixXd> jacobians;  // n_p matrices, dim x dim
  std::vector<Eigen::MatrixXd> P;          // dim matrices, n_p x n_p, symmetric
};

/// Per-dipole field matrix: column i is (d*(r r^T)/|r|^2 - I) d_i / |r|^d
/// with r = x - x_i.
Eigen::MatrixXd eval_dipole_field(const DipoleArray& dipoles, const Eigen::VectorXd& x);

/// Analytic Jacobian of each column of the field matrix.
std::vector<Eigen::MatrixXd> eval_field_jacobian(const DipoleArray& dipoles,
                                                 const Eigen::VectorXd& x);

/// The d matrices P_k(x), symmetrized after assembly.
std::vector<Eigen::MatrixXd> eval_P(const DipoleArray& dipoles, const Eigen::VectorXd& x);

/// Field, Jacobians and P in one pass (shares the per-dipole geometry work).
FieldSample sample_field(const DipoleArray& dipoles, const Eigen::VectorXd& x);

/// Kelvin force in unit constants: component k is alpha^T P_k(x) alpha.
Eigen::VectorXd kelvin_force(const DipoleArray& dipoles, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& alpha);

/// Independent assembly route via the identity grad|H|^2 = 2 J_H^T H on the
/// total field. Agrees with kelvin_force to roundoff; also the cheap path for
/// dense grid evaluations.
Eigen::VectorXd kelvin_force_via_jacobian(const DipoleArray& dipoles, const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& alpha);

}  // namespace kelvin
