#include "kelvin/field.hpp"

#include <cmath>
#include <string>

namespace kelvin {

namespace {

void check_point(const DipoleArray& dipoles, const Eigen::VectorXd& x) {
  if (x.size() != dipoles.dim) {
    throw std::invalid_argument("field evaluation point has wrong dimension");
  }
  for (int i = 0; i < dipoles.count(); ++i) {
    const double dist = (x - dipoles.positions.col(i)).norm();
    if (dist < kSingularGuardRadius) {
      throw SingularPointError("evaluation point within guard radius of dipole " +
                               std::to_string(i));
    }
  }
}

// Column of the field matrix for one dipole, r = x - x_i:
//   H_i = (d*(r.dhat)*r - |r|^2 dhat) / |r|^(d+2)
Eigen::VectorXd dipole_column(int d, const Eigen::VectorXd& r, const Eigen::VectorXd& dhat) {
  const double r2 = r.squaredNorm();
  const double rn = std::sqrt(r2);
  const double denom = std::pow(rn, d + 2);
  return (d * r.dot(dhat) * r - r2 * dhat) / denom;
}

// Jacobian of H_i with respect to x. Differentiating the closed form above:
//   dH_i/dx = [d*(r dhat^T + (r.dhat) I) - 2 dhat r^T] / |r|^(d+2)
//             - (d+2) H_i r^T / |r|^2
Eigen::MatrixXd dipole_jacobian(int d, const Eigen::VectorXd& r, const Eigen::VectorXd& dhat) {
  const double r2 = r.squaredNorm();
  const double rn = std::sqrt(r2);
  const double denom = std::pow(rn, d + 2);
  Eigen::MatrixXd num_grad = d * (r * dhat.transpose() +
                                  r.dot(dhat) * Eigen::MatrixXd::Identity(d, d)) -
                             2.0 * dhat * r.transpose();
  const Eigen::VectorXd h = (d * r.dot(dhat) * r - r2 * dhat) / denom;
  return num_grad / denom - (d + 2) * h * r.transpose() / r2;
}

}  // namespace

DipoleArray DipoleArray::ring(int n, double radius) {
  DipoleArray out;
  out.dim = 2;
  out.positions.resize(2, n);
  out.directions.resize(2, n);
  for (int k = 0; k < n; ++k) {
    const double angle = 2.0 * M_PI * k / n;
    const Eigen::Vector2d u(std::cos(angle), std::sin(angle));
    out.positions.col(k) = radius * u;
    out.directions.col(k) = u;
  }
  return out;
}

void DipoleArray::validate(const Eigen::VectorXd& domain_center, double domain_radius) const {
  if (dim != 2 && dim != 3) {
    throw std::invalid_argument("dipole array dimension must be 2 or 3");
  }
  if (positions.rows() != dim || directions.rows() != dim ||
      positions.cols() != directions.cols()) {
    throw std::invalid_argument("dipole position/direction shape mismatch");
  }
  for (int i = 0; i < count(); ++i) {
    if (std::abs(directions.col(i).norm() - 1.0) > 1e-12) {
      throw std::invalid_argument("dipole direction " + std::to_string(i) + " is not unit");
    }
    if ((positions.col(i) - domain_center).norm() <= domain_radius) {
      throw std::invalid_argument("dipole " + std::to_string(i) +
                                  " lies inside the closed domain");
    }
  }
}

Eigen::MatrixXd eval_dipole_field(const DipoleArray& dipoles, const Eigen::VectorXd& x) {
  check_point(dipoles, x);
  const int d = dipoles.dim;
  const int np = dipoles.count();
  Eigen::MatrixXd H(d, np);
  for (int i = 0; i < np; ++i) {
    H.col(i) = dipole_column(d, x - dipoles.positions.col(i), dipoles.directions.col(i));
  }
  return H;
}

std::vector<Eigen::MatrixXd> eval_field_jacobian(const DipoleArray& dipoles,
                                                 const Eigen::VectorXd& x) {
  check_point(dipoles, x);
  const int d = dipoles.dim;
  std::vector<Eigen::MatrixXd> jac(dipoles.count());
  for (int i = 0; i < dipoles.count(); ++i) {
    jac[i] = dipole_jacobian(d, x - dipoles.positions.col(i), dipoles.directions.col(i));
  }
  return jac;
}

FieldSample sample_field(const DipoleArray& dipoles, const Eigen::VectorXd& x) {
  check_point(dipoles, x);
  const int d = dipoles.dim;
  const int np = dipoles.count();

  FieldSample s;
  s.H.resize(d, np);
  s.jacobians.resize(np);
  for (int i = 0; i < np; ++i) {
    const Eigen::VectorXd r = x - dipoles.positions.col(i);
    const Eigen::VectorXd dhat = dipoles.directions.col(i);
    s.H.col(i) = dipole_column(d, r, dhat);
    s.jacobians[i] = dipole_jacobian(d, r, dhat);
  }

  // (P_k)_{ij} = (d_k H_i)^T H_j + H_i^T (d_k H_j); symmetrized so the
  // factor-2 gradient formulas downstream are exact.
  s.P.assign(d, Eigen::MatrixXd::Zero(np, np));
  for (int k = 0; k < d; ++k) {
    Eigen::MatrixXd& Pk = s.P[k];
    for (int i = 0; i < np; ++i) {
      for (int j = 0; j < np; ++j) {
        Pk(i, j) = s.jacobians[i].col(k).dot(s.H.col(j)) +
                   s.H.col(i).dot(s.jacobians[j].col(k));
      }
    }
    Pk = 0.5 * (Pk + Pk.transpose()).eval();
  }
  return s;
}

std::vector<Eigen::MatrixXd> eval_P(const DipoleArray& dipoles, const Eigen::VectorXd& x) {
  return sample_field(dipoles, x).P;
}

Eigen::VectorXd kelvin_force(const DipoleArray& dipoles, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& alpha) {
  const FieldSample s = sample_field(dipoles, x);
  Eigen::VectorXd force(dipoles.dim);
  for (int k = 0; k < dipoles.dim; ++k) {
    force(k) = alpha.dot(s.P[k] * alpha);
  }
  return force;
}

Eigen::VectorXd kelvin_force_via_jacobian(const DipoleArray& dipoles, const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& alpha) {
  check_point(dipoles, x);
  const int d = dipoles.dim;
  Eigen::VectorXd h = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < dipoles.count(); ++i) {
    const Eigen::VectorXd r = x - dipoles.positions.col(i);
    const Eigen::VectorXd dhat = dipoles.directions.col(i);
    h += alpha(i) * dipole_column(d, r, dhat);
    jac += alpha(i) * dipole_jacobian(d, r, dhat);
  }
  return 2.0 * jac.transpose() * h;
}

}  // namespace kelvin
