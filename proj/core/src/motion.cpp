#include "kelvin/motion.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace kelvin {

namespace {

// Piecewise-linear lookup: index of the interval containing t (clamped).
int locate(const Eigen::VectorXd& knots, double t) {
  const int n = static_cast<int>(knots.size());
  if (t <= knots(0)) return 0;
  if (t >= knots(n - 1)) return n - 2;
  int lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    (knots(mid) <= t ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

Curve Curve::constant(const Eigen::VectorXd& value) {
  Curve c;
  c.kind = Kind::Constant;
  c.offset = value;
  return c;
}

Curve Curve::line(const Eigen::VectorXd& start, const Eigen::VectorXd& velocity) {
  Curve c;
  c.kind = Kind::Line;
  c.offset = start;
  c.velocity = velocity;
  return c;
}

Curve Curve::circle_arc(const Eigen::VectorXd& center, double amplitude, double angle0,
                        double angle_rate) {
  if (center.size() != 2) {
    throw std::invalid_argument("circle_arc curves are 2-D");
  }
  Curve c;
  c.kind = Kind::CircleArc;
  c.offset = center;
  c.amplitude = amplitude;
  c.angle0 = angle0;
  c.angle_rate = angle_rate;
  return c;
}

Curve Curve::tabulated(const Eigen::VectorXd& params, const Eigen::MatrixXd& values) {
  if (params.size() < 2 || values.cols() != params.size()) {
    throw std::invalid_argument("tabulated curve needs >= 2 knots matching value columns");
  }
  Curve c;
  c.kind = Kind::Tabulated;
  c.table_params = params;
  c.table_values = values;
  return c;
}

int Curve::dim() const {
  switch (kind) {
    case Kind::Tabulated: return static_cast<int>(table_values.rows());
    default: return static_cast<int>(offset.size());
  }
}

Eigen::VectorXd Curve::value(double t) const {
  switch (kind) {
    case Kind::Constant: return offset;
    case Kind::Line: return offset + t * velocity;
    case Kind::CircleArc: {
      const double a = angle0 + angle_rate * t;
      return offset + amplitude * Eigen::Vector2d(std::cos(a), std::sin(a));
    }
    case Kind::Tabulated: {
      const int i = locate(table_params, t);
      const double w = (t - table_params(i)) / (table_params(i + 1) - table_params(i));
      return table_values.col(i) + w * (table_values.col(i + 1) - table_values.col(i));
    }
  }
  throw std::logic_error("unreachable");
}

Eigen::VectorXd Curve::derivative(double t) const {
  switch (kind) {
    case Kind::Constant: return Eigen::VectorXd::Zero(offset.size());
    case Kind::Line: return velocity;
    case Kind::CircleArc: {
      const double a = angle0 + angle_rate * t;
      return amplitude * angle_rate * Eigen::Vector2d(-std::sin(a), std::cos(a));
    }
    case Kind::Tabulated: {
      const int i = locate(table_params, t);
      return (table_values.col(i + 1) - table_values.col(i)) /
             (table_params(i + 1) - table_params(i));
    }
  }
  throw std::logic_error("unreachable");
}

ScalarCurve ScalarCurve::constant(double value) {
  ScalarCurve s;
  s.kind = Kind::Constant;
  s.c0 = value;
  return s;
}

ScalarCurve ScalarCurve::linear(double start, double slope) {
  ScalarCurve s;
  s.kind = Kind::Linear;
  s.c0 = start;
  s.slope = slope;
  return s;
}

ScalarCurve ScalarCurve::tabulated(const Eigen::VectorXd& params, const Eigen::VectorXd& values) {
  if (params.size() < 2 || values.size() != params.size()) {
    throw std::invalid_argument("tabulated scalar curve needs >= 2 matching knots");
  }
  ScalarCurve s;
  s.kind = Kind::Tabulated;
  s.table_params = params;
  s.table_values = values;
  return s;
}

double ScalarCurve::value(double t) const {
  switch (kind) {
    case Kind::Constant: return c0;
    case Kind::Linear: return c0 + slope * t;
    case Kind::Tabulated: {
      const int i = locate(table_params, t);
      const double w = (t - table_params(i)) / (table_params(i + 1) - table_params(i));
      return table_values(i) + w * (table_values(i + 1) - table_values(i));
    }
  }
  throw std::logic_error("unreachable");
}

double ScalarCurve::derivative(double t) const {
  switch (kind) {
    case Kind::Constant: return 0.0;
    case Kind::Linear: return slope;
    case Kind::Tabulated: {
      const int i = locate(table_params, t);
      return (table_values(i + 1) - table_values(i)) / (table_params(i + 1) - table_params(i));
    }
  }
  throw std::logic_error("unreachable");
}

Eigen::VectorXd MotionLaw::map_point(double param, const Eigen::VectorXd& xhat) const {
  if (param < -1e-12 || param > horizon + 1e-12) {
    throw std::out_of_range("motion parameter outside [0, horizon]");
  }
  return translation.value(param) + scaling.value(param) * xhat;
}

void MotionLaw::check_unit_speed(int n_check) const {
  if (kind != Kind::Arc) return;
  for (int i = 0; i < n_check; ++i) {
    const double s = horizon * i / (n_check - 1);
    const double speed = translation.derivative(s).norm();
    if (std::abs(speed - 1.0) > 1e-10) {
      throw std::invalid_argument("arc law is not unit speed at s = " + std::to_string(s));
    }
  }
}

void MotionLaw::check_containment(const Eigen::VectorXd& domain_center, double domain_radius,
                                  int n_params, int n_angles) const {
  if (disk.center.size() != 2) {
    throw std::invalid_argument("containment check implemented for 2-D disks");
  }
  for (int i = 0; i <= n_params; ++i) {
    const double p = horizon * i / n_params;
    for (int j = 0; j < n_angles; ++j) {
      const double a = 2.0 * M_PI * j / n_angles;
      Eigen::Vector2d xhat = disk.center;
      xhat += disk.radius * Eigen::Vector2d(std::cos(a), std::sin(a));
      const Eigen::VectorXd x = map_point(p, xhat);
      if ((x - domain_center).norm() >= domain_radius) {
        throw std::invalid_argument("moving disk leaves the domain at parameter " +
                                    std::to_string(p));
      }
    }
  }
}

TargetField TargetField::constant(const Eigen::VectorXd& value) {
  TargetField f;
  f.kind = Kind::Constant;
  f.constant_value = value;
  return f;
}

TargetField TargetField::rotating(double amplitude, double angle0, double angle_rate) {
  TargetField f;
  f.kind = Kind::Rotating;
  f.amplitude = amplitude;
  f.angle0 = angle0;
  f.angle_rate = angle_rate;
  return f;
}

TargetField TargetField::tabulated(const Eigen::VectorXd& params, const Eigen::MatrixXd& values) {
  if (params.size() < 2 || values.cols() != params.size()) {
    throw std::invalid_argument("tabulated target needs >= 2 knots matching value columns");
  }
  TargetField f;
  f.kind = Kind::Tabulated;
  f.table_params = params;
  f.table_values = values;
  return f;
}

int TargetField::dim() const {
  switch (kind) {
    case Kind::Constant: return static_cast<int>(constant_value.size());
    case Kind::Rotating: return 2;
    case Kind::Tabulated: return static_cast<int>(table_values.rows());
  }
  throw std::logic_error("unreachable");
}

Eigen::VectorXd TargetField::eval(double t, const Eigen::VectorXd& /*x*/) const {
  switch (kind) {
    case Kind::Constant: return constant_value;
    case Kind::Rotating: {
      const double a = angle0 + angle_rate * t;
      return amplitude * Eigen::Vector2d(std::sin(a), -std::cos(a));
    }
    case Kind::Tabulated: {
      const int i = locate(table_params, t);
      const double w = (t - table_params(i)) / (table_params(i + 1) - table_params(i));
      return table_values.col(i) + w * (table_values.col(i + 1) - table_values.col(i));
    }
  }
  throw std::logic_error("unreachable");
}

void gauss_legendre(int n, double a, double b, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre needs n >= 1");
  nodes.resize(n);
  weights.resize(n);
  // Newton iteration on P_n over [-1, 1], then affine map to [a, b].
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes(i) = a + 0.5 * (b - a) * (x + 1.0);
    weights(i) = (b - a) / ((1.0 - x * x) * dp * dp);
  }
}

DiskQuadrature build_disk_quadrature(const ReferenceDisk& disk, int n_r, int n_phi) {
  if (n_r < 1 || n_phi < 1) {
    throw std::invalid_argument("disk quadrature needs n_r, n_phi >= 1");
  }
  if (disk.center.size() != 2) {
    throw std::invalid_argument("disk quadrature implemented for 2-D disks");
  }
  Eigen::VectorXd rn, rw;
  gauss_legendre(n_r, 0.0, disk.radius, rn, rw);

  DiskQuadrature q;
  q.nodes.resize(2, n_r * n_phi);
  q.weights.resize(n_r * n_phi);
  const double wphi = 2.0 * M_PI / n_phi;
  int idx = 0;
  for (int i = 0; i < n_r; ++i) {
    for (int j = 0; j < n_phi; ++j) {
      const double a = wphi * j;
      q.nodes.col(idx) = disk.center +
                         rn(i) * Eigen::Vector2d(std::cos(a), std::sin(a));
      q.weights(idx) = rw(i) * rn(i) * wphi;  // polar Jacobian r
      ++idx;
    }
  }
  return q;
}

std::vector<std::vector<Eigen::MatrixXd>> pullback_P(const DipoleArray& dipoles,
                                                     const MotionLaw& law, double param,
                                                     const DiskQuadrature& quad) {
  const double scale = std::pow(law.scale(param), dipoles.dim / 2.0);
  std::vector<std::vector<Eigen::MatrixXd>> out(quad.size());
  for (int qn = 0; qn < quad.size(); ++qn) {
    const Eigen::VectorXd x = law.map_point(param, quad.nodes.col(qn));
    out[qn] = eval_P(dipoles, x);
    for (auto& Pk : out[qn]) Pk *= scale;
  }
  return out;
}

Eigen::MatrixXd time_averaged_target(const TargetField& target, const MotionLaw& law,
                                     int n, double tau, const DiskQuadrature& quad) {
  const int d = target.dim();
  Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(d, quad.size());
  // 2-point Gauss on [t^(n-1), t^n], exact when the integrand is linear in t.
  const double t0 = (n - 1) * tau;
  const double offs = tau * 0.5 / std::sqrt(3.0);
  const double tm = t0 + 0.5 * tau;
  for (const double t : {tm - offs, tm + offs}) {
    const double scale = std::pow(law.scale(t), d / 2.0);
    for (int qn = 0; qn < quad.size(); ++qn) {
      const Eigen::VectorXd x = law.map_point(t, quad.nodes.col(qn));
      avg.col(qn) += 0.5 * scale * target.eval(t, x);
    }
  }
  return avg;
}

}  // namespace kelvin
