#include "kelvin/transport.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kelvin {

TransportMesh build_mesh(int mesh_n) {
  if (mesh_n < 2) throw std::invalid_argument("mesh_n must be at least 2");
  TransportMesh mesh;
  mesh.n = mesh_n;
  mesh.h = 2.1 / mesh_n;

  const int nn = mesh_n + 1;
  mesh.nodes.resize(nn * nn, 2);
  mesh.dirichlet.assign(nn * nn, 0);
  for (int j = 0; j < nn; ++j) {
    for (int i = 0; i < nn; ++i) {
      const int id = j * nn + i;
      mesh.nodes(id, 0) = mesh.x0 + mesh.h * i;
      mesh.nodes(id, 1) = mesh.x0 + mesh.h * j;
      if (mesh.nodes.row(id).norm() >= 1.0) mesh.dirichlet[id] = 1;
    }
  }

  mesh.triangles.resize(2 * mesh_n * mesh_n, 3);
  int t = 0;
  for (int j = 0; j < mesh_n; ++j) {
    for (int i = 0; i < mesh_n; ++i) {
      const int v00 = j * nn + i;
      const int v10 = v00 + 1;
      const int v01 = v00 + nn;
      const int v11 = v01 + 1;
      mesh.triangles.row(t++) << v00, v10, v11;
      mesh.triangles.row(t++) << v00, v11, v01;
    }
  }

  mesh.lumped_mass.setZero(nn * nn);
  const double area = 0.5 * mesh.h * mesh.h;
  for (int k = 0; k < mesh.triangles.rows(); ++k) {
    for (int v = 0; v < 3; ++v) mesh.lumped_mass(mesh.triangles(k, v)) += area / 3.0;
  }
  return mesh;
}

double TransportMesh::interpolate(const Eigen::VectorXd& c, const Eigen::Vector2d& p) const {
  const int nn = n + 1;
  const double fx = (p.x() - x0) / h;
  const double fy = (p.y() - x0) / h;
  const int i = std::clamp(static_cast<int>(std::floor(fx)), 0, n - 1);
  const int j = std::clamp(static_cast<int>(std::floor(fy)), 0, n - 1);
  const double lx = fx - i;
  const double ly = fy - j;
  const int v00 = j * nn + i, v10 = v00 + 1, v01 = v00 + nn, v11 = v01 + 1;
  if (lx >= ly) {  // lower triangle (v00, v10, v11)
    return c(v00) * (1.0 - lx) + c(v10) * (lx - ly) + c(v11) * ly;
  }
  return c(v00) * (1.0 - ly) + c(v11) * lx + c(v01) * (ly - lx);
}

double TransportMesh::mass(const Eigen::VectorXd& c) const { return lumped_mass.dot(c); }

TransportSolver::TransportSolver(const TransportMesh& mesh, const TransportConfig& config)
    : mesh_(mesh), config_(config) {}

ConcentrationState TransportSolver::step(const ConcentrationState& state,
                                         const Eigen::MatrixX2d& b_nodes, double tau_pde) {
  if (tau_pde <= 0.0) throw std::invalid_argument("tau_pde must be positive");
  const int nn = static_cast<int>(mesh_.nodes.rows());
  const double eps = config_.eps;
  const double area = 0.5 * mesh_.h * mesh_.h;
  const double h_elem = mesh_.h * std::sqrt(2.0);  // longest edge

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh_.triangles.rows() * 9 + nn);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nn);

  for (int k = 0; k < mesh_.triangles.rows(); ++k) {
    const int v[3] = {mesh_.triangles(k, 0), mesh_.triangles(k, 1), mesh_.triangles(k, 2)};
    const Eigen::Vector2d p0 = mesh_.nodes.row(v[0]);
    const Eigen::Vector2d p1 = mesh_.nodes.row(v[1]);
    const Eigen::Vector2d p2 = mesh_.nodes.row(v[2]);

    // Constant P1 basis gradients.
    Eigen::Matrix<double, 2, 3> grads;
    grads.col(0) = Eigen::Vector2d(p1.y() - p2.y(), p2.x() - p1.x()) / (2.0 * area);
    grads.col(1) = Eigen::Vector2d(p2.y() - p0.y(), p0.x() - p2.x()) / (2.0 * area);
    grads.col(2) = Eigen::Vector2d(p0.y() - p1.y(), p1.x() - p0.x()) / (2.0 * area);

    Eigen::Matrix<double, 3, 2> b_loc;
    for (int a = 0; a < 3; ++a) b_loc.row(a) = b_nodes.row(v[a]);
    const Eigen::Vector2d b_bar = b_loc.colwise().mean();
    const Eigen::Vector2d b_sum = b_loc.colwise().sum();
    double div_b = 0.0;
    for (int a = 0; a < 3; ++a) div_b += b_loc.row(a).dot(grads.col(a));

    // SUPG parameter; the coth form degenerates to h^2/(12 eps) at low Peclet.
    double tau_k = 0.0;
    if (config_.supg) {
      const double bmag = b_bar.norm();
      const double peclet = bmag * h_elem / (2.0 * eps);
      if (peclet < 1e-3) {
        tau_k = h_elem * h_elem / (12.0 * eps);
      } else {
        tau_k = h_elem / (2.0 * bmag) * (1.0 / std::tanh(peclet) - 1.0 / peclet);
      }
    }

    const double c_old_sum = state.c(v[0]) + state.c(v[1]) + state.c(v[2]);
    for (int a = 0; a < 3; ++a) {
      if (mesh_.dirichlet[v[a]]) continue;
      const double w_supg = tau_k * b_bar.dot(grads.col(a));  // streamline test weight
      for (int b = 0; b < 3; ++b) {
        double entry = 0.0;
        // Galerkin: eps grad c . grad v - c b . grad v (conservative weak form)
        entry += eps * area * grads.col(b).dot(grads.col(a));
        entry -= grads.col(a).dot((area / 12.0) * (b_sum + b_loc.row(b).transpose()));
        // SUPG: (c/tau + b.grad c + c div b) multiplied by the streamline test
        entry += w_supg * (area / 3.0) / tau_pde;
        entry += w_supg * area * b_bar.dot(grads.col(b));
        entry += w_supg * (area / 3.0) * div_b;
        trips.emplace_back(v[a], v[b], entry);
      }
      rhs(v[a]) += w_supg * (area / 3.0) / tau_pde * c_old_sum;
    }
  }

  // Lumped mass for the Galerkin time term; Dirichlet rows pinned to zero.
  for (int i = 0; i < nn; ++i) {
    if (mesh_.dirichlet[i]) {
      trips.emplace_back(i, i, 1.0);
    } else {
      trips.emplace_back(i, i, mesh_.lumped_mass(i) / tau_pde);
      rhs(i) += mesh_.lumped_mass(i) / tau_pde * state.c(i);
    }
  }

  Eigen::SparseMatrix<double> A(nn, nn);
  A.setFromTriplets(trips.begin(), trips.end());
  if (!pattern_analyzed_) {
    lu_.analyzePattern(A);
    pattern_analyzed_ = true;
  }
  lu_.factorize(A);
  if (lu_.info() != Eigen::Success) {
    throw std::runtime_error("transport step: singular linear system (mesh_n=" +
                             std::to_string(mesh_.n) + ")");
  }
  Eigen::VectorXd c_new = lu_.solve(rhs);
  const double rel_res = (A * c_new - rhs).norm() / std::max(rhs.norm(), 1e-300);
  if (rel_res > config_.linear_tol) {
    throw std::runtime_error("transport step: linear solve residual " +
                             std::to_string(rel_res) + " above tolerance");
  }

  ConcentrationState next;
  next.c = std::move(c_new);
  next.time = state.time + tau_pde;
  next.total_mass = mesh_.mass(next.c);
  return next;
}

Eigen::VectorXd initial_bump(const TransportMesh& mesh, const Eigen::Vector2d& center,
                             double radius) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(mesh.nodes.rows());
  for (int i = 0; i < mesh.nodes.rows(); ++i) {
    if (mesh.dirichlet[i]) continue;
    const double dist = (mesh.nodes.row(i).transpose() - center).norm();
    if (dist < radius) {
      const double s = std::cos(M_PI * dist / (2.0 * radius));
      c(i) = s * s;
    }
  }
  return c;
}

namespace {

Eigen::VectorXd interpolate_control(const ControlPath& path, double T_control, double t) {
  const int N = static_cast<int>(path.values.rows()) - 1;
  const double pos = std::clamp(t / T_control, 0.0, 1.0) * N;
  const int i = std::min(static_cast<int>(std::floor(pos)), N - 1);
  const double w = pos - i;
  return ((1.0 - w) * path.values.row(i) + w * path.values.row(i + 1)).transpose();
}

double containment_fraction(const TransportMesh& mesh, const Eigen::VectorXd& c,
                            const Eigen::Vector2d& disk_center, double disk_radius) {
  double inside = 0.0, total = 0.0;
  for (int i = 0; i < mesh.nodes.rows(); ++i) {
    const double m = mesh.lumped_mass(i) * c(i);
    total += m;
    if ((mesh.nodes.row(i).transpose() - disk_center).norm() <= disk_radius) inside += m;
  }
  return total > 0.0 ? inside / total : 0.0;
}

TransportStepRecord make_record(const TransportMesh& mesh, const ConcentrationState& state,
                                const MotionLaw& law, double t) {
  const Eigen::Vector2d center = law.map_point(t, law.disk.center);
  const double radius = law.scale(t) * law.disk.radius;
  TransportStepRecord rec;
  rec.time = t;
  rec.mass = state.total_mass;
  rec.containment = containment_fraction(mesh, state.c, center, radius);
  rec.min_c = state.c.minCoeff();
  rec.max_c = state.c.maxCoeff();
  return rec;
}

}  // namespace

TransportResult run_transport(const TransportConfig& config, const DipoleArray& dipoles,
                              const ControlPath& path, double T_control, const MotionLaw& law,
                              const std::vector<double>& snapshot_times) {
  const TransportMesh mesh = build_mesh(config.mesh_n);
  TransportSolver solver(mesh, config);
  const double tau_pde = config.T / config.time_steps;

  ConcentrationState state;
  state.c = initial_bump(mesh, config.bump_center, config.bump_radius);
  state.time = 0.0;
  state.total_mass = mesh.mass(state.c);

  TransportResult result;
  result.records.push_back(make_record(mesh, state, law, 0.0));
  auto maybe_snapshot = [&](double t_prev, double t_now) {
    for (double ts : snapshot_times) {
      if (ts > t_prev && ts <= t_now + 1e-12) result.snapshots.emplace_back(t_now, state.c);
    }
  };
  maybe_snapshot(-1.0, 0.0);

  Eigen::MatrixX2d b_nodes(mesh.nodes.rows(), 2);
  for (int k = 1; k <= config.time_steps; ++k) {
    const double t_new = k * tau_pde;
    const Eigen::VectorXd alpha = interpolate_control(path, T_control, t_new);
    for (int i = 0; i < mesh.nodes.rows(); ++i) {
      b_nodes.row(i) =
          kelvin_force_via_jacobian(dipoles, mesh.nodes.row(i).transpose(), alpha).transpose();
    }
    const double t_prev = state.time;
    state = solver.step(state, b_nodes, tau_pde);
    result.records.push_back(make_record(mesh, state, law, t_new));
    maybe_snapshot(t_prev, t_new);
  }
  result.final_c = state.c;
  return result;
}

}  // namespace kelvin
