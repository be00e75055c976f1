#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <utility>
#include <vector>

#include "kelvin/field.hpp"
#include "kelvin/motion.hpp"
#include "kelvin/objective.hpp"

namespace kelvin {

struct TransportConfig {
  double eps = 1e-5;     // diffusion coefficient, A = eps*I
  int mesh_n = 128;      // cells per side of the bounding square
  int time_steps = 160;  // backward-Euler steps over [0, T]
  double T = 1.0;
  Eigen::Vector2d bump_center{-0.75, 0.0};
  double bump_radius = 0.2;
  bool supg = true;      // plain Galerkin when false (low-Peclet comparisons)
  double linear_tol = 1e-10;
};

/// Uniform two-triangles-per-cell triangulation of the bounding square
/// [-1.05, 1.05]^2. Nodes with |x| >= 1 carry homogeneous Dirichlet data,
/// approximating the unit-disk boundary.
struct TransportMesh {
  int n = 0;
  double x0 = -1.05;
  double h = 0.0;
  Eigen::MatrixX2d nodes;
  Eigen::MatrixX3i triangles;
  std::vector<std::uint8_t> dirichlet;
  Eigen::VectorXd lumped_mass;  // row sums of the P1 mass matrix

  /// P1 interpolation at an arbitrary point of the square.
  double interpolate(const Eigen::VectorXd& c, const Eigen::Vector2d& p) const;
  /// Lumped-mass integral of the nodal field.
  double mass(const Eigen::VectorXd& c) const;
};

TransportMesh build_mesh(int mesh_n);

struct ConcentrationState {
  Eigen::VectorXd c;
  double time = 0.0;
  double total_mass = 0.0;
};

/// One backward-Euler step of d_t c + div(-eps grad c + c b) = 0 with SUPG
/// test enrichment; b_nodes holds the advecting force at every mesh node.
class TransportSolver {
public:
  TransportSolver(const TransportMesh& mesh, const TransportConfig& config);

  ConcentrationState step(const ConcentrationState& state,
                          const Eigen::MatrixX2d& b_nodes, double tau_pde);

private:
  const TransportMesh& mesh_;
  TransportConfig config_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  bool pattern_analyzed_ = false;
};

/// Smooth cosine bump cos^2(pi |x-xc| / (2 r)) inside radius r, 0 outside,
/// zeroed on Dirichlet nodes.
Eigen::VectorXd initial_bump(const TransportMesh& mesh, const Eigen::Vector2d& center,
                             double radius);

struct TransportStepRecord {
  double time = 0.0;
  double mass = 0.0;
  double containment = 0.0;  // mass fraction inside the moving disk
  double min_c = 0.0;
  double max_c = 0.0;
};

struct TransportResult {
  std::vector<TransportStepRecord> records;  // one per step, including t = 0
  std::vector<std::pair<double, Eigen::VectorXd>> snapshots;
  Eigen::VectorXd final_c;
};

/// Advances the bump initial condition to T with the Kelvin force of the
/// piecewise-linear-interpolated control path as the advecting field.
TransportResult run_transport(const TransportConfig& config, const DipoleArray& dipoles,
                              const ControlPath& path, double T_control, const MotionLaw& law,
                              const std::vector<double>& snapshot_times = {});

}  // namespace kelvin
