#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "kelvin/config.hpp"
#include "kelvin/optimizer.hpp"

using namespace kelvin;

namespace {

// Separable convex quadratic sum (x_i - 3)^2 with analytic gradient.
double quadratic_at_3(const Eigen::VectorXd& x, Eigen::VectorXd* g) {
  Eigen::VectorXd r = x.array() - 3.0;
  if (g != nullptr) *g = 2.0 * r;
  return r.squaredNorm();
}

}  // namespace

TEST_SUITE("optimizer") {

TEST_CASE("box projection") {
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(3, -2.0);
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(3, 2.0);
  Eigen::VectorXd x(3);
  x << -5.0, 0.0, 5.0;
  Eigen::VectorXd p = project_box(x, lo, hi);
  CHECK(p(0) == -2.0);
  CHECK(p(1) == 0.0);
  CHECK(p(2) == 2.0);
  CHECK((project_box(p, lo, hi) - p).norm() == 0.0);

  Eigen::VectorXd one(1), l1(1), h1(1);
  one << 3.0;
  l1 << -2.0;
  h1 << 2.0;
  CHECK(project_box(one, l1, h1)(0) == 2.0);
}

TEST_CASE("projected gradient residual") {
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(2, -2.0);
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(2, 2.0);

  // Interior point, zero gradient: stationary.
  Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
  CHECK(projected_gradient_residual(x, Eigen::VectorXd::Zero(2), lo, hi) == 0.0);

  // At the upper bound with a gradient pushing outward: still stationary.
  Eigen::VectorXd at_bound = Eigen::VectorXd::Constant(2, 2.0);
  Eigen::VectorXd outward = Eigen::VectorXd::Constant(2, -1.0);
  CHECK(projected_gradient_residual(at_bound, outward, lo, hi) == 0.0);

  // min (x-2)^2 on [-2,2]: x = 2 has gradient 0, hence residual 0.
  Eigen::VectorXd x1(1), g1(1), l1(1), h1(1);
  x1 << 2.0;
  g1 << 0.0;
  l1 << -2.0;
  h1 << 2.0;
  CHECK(projected_gradient_residual(x1, g1, l1, h1) == 0.0);

  // Interior point with nonzero gradient is not stationary.
  Eigen::VectorXd g = Eigen::VectorXd::Constant(2, 0.5);
  CHECK(projected_gradient_residual(x, g, lo, hi) == doctest::Approx(g.norm()));
}

TEST_CASE("convex quadratic with active bounds") {
  const int n = 10;
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, -2.0);
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(n, 2.0);
  OptimizerOptions opts;
  opts.tol = 1e-8;
  RunReport rep = solve(quadratic_at_3, Eigen::VectorXd::Zero(n), lo, hi, opts);
  CHECK(rep.converged);
  CHECK(rep.final_residual <= 1e-8);
  CHECK((rep.solution.array() - 2.0).abs().maxCoeff() <= 1e-8);
  for (int i = 0; i < n; ++i) CHECK(rep.active_set[i] == 1);
}

TEST_CASE("interior optimum leaves the active set empty") {
  const int n = 6;
  auto f = [](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    Eigen::VectorXd r = x.array() - 1.0;
    if (g != nullptr) *g = 2.0 * r;
    return r.squaredNorm();
  };
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, -2.0);
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(n, 2.0);
  OptimizerOptions opts;
  opts.tol = 1e-8;
  RunReport rep = solve(f, Eigen::VectorXd::Zero(n), lo, hi, opts);
  CHECK(rep.converged);
  CHECK((rep.solution.array() - 1.0).abs().maxCoeff() <= 1e-8);
  for (int i = 0; i < n; ++i) CHECK(rep.active_set[i] == 0);
}

TEST_CASE("solves are deterministic and monotone") {
  RunConfig cfg = load_preset("paper_p1_f1");
  cfg.problem1.N = 8;
  Problem1Objective obj(cfg.problem1);
  auto fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    return obj.value_and_grad(x, g);
  };
  Eigen::VectorXd x0 = Eigen::VectorXd::Constant(obj.num_free(), 0.5);
  OptimizerOptions opts;
  opts.tol = 1e-4;
  RunReport a = solve(fn, x0, obj.lower_bounds(), obj.upper_bounds(), opts);
  RunReport b = solve(fn, x0, obj.lower_bounds(), obj.upper_bounds(), opts);

  CHECK(a.converged);
  REQUIRE(a.solution.size() == b.solution.size());
  CHECK((a.solution - b.solution).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(a.trace.size() == b.trace.size());
  for (size_t k = 0; k < a.trace.size(); ++k) {
    CHECK(a.trace[k].cost == b.trace[k].cost);
    CHECK(a.trace[k].residual == b.trace[k].residual);
  }
  for (size_t k = 1; k < a.trace.size(); ++k) {
    CHECK(a.trace[k].cost <= a.trace[k - 1].cost);
  }
}

TEST_CASE("warm start reproduces trivial fixed points") {
  SUBCASE("zero target keeps the path at zero") {
    RunConfig cfg = load_preset("paper_p1_f1");
    cfg.problem1.N = 10;
    cfg.problem1.target = TargetField::constant(Eigen::Vector2d(0.0, 0.0));
    cfg.problem1.alpha0.setZero();
    Problem1Objective obj(cfg.problem1);
    ControlPath path = warm_start_p1(obj, 1e-6);
    CHECK(path.values.cwiseAbs().maxCoeff() <= 1e-6);
  }

  SUBCASE("zero time weight keeps (0, theta0) within the inner tolerance") {
    RunConfig cfg = load_preset("paper_p2");
    cfg.problem2.M = 10;
    cfg.problem2.beta = 0.0;
    cfg.problem2.alpha0.setZero();
    Problem2Objective obj(cfg.problem2);
    ControlPath path = warm_start_p2(obj, 1e-3);
    // x = 0 has zero intensity gradient at every step, so the intensities
    // never move; the speed may slide toward its lower bound but starts and
    // stays within the inner tolerance of theta0 (both are tiny).
    CHECK(path.values.cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((path.speed.array() - cfg.problem2.theta0).abs().maxCoeff() <= 1e-3);
    CHECK_NOTHROW(obj.eval(path));
  }
}

TEST_CASE("raising the time weight does not lower the first warm speed") {
  RunConfig cfg = load_preset("paper_p2");
  cfg.problem2.M = 10;
  Problem2Objective obj_lo(cfg.problem2);
  Problem2Spec hi_spec = cfg.problem2;
  hi_spec.beta = 10.0 * cfg.problem2.beta;
  Problem2Objective obj_hi(hi_spec);
  ControlPath lo = warm_start_p2(obj_lo);
  ControlPath hi = warm_start_p2(obj_hi);
  CHECK(hi.speed(1) >= lo.speed(1) - 1e-9);
}

TEST_CASE("warm path keeps the left dipole quiet at early times") {
  RunConfig cfg = load_preset("paper_p1_f1");
  Problem1Objective obj(cfg.problem1);
  ControlPath path = warm_start_p1(obj);
  // Dipole at angle pi (index 4) sits next to the starting disk position;
  // its first-step intensity magnitude is below the mean across dipoles.
  const Eigen::VectorXd first = path.values.row(1).transpose().cwiseAbs();
  CHECK(first(4) < first.mean());
}

TEST_CASE("strong increment penalty glues consecutive warm steps") {
  RunConfig cfg = load_preset("paper_p1_f1");
  cfg.problem1.lambda = 1e6;
  Problem1Objective obj(cfg.problem1);
  ControlPath path = warm_start_p1(obj);
  for (int n = 1; n <= cfg.problem1.N; ++n) {
    CHECK((path.values.row(n) - path.values.row(n - 1)).norm() <= 1e-3);
  }
}

TEST_CASE("warm-start path is feasible and improves on the trivial start") {
  RunConfig cfg = load_preset("paper_p2");
  cfg.problem2.M = 20;
  Problem2Objective obj(cfg.problem2);
  ControlPath warm = warm_start_p2(obj);
  CHECK_NOTHROW(obj.eval(warm));
  CHECK((warm.speed.array() >= cfg.problem2.theta_lower).all());
  CHECK((warm.speed.array() <= cfg.problem2.theta_upper).all());

  ControlPath trivial;
  trivial.values = cfg.problem2.alpha0.transpose().replicate(cfg.problem2.M + 1, 1);
  trivial.speed = Eigen::VectorXd::Constant(cfg.problem2.M + 1, cfg.problem2.theta0);
  CHECK(obj.eval(warm).total() < obj.eval(trivial).total());
}

}  // TEST_SUITE
