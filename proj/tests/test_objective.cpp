#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "kelvin/config.hpp"
#include "kelvin/objective.hpp"

using namespace kelvin;

namespace {

constexpr double kPi = std::numbers::pi;

Problem1Spec baseline_p1_spec() {
  Problem1Spec spec;
  spec.dipoles = DipoleArray::ring(8, 1.2);
  spec.law.kind = MotionLaw::Kind::Time;
  spec.law.disk.center = Eigen::Vector2d(-0.75, 0.0);
  spec.law.disk.radius = 0.2;
  spec.law.translation = Curve::line(Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(1.0, 0.0));
  spec.law.scaling = ScalarCurve::constant(1.0);
  spec.law.horizon = 1.0;
  spec.target = TargetField::constant(Eigen::Vector2d(1.0, 0.0));
  spec.T = 1.0;
  spec.N = 40;
  spec.lambda = 1e-5;
  spec.quad = build_disk_quadrature(spec.law.disk, 8, 16);
  spec.alpha0 = Eigen::VectorXd::Zero(8);
  spec.alpha_lower = Eigen::VectorXd::Constant(8, -2.0);
  spec.alpha_upper = Eigen::VectorXd::Constant(8, 2.0);
  return spec;
}

Problem2Spec baseline_p2_spec() {
  Problem2Spec spec;
  spec.dipoles = DipoleArray::ring(8, 1.2);
  spec.law.kind = MotionLaw::Kind::Arc;
  spec.law.disk.center = Eigen::Vector2d(-0.375, 0.0);
  spec.law.disk.radius = 0.2;
  spec.law.translation = Curve::line(Eigen::Vector2d(-0.375, 0.0), Eigen::Vector2d(1.0, 0.0));
  spec.law.scaling = ScalarCurve::constant(1.0);
  spec.law.horizon = 0.75;
  spec.s_F = 0.75;
  spec.M = 40;
  spec.lambda = 1e-6;
  spec.eta = 1e-4;
  spec.beta = 0.1;
  spec.quad = build_disk_quadrature(spec.law.disk, 8, 16);
  spec.alpha0 = Eigen::VectorXd::Zero(8);
  spec.theta0 = 1.0;
  spec.alpha_lower = Eigen::VectorXd::Constant(8, -1.0);
  spec.alpha_upper = Eigen::VectorXd::Constant(8, 1.0);
  spec.theta_lower = 1e-10;
  spec.theta_upper = 10.0;
  return spec;
}

ControlPath zero_path_p1(const Problem1Spec& spec) {
  ControlPath path;
  path.values = Eigen::MatrixXd::Zero(spec.N + 1, spec.alpha0.size());
  return path;
}

// Random feasible point with node 0 pinned, strictly interior to the box.
Eigen::VectorXd random_interior(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.1, 0.9);
  Eigen::VectorXd x(lo.size());
  for (int i = 0; i < x.size(); ++i) {
    const double l = std::max(lo(i), -10.0);
    const double h = std::min(hi(i), 10.0);
    x(i) = l + u(rng) * (h - l);
  }
  return x;
}

template <typename Objective>
double max_fd_gradient_error(const Objective& obj, const Eigen::VectorXd& x,
                             std::mt19937& rng, int n_coords) {
  Eigen::VectorXd g;
  obj.value_and_grad(x, &g);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(x.size()) - 1);
  const double h = 1e-6;
  double worst = 0.0;
  for (int trial = 0; trial < n_coords; ++trial) {
    const int j = pick(rng);
    Eigen::VectorXd xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    const double fd =
        (obj.value_and_grad(xp, nullptr) - obj.value_and_grad(xm, nullptr)) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - g(j)) / std::max(1.0, std::abs(g(j))));
  }
  return worst;
}

}  // namespace

TEST_SUITE("objective") {

TEST_CASE("fixed-horizon baseline has closed-form cost") {
  Problem1Spec spec = baseline_p1_spec();
  Problem1Objective obj(spec);
  CostParts parts = obj.eval(zero_path_p1(spec));
  CHECK(parts.alpha_penalty == 0.0);
  CHECK(std::abs(parts.tracking - 0.02 * kPi) <= 1e-10);
  CHECK(std::abs(parts.total() - 0.02 * kPi) <= 1e-10);
}

TEST_CASE("minimum-time baseline has closed-form cost") {
  Problem2Spec spec = baseline_p2_spec();
  Problem2Objective obj(spec);
  ControlPath path;
  path.values = Eigen::MatrixXd::Zero(spec.M + 1, 8);
  path.speed = Eigen::VectorXd::Ones(spec.M + 1);
  CostParts parts = obj.eval(path);
  CHECK(parts.alpha_penalty == 0.0);
  CHECK(parts.speed_penalty == 0.0);
  CHECK(std::abs(parts.tracking - 0.75 * 0.02 * kPi) <= 1e-10);
  CHECK(std::abs(parts.time_penalty - 0.075) <= 1e-12);
  CHECK(std::abs(parts.total() - (0.75 * 0.02 * kPi + 0.075)) <= 1e-10);
}

TEST_CASE("zero target and zero controls give zero tracking") {
  Problem1Spec spec = baseline_p1_spec();
  spec.target = TargetField::constant(Eigen::Vector2d(0.0, 0.0));
  Problem1Objective obj(spec);
  CostParts parts = obj.eval(zero_path_p1(spec));
  CHECK(parts.tracking == 0.0);
  CHECK(parts.alpha_penalty == 0.0);
}

TEST_CASE("cost parts are nonnegative and additive") {
  RunConfig cfg = load_preset("paper_p2");
  Problem2Objective obj(cfg.problem2);
  std::mt19937 rng(7);
  Eigen::VectorXd x = random_interior(obj.lower_bounds(), obj.upper_bounds(), rng);
  ControlPath path = obj.unpack(x);
  CostParts parts = obj.eval(path);
  CHECK(parts.tracking >= 0.0);
  CHECK(parts.time_penalty >= 0.0);
  CHECK(parts.alpha_penalty >= 0.0);
  CHECK(parts.speed_penalty >= 0.0);
  CHECK(obj.value_and_grad(x, nullptr) ==
        doctest::Approx(parts.total()).epsilon(1e-14));
}

TEST_CASE("gradients match central finite differences") {
  std::mt19937 rng(12345);

  SUBCASE("fixed horizon") {
    RunConfig cfg = load_preset("paper_p1_f1");
    cfg.problem1.N = 10;  // small N keeps the check fast, same integrand
    Problem1Objective obj(cfg.problem1);
    for (int seed = 0; seed < 5; ++seed) {
      Eigen::VectorXd x = random_interior(obj.lower_bounds(), obj.upper_bounds(), rng);
      CHECK(max_fd_gradient_error(obj, x, rng, 30) <= 1e-6);
    }
  }

  SUBCASE("minimum time") {
    RunConfig cfg = load_preset("paper_p2");
    cfg.problem2.M = 10;
    Problem2Objective obj(cfg.problem2);
    for (int seed = 0; seed < 5; ++seed) {
      Eigen::VectorXd x = random_interior(obj.lower_bounds(), obj.upper_bounds(), rng);
      CHECK(max_fd_gradient_error(obj, x, rng, 30) <= 1e-6);
    }
  }
}

TEST_CASE("increment penalty is invariant under dyadic refinement") {
  Problem1Spec coarse = baseline_p1_spec();
  coarse.N = 10;
  coarse.target = TargetField::constant(Eigen::Vector2d(0.0, 0.0));
  Problem1Spec fine = coarse;
  fine.N = 20;

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  ControlPath pc;
  pc.values.resize(coarse.N + 1, 8);
  pc.values.row(0).setZero();
  for (int n = 1; n <= coarse.N; ++n)
    for (int j = 0; j < 8; ++j) pc.values(n, j) = u(rng);

  ControlPath pf;
  pf.values.resize(fine.N + 1, 8);
  for (int n = 0; n <= coarse.N; ++n) pf.values.row(2 * n) = pc.values.row(n);
  for (int n = 0; n < coarse.N; ++n)
    pf.values.row(2 * n + 1) = 0.5 * (pc.values.row(n) + pc.values.row(n + 1));

  Problem1Objective oc(coarse), of(fine);
  CHECK(std::abs(oc.eval(pc).alpha_penalty - of.eval(pf).alpha_penalty) <= 1e-12);
}

TEST_CASE("constant paths carry no increment penalties") {
  Problem2Spec spec = baseline_p2_spec();
  spec.alpha0 = Eigen::VectorXd::Constant(8, 0.5);
  spec.theta0 = 2.0;
  Problem2Objective obj(spec);
  ControlPath path;
  path.values = Eigen::MatrixXd::Constant(spec.M + 1, 8, 0.5);
  path.speed = Eigen::VectorXd::Constant(spec.M + 1, 2.0);
  CostParts parts = obj.eval(path);
  CHECK(parts.alpha_penalty == 0.0);
  CHECK(parts.speed_penalty == 0.0);
}

TEST_CASE("time penalty is linear in its weight") {
  Problem2Spec spec = baseline_p2_spec();
  Problem2Spec spec2 = spec;
  spec2.beta = 2.0 * spec.beta;
  Problem2Objective obj(spec), obj2(spec2);

  std::mt19937 rng(11);
  Eigen::VectorXd x = random_interior(obj.lower_bounds(), obj.upper_bounds(), rng);
  ControlPath path = obj.unpack(x);
  CHECK(obj2.eval(path).time_penalty ==
        doctest::Approx(2.0 * obj.eval(path).time_penalty).epsilon(1e-14));

  // The extra beta contributes exactly -beta*kappa/theta^2 to each theta slot
  // and nothing to the intensity slots.
  Eigen::VectorXd g, g2;
  obj.value_and_grad(x, &g);
  obj2.value_and_grad(x, &g2);
  Eigen::VectorXd diff = g2 - g;
  const int np = 8;
  CHECK(diff.head(spec.M * np).cwiseAbs().maxCoeff() <= 1e-12);
  const double kappa = spec.kappa();
  for (int m = 1; m <= spec.M; ++m) {
    const double theta = path.speed(m);
    const double expected = -spec.beta * kappa / (theta * theta);
    CHECK(std::abs(diff(spec.M * np + m - 1) - expected) <= 1e-12);
  }
}

TEST_CASE("final-time recovery") {
  SUBCASE("constant speed") {
    Eigen::VectorXd speed = Eigen::VectorXd::Constant(5, 2.0);
    auto [tf, times] = recover_final_time(speed, 0.75 / 4.0);
    CHECK(tf == doctest::Approx(0.375).epsilon(1e-15));
    CHECK(times.size() == 5);
    CHECK(times(0) == 0.0);
    CHECK(times(4) == doctest::Approx(0.375).epsilon(1e-15));
  }

  SUBCASE("variable speed hand example") {
    Eigen::VectorXd speed(3);
    speed << 1.0, 1.0, 3.0;
    auto [tf, times] = recover_final_time(speed, 0.5);
    CHECK(times(1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(tf == doctest::Approx(0.75).epsilon(1e-15));
  }

  SUBCASE("nonpositive speed is rejected") {
    Eigen::VectorXd speed(3);
    speed << 1.0, 0.0, 1.0;
    CHECK_THROWS_AS(recover_final_time(speed, 0.1), std::invalid_argument);
  }
}

TEST_CASE("infeasible paths are rejected") {
  Problem1Spec spec = baseline_p1_spec();
  Problem1Objective obj(spec);

  ControlPath out_of_bounds = zero_path_p1(spec);
  out_of_bounds.values(3, 2) = 5.0;
  CHECK_THROWS_AS(obj.eval(out_of_bounds), std::invalid_argument);

  ControlPath unpinned = zero_path_p1(spec);
  unpinned.values(0, 0) = 1.0;
  CHECK_THROWS_AS(obj.eval(unpinned), std::invalid_argument);

  ControlPath wrong_shape;
  wrong_shape.values = Eigen::MatrixXd::Zero(spec.N, 8);
  CHECK_THROWS_AS(obj.eval(wrong_shape), std::invalid_argument);
}

}  // TEST_SUITE
