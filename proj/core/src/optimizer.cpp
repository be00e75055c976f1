#include "kelvin/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace kelvin {

void OptimizerOptions::validate() const {
  if (tol <= 0.0) throw std::invalid_argument("tol must be positive");
  if (armijo_c <= 0.0 || armijo_c >= 1.0) throw std::invalid_argument("armijo_c must be in (0,1)");
  if (backtrack <= 0.0 || backtrack >= 1.0) throw std::invalid_argument("backtrack must be in (0,1)");
  if (step0 <= 0.0 || memory < 1 || max_iters < 1) {
    throw std::invalid_argument("step0, memory and max_iters must be positive");
  }
}

Eigen::VectorXd project_box(const Eigen::VectorXd& x, const Eigen::VectorXd& lower,
                            const Eigen::VectorXd& upper) {
  if (x.size() != lower.size() || x.size() != upper.size()) {
    throw std::invalid_argument("project_box: bound length mismatch");
  }
  return x.cwiseMax(lower).cwiseMin(upper);
}

double projected_gradient_residual(const Eigen::VectorXd& x, const Eigen::VectorXd& grad,
                                   const Eigen::VectorXd& lower,
                                   const Eigen::VectorXd& upper) {
  return (x - project_box(x - grad, lower, upper)).norm();
}

namespace {

// Two-loop recursion; returns H*g with the standard gamma = s.y/y.y scaling.
Eigen::VectorXd lbfgs_apply(const std::deque<Eigen::VectorXd>& s_hist,
                            const std::deque<Eigen::VectorXd>& y_hist,
                            const std::deque<double>& rho_hist, const Eigen::VectorXd& g) {
  const int k = static_cast<int>(s_hist.size());
  if (k == 0) return g;
  Eigen::VectorXd q = g;
  std::vector<double> a(k);
  for (int i = k - 1; i >= 0; --i) {
    a[i] = rho_hist[i] * s_hist[i].dot(q);
    q -= a[i] * y_hist[i];
  }
  const double gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
  q *= gamma;
  for (int i = 0; i < k; ++i) {
    const double b = rho_hist[i] * y_hist[i].dot(q);
    q += (a[i] - b) * s_hist[i];
  }
  return q;
}

}  // namespace

RunReport solve(const ObjectiveFn& objective, const Eigen::VectorXd& x0,
                const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                const OptimizerOptions& opts) {
  opts.validate();
  const auto t_start = std::chrono::steady_clock::now();

  RunReport report;
  Eigen::VectorXd x = project_box(x0, lower, upper);
  Eigen::VectorXd g;
  double f = objective(x, &g);
  if (!std::isfinite(f) || !g.allFinite()) {
    throw std::runtime_error("non-finite cost or gradient at the starting point");
  }

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;

  auto finish = [&](bool converged, const std::string& message) {
    report.converged = converged;
    report.message = message;
    report.final_cost = f;
    report.final_residual = projected_gradient_residual(x, g, lower, upper);
    report.solution = x;
    report.active_set.assign(x.size(), 0);
    for (int i = 0; i < x.size(); ++i) {
      report.active_set[i] = (x(i) <= lower(i) || x(i) >= upper(i)) ? 1 : 0;
    }
    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
  };

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    const double residual = projected_gradient_residual(x, g, lower, upper);
    report.trace.push_back({iter, f, residual, 0.0});
    if (residual <= opts.tol) {
      report.iterations = iter;
      return finish(true, "projected-gradient residual below tolerance");
    }

    Eigen::VectorXd dir = -lbfgs_apply(s_hist, y_hist, rho_hist, g);

    // Armijo backtracking along the projected arc x(step) = Proj(x + step*dir).
    bool accepted = false;
    Eigen::VectorXd x_new;
    double f_new = 0.0;
    double step = opts.step0;
    bool tried_fallback = s_hist.empty();
    for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
      x_new = project_box(x + step * dir, lower, upper);
      const Eigen::VectorXd dx = x_new - x;
      const double decrease = g.dot(dx);
      if (decrease >= 0.0) {
        if (!tried_fallback) {
          // Quasi-Newton direction is uphill along the arc; restart from the
          // projected gradient direction.
          dir = -g;
          tried_fallback = true;
          step = opts.step0;
          continue;
        }
        step *= opts.backtrack;
        continue;
      }
      f_new = objective(x_new, nullptr);
      if (std::isfinite(f_new) && f_new <= f + opts.armijo_c * decrease) {
        accepted = true;
        break;
      }
      step *= opts.backtrack;
    }
    if (!accepted) {
      report.iterations = iter;
      return finish(false, "line search failed after " +
                               std::to_string(opts.max_backtracks) + " backtracks");
    }

    Eigen::VectorXd g_new;
    objective(x_new, &g_new);
    if (!g_new.allFinite()) {
      report.iterations = iter;
      return finish(false, "non-finite gradient");
    }

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    x = x_new;
    f = f_new;
    g = g_new;
    report.trace.back().step = step;
    report.iterations = iter + 1;
  }
  return finish(false, "iteration limit reached");
}

ControlPath warm_start_p1(const Problem1Objective& objective, double tol_inner) {
  const Problem1Spec& spec = objective.spec();
  const int np = spec.dipoles.count();

  OptimizerOptions opts;
  opts.tol = tol_inner;

  ControlPath path;
  path.values.resize(spec.N + 1, np);
  path.values.row(0) = spec.alpha0.transpose();
  Eigen::VectorXd xprev = spec.alpha0;
  for (int n = 1; n <= spec.N; ++n) {
    const auto step_obj = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
      return objective.step_value_and_grad(n, x, xprev, grad);
    };
    const RunReport rep = solve(step_obj, xprev, spec.alpha_lower, spec.alpha_upper, opts);
    if (!rep.converged) {
      throw std::runtime_error("warm start failed at step " + std::to_string(n) + ": " +
                               rep.message);
    }
    path.values.row(n) = rep.solution.transpose();
    xprev = rep.solution;
  }
  return path;
}

ControlPath warm_start_p2(const Problem2Objective& objective, double tol_inner) {
  const Problem2Spec& spec = objective.spec();
  const int np = spec.dipoles.count();

  OptimizerOptions opts;
  opts.tol = tol_inner;

  Eigen::VectorXd lower(np + 1), upper(np + 1);
  lower.head(np) = spec.alpha_lower;
  lower(np) = spec.theta_lower;
  upper.head(np) = spec.alpha_upper;
  upper(np) = spec.theta_upper;

  ControlPath path;
  path.values.resize(spec.M + 1, np);
  path.speed.resize(spec.M + 1);
  path.values.row(0) = spec.alpha0.transpose();
  path.speed(0) = spec.theta0;

  Eigen::VectorXd zprev(np + 1);
  zprev.head(np) = spec.alpha0;
  zprev(np) = spec.theta0;
  for (int m = 1; m <= spec.M; ++m) {
    const auto step_obj = [&](const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
      return objective.step_value_and_grad(m, z, zprev, grad);
    };
    const RunReport rep = solve(step_obj, zprev, lower, upper, opts);
    if (!rep.converged) {
      throw std::runtime_error("warm start failed at step " + std::to_string(m) + ": " +
                               rep.message);
    }
    path.values.row(m) = rep.solution.head(np).transpose();
    path.speed(m) = rep.solution(np);
    zprev = rep.solution;
  }
  return path;
}

}  // namespace kelvin
