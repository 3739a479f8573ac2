#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace raman {

struct LmOptions {
  int max_iterations = 500;
  double x_tol = 1e-12;   ///< relative parameter step
  double f_tol = 1e-15;   ///< relative cost decrease
  double g_tol = 1e-14;   ///< max |J^T r| scaled by cost
  double initial_damping = 1e-3;
};

struct LmResult {
  Eigen::VectorXd params;
  Eigen::VectorXd residuals;
  Eigen::MatrixXd jacobian;
  double cost = 0.0;  ///< sum of squared residuals
  int iterations = 0;
  bool converged = false;
  std::string message;
  /// Cost after every accepted step, starting with the initial cost.
  std::vector<double> cost_history;
};

using ResidualFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Central-difference Jacobian of `f` at `x`.
Eigen::MatrixXd numeric_jacobian(const ResidualFunction& f, const Eigen::VectorXd& x);

/// Levenberg-Marquardt with Marquardt diagonal scaling. Only steps that lower the
/// cost are accepted, so `cost_history` is non-increasing.
LmResult levenberg_marquardt(const ResidualFunction& f, Eigen::VectorXd x0,
                             const LmOptions& options = {});

}  // namespace raman
