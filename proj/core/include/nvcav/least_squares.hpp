#pragma once

#include <Eigen/Dense>
#include <functional>

namespace nvcav {

// Maps a parameter vector to a residual vector.
using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct LeastSquaresOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-10;  // on ||J^T r||_inf
  double step_tolerance = 1e-13;      // relative step length
  double cost_tolerance = 1e-15;      // relative cost decrease
  double initial_damping = 1e-3;
  double relative_diff_step = 1e-6;   // forward-difference step, relative
};

struct LeastSquaresResult {
  Eigen::VectorXd parameters;
  double cost = 0.0;  // 0.5 * ||r||^2
  double residual_rms = 0.0;
  int iterations = 0;
  bool converged = false;
  int jacobian_rank = 0;             // numeric rank of J at the solution
  Eigen::VectorXd confidence_scale;  // sqrt(diag((J^T J)^+ * 2 cost / dof))
};

Eigen::MatrixXd numeric_jacobian(const ResidualFn& fn, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& r0, double relative_step);

// Damped-Hessian (Levenberg-Marquardt) trust-region minimizer of
// 0.5*||fn(x)||^2 with a numerically differentiated Jacobian. Steps are
// accepted only if they lower the cost, so the objective is monotone over
// accepted iterates.
LeastSquaresResult levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd start,
                                       const LeastSquaresOptions& options = {});

}  // namespace nvcav
