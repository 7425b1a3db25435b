#include "nvcav/least_squares.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nvcav/errors.hpp"

namespace nvcav {

Eigen::MatrixXd numeric_jacobian(const ResidualFn& fn, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& r0, double relative_step) {
  const Eigen::Index m = r0.size();
  const Eigen::Index n = x.size();
  Eigen::MatrixXd jac(m, n);
  Eigen::VectorXd xp = x;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = relative_step * std::max(std::abs(x[j]), 1.0);
    xp[j] = x[j] + h;
    const double actual = xp[j] - x[j];  // exact step after rounding
    jac.col(j) = (fn(xp) - r0) / actual;
    xp[j] = x[j];
  }
  return jac;
}

LeastSquaresResult levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd x,
                                       const LeastSquaresOptions& opt) {
  if (x.size() == 0) throw ValidationError("least squares: empty parameter vector");

  Eigen::VectorXd r = fn(x);
  double cost = 0.5 * r.squaredNorm();
  if (!std::isfinite(cost)) {
    throw ValidationError("least squares: residual not finite at the start point");
  }

  const Eigen::Index n = x.size();
  Eigen::MatrixXd jac = numeric_jacobian(fn, x, r, opt.relative_diff_step);
  Eigen::MatrixXd hess = jac.transpose() * jac;
  Eigen::VectorXd grad = jac.transpose() * r;

  double mu = opt.initial_damping * hess.diagonal().maxCoeff();
  if (!(mu > 0.0)) mu = opt.initial_damping;
  double nu = 2.0;

  LeastSquaresResult result;
  bool converged = grad.lpNorm<Eigen::Infinity>() < opt.gradient_tolerance;
  int iter = 0;
  for (; iter < opt.max_iterations && !converged; ++iter) {
    // Marquardt scaling: damp proportionally to the curvature of each axis.
    Eigen::MatrixXd damped = hess;
    for (Eigen::Index i = 0; i < n; ++i) {
      damped(i, i) += mu * std::max(hess(i, i), 1e-30);
    }
    Eigen::VectorXd step = damped.ldlt().solve(-grad);
    if (!step.allFinite()) {
      mu *= nu;
      nu *= 2.0;
      continue;
    }

    const double xnorm = x.norm();
    if (step.norm() <= opt.step_tolerance * (xnorm + opt.step_tolerance)) {
      converged = true;
      break;
    }

    Eigen::VectorXd x_new = x + step;
    Eigen::VectorXd r_new = fn(x_new);
    const double cost_new = 0.5 * r_new.squaredNorm();

    // Gain ratio: actual vs. damped-model cost reduction.
    const double predicted = 0.5 * step.dot(mu * step.cwiseProduct(hess.diagonal().cwiseMax(1e-30)) - grad);
    const double rho = predicted > 0.0 ? (cost - cost_new) / predicted
                                       : (cost - cost_new);

    if (std::isfinite(cost_new) && cost_new < cost) {
      const double decrease = cost - cost_new;
      x = std::move(x_new);
      r = std::move(r_new);
      cost = cost_new;
      jac = numeric_jacobian(fn, x, r, opt.relative_diff_step);
      hess = jac.transpose() * jac;
      grad = jac.transpose() * r;
      mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
      nu = 2.0;
      if (grad.lpNorm<Eigen::Infinity>() < opt.gradient_tolerance ||
          decrease <= opt.cost_tolerance * std::max(cost, 1e-300)) {
        converged = true;
      }
    } else {
      mu *= nu;
      nu *= 2.0;
      if (!std::isfinite(mu)) break;  // no acceptable step exists
    }
  }

  result.parameters = x;
  result.cost = cost;
  result.residual_rms = r.size() > 0 ? std::sqrt(r.squaredNorm() / r.size()) : 0.0;
  result.iterations = iter;
  result.converged = converged;

  // Rank and a curvature-based per-parameter confidence scale at the solution.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double sigma_max = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
  const double rank_tol = sigma_max * std::max(jac.rows(), jac.cols()) *
                          std::numeric_limits<double>::epsilon();
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()[i] > rank_tol) ++rank;
  }
  result.jacobian_rank = rank;

  const Eigen::Index dof = std::max<Eigen::Index>(r.size() - n, 1);
  const double variance = 2.0 * cost / static_cast<double>(dof);
  result.confidence_scale = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = 0; k < rank; ++k) {
      const double v = svd.matrixV()(i, k) / svd.singularValues()[k];
      s += v * v;
    }
    result.confidence_scale[i] = std::sqrt(s * variance);
  }
  return result;
}

}  // namespace nvcav
