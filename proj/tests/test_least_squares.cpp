#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nvcav/least_squares.hpp"

using namespace nvcav;

TEST_CASE("linear system is solved to machine precision") {
  // residual r = A x - b with a well-conditioned A
  Eigen::MatrixXd a(4, 2);
  a << 1.0, 2.0, 3.0, -1.0, 0.5, 0.5, -2.0, 1.0;
  Eigen::VectorXd truth(2);
  truth << 0.3, -1.7;
  const Eigen::VectorXd b = a * truth;
  auto fn = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return a * x - b; };

  const LeastSquaresResult res = levenberg_marquardt(fn, Eigen::VectorXd::Zero(2));
  CHECK(res.converged);
  CHECK(res.parameters[0] == doctest::Approx(0.3).epsilon(1e-8));
  CHECK(res.parameters[1] == doctest::Approx(-1.7).epsilon(1e-8));
  CHECK(res.jacobian_rank == 2);
}

TEST_CASE("exponential decay fit recovers parameters") {
  std::vector<double> t, y;
  const double a0 = 2.5, k0 = 1.3;
  for (int i = 0; i < 40; ++i) {
    t.push_back(0.1 * i);
    y.push_back(a0 * std::exp(-k0 * 0.1 * i));
  }
  auto fn = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i) {
      r[static_cast<Eigen::Index>(i)] = x[0] * std::exp(-x[1] * t[i]) - y[i];
    }
    return r;
  };
  Eigen::VectorXd x0(2);
  x0 << 1.0, 0.5;
  const LeastSquaresResult res = levenberg_marquardt(fn, x0);
  CHECK(res.converged);
  CHECK(res.parameters[0] == doctest::Approx(a0).epsilon(1e-6));
  CHECK(res.parameters[1] == doctest::Approx(k0).epsilon(1e-6));
  CHECK(res.residual_rms < 1e-8);
}

TEST_CASE("valley-shaped objective still converges") {
  // classic banana valley, as residuals
  auto fn = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd r(2);
    r[0] = 10.0 * (x[1] - x[0] * x[0]);
    r[1] = 1.0 - x[0];
    return r;
  };
  Eigen::VectorXd x0(2);
  x0 << -1.2, 1.0;
  const LeastSquaresResult res = levenberg_marquardt(fn, x0);
  CHECK(res.converged);
  CHECK(res.parameters[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(res.parameters[1] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("cost never ends above its start (monotone acceptance)") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(6, 3, [&]() { return g(rng); });
    Eigen::VectorXd b = Eigen::VectorXd::NullaryExpr(6, [&]() { return g(rng); });
    auto fn = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
      return (a * x - b).array().tanh().matrix();  // mildly nonlinear
    };
    Eigen::VectorXd x0 = Eigen::VectorXd::NullaryExpr(3, [&]() { return g(rng); });
    const double cost0 = 0.5 * fn(x0).squaredNorm();
    LeastSquaresOptions opt;
    opt.max_iterations = 50;
    const LeastSquaresResult res = levenberg_marquardt(fn, x0, opt);
    CHECK(res.cost <= cost0 + 1e-15);
  }
}

TEST_CASE("underdetermined problems report rank deficiency") {
  // one residual, three parameters
  auto fn = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd r(1);
    r[0] = x.sum() - 1.0;
    return r;
  };
  const LeastSquaresResult res = levenberg_marquardt(fn, Eigen::VectorXd::Zero(3));
  CHECK(res.jacobian_rank < 3);
}
