#pragma once

#include <Eigen/Dense>

#include <functional>

namespace mcfsing {

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Derivative-free local minimisation (GSL simplex) starting at x0 with an
/// initial simplex of edge `step`.
MinimizeResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                           const Eigen::VectorXd& x0, double step, int max_iterations = 2000,
                           double size_tolerance = 1e-10);

/// e^{-z} I_nu(z), the exponentially scaled modified Bessel function.
double bessel_i_scaled(double nu, double z);

}  // namespace mcfsing
