#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace wgmopo {

// Small dense Levenberg-Marquardt with a forward-difference Jacobian.
// Residuals are (model - data) style; cost is 0.5 * sum r^2.
struct LMOptions {
    int max_iterations = 300;
    double ftol = 1e-12;
    double xtol = 1e-12;
    double initial_lambda = 1e-3;
    double diff_step = 1e-6;
};

struct LMResult {
    Eigen::VectorXd parameters;
    Eigen::MatrixXd covariance; // sigma^2 * (J^T J)^-1 at the optimum
    double chi2 = 0.0;          // sum of squared residuals
    int iterations = 0;
    bool converged = false;
};

LMResult levenberg_marquardt(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residuals,
                             const Eigen::VectorXd& initial, const LMOptions& options = {});

} // namespace wgmopo
