#include "wgmopo/fitting.hpp"

#include <cmath>

namespace wgmopo {

namespace {

Eigen::MatrixXd numeric_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, const Eigen::VectorXd& r0,
                                 double rel_step) {
    Eigen::MatrixXd J(r0.size(), x.size());
    for (int j = 0; j < x.size(); ++j) {
        Eigen::VectorXd xp = x;
        const double h = rel_step * std::max(std::abs(x[j]), 1e-12);
        xp[j] += h;
        J.col(j) = (f(xp) - r0) / h;
    }
    return J;
}

} // namespace

LMResult levenberg_marquardt(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residuals,
                             const Eigen::VectorXd& initial, const LMOptions& options) {
    LMResult result;
    Eigen::VectorXd x = initial;
    Eigen::VectorXd r = residuals(x);
    double chi2 = r.squaredNorm();
    double lambda = options.initial_lambda;

    for (int it = 0; it < options.max_iterations; ++it) {
        result.iterations = it + 1;
        const Eigen::MatrixXd J = numeric_jacobian(residuals, x, r, options.diff_step);
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * r;
        bool stepped = false;
        for (int tries = 0; tries < 30; ++tries) {
            Eigen::MatrixXd A = JtJ;
            A.diagonal() += lambda * JtJ.diagonal().cwiseMax(1e-12);
            const Eigen::VectorXd dx = A.ldlt().solve(-g);
            const Eigen::VectorXd xn = x + dx;
            const Eigen::VectorXd rn = residuals(xn);
            const double chin = rn.squaredNorm();
            if (std::isfinite(chin) && chin < chi2) {
                const double dchi = chi2 - chin;
                const double dxn = dx.norm();
                x = xn;
                r = rn;
                chi2 = chin;
                lambda = std::max(lambda * 0.3, 1e-12);
                stepped = true;
                if (dchi < options.ftol * std::max(chi2, 1e-300) ||
                    dxn < options.xtol * std::max(x.norm(), 1e-300)) {
                    result.converged = true;
                }
                break;
            }
            lambda *= 8.0;
        }
        if (!stepped) {
            // no downhill step found; local minimum within numeric resolution
            result.converged = true;
        }
        if (result.converged) break;
    }

    result.parameters = x;
    result.chi2 = chi2;
    const Eigen::MatrixXd J = numeric_jacobian(residuals, x, r, options.diff_step);
    const int dof = static_cast<int>(r.size()) - static_cast<int>(x.size());
    const double sigma2 = dof > 0 ? chi2 / dof : 0.0;
    Eigen::MatrixXd JtJ = J.transpose() * J;
    JtJ.diagonal() += Eigen::VectorXd::Constant(x.size(), 1e-300);
    result.covariance = sigma2 * JtJ.inverse();
    return result;
}

} // namespace wgmopo
