#include "ecorisk/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace ecorisk {

GaussLaguerre gauss_laguerre(double alpha, int n) {
    if (!(alpha > -1.0)) throw std::invalid_argument("gauss_laguerre: alpha must be > -1");
    if (n < 1) throw std::invalid_argument("gauss_laguerre: n must be >= 1");

    // Monic recurrence for generalized Laguerre polynomials:
    // a_k = 2k + alpha + 1, b_k = k (k + alpha).
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        J(k, k) = 2.0 * k + alpha + 1.0;
        if (k > 0) {
            const double off = std::sqrt(k * (k + alpha));
            J(k, k - 1) = off;
            J(k - 1, k) = off;
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("gauss_laguerre: eigensolver failed");

    GaussLaguerre rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int k = 0; k < n; ++k) {
        rule.nodes[k] = es.eigenvalues()(k);
        const double q = es.eigenvectors()(0, k);
        rule.weights[k] = q * q;  // already normalized: sum = 1
    }
    return rule;
}

}  // namespace ecorisk
