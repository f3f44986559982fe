#pragma once

#include <vector>

namespace ecorisk {

// Generalized Gauss-Laguerre rule for E[f(Z)], Z ~ Gamma(alpha+1, 1):
// E[f(Z)] ~= sum_k weights[k] * f(nodes[k]), weights normalized to 1.
// Golub-Welsch on the symmetric tridiagonal Jacobi matrix.
struct GaussLaguerre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussLaguerre gauss_laguerre(double alpha, int n);

}  // namespace ecorisk
