#pragma once

// Gauss-Legendre rules (Golub-Welsch on the Jacobi matrix, cached per order)
// and a composite panel integrator for 1-d oscillatory integrands.

#include <functional>
#include <vector>

namespace signlab {

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [a, b].
GaussRule gauss_legendre(int n, double a, double b);

// Composite Gauss-Legendre: `panels` panels of `order` points each.
double integrate_panels(const std::function<double(double)>& f, double a, double b, int panels,
                        int order = 12);

}  // namespace signlab
