#include "signlab/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace signlab {

namespace {

// reference rule on [-1, 1], cached per order
const GaussRule& reference_rule(int n) {
    static std::map<int, GaussRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        const double b = i / std::sqrt(4.0 * i * i - 1.0);
        J(i, i - 1) = J(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    GaussRule rule;
    rule.nodes.resize((size_t)n);
    rule.weights.resize((size_t)n);
    for (int i = 0; i < n; ++i) {
        rule.nodes[(size_t)i] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        rule.weights[(size_t)i] = 2.0 * v0 * v0;
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

}  // namespace

GaussRule gauss_legendre(int n, double a, double b) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    const GaussRule& ref = reference_rule(n);
    GaussRule out;
    out.nodes.resize((size_t)n);
    out.weights.resize((size_t)n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
        out.nodes[(size_t)i] = mid + half * ref.nodes[(size_t)i];
        out.weights[(size_t)i] = half * ref.weights[(size_t)i];
    }
    return out;
}

double integrate_panels(const std::function<double(double)>& f, double a, double b, int panels,
                        int order) {
    if (panels < 1) throw std::invalid_argument("integrate_panels: panels must be >= 1");
    const GaussRule& ref = reference_rule(order);
    double acc = 0.0, comp = 0.0;  // Kahan compensation keeps panel order irrelevant
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        const double mid = lo + 0.5 * h, half = 0.5 * h;
        for (int i = 0; i < order; ++i) {
            const double term =
                half * ref.weights[(size_t)i] * f(mid + half * ref.nodes[(size_t)i]);
            const double y = term - comp;
            const double t = acc + y;
            comp = (t - acc) - y;
            acc = t;
        }
    }
    return acc;
}

}  // namespace signlab
