#ifndef SEMIFLOW_QUADRATURE_HPP
#define SEMIFLOW_QUADRATURE_HPP

#include <functional>
#include <vector>

namespace semiflow {

// Adaptive Gauss7/Kronrod15 integral of f over [a,b]. Panels are bisected
// until the Kronrod error estimate drops below tol (absolute, with a mild
// relative floor). Throws std::runtime_error if the panel budget runs out.
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double tol = 1e-12);

// n-point Gauss-Legendre rule on [a,b]. Nodes ascending.
void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights);

}  // namespace semiflow

#endif
