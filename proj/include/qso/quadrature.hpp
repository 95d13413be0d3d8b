#pragma once

#include <functional>
#include <span>

namespace qso {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;  // absolute error estimate
};

/// Wynn epsilon extrapolation of a sequence of partial sums. Returns the
/// last diagonal estimate and the difference to the previous one.
QuadratureResult wynn_epsilon(std::span<const double> partial_sums);

/// Integral of g(x) sin(omega x) over (0, inf) for omega > 0, with g smooth
/// on (0, inf) and decaying to zero (slowly is fine, e.g. like 1/x).
///
/// Sums the contributions of consecutive half periods with adaptive
/// Gauss-Kronrod and accelerates the alternating series. Deterministic: the
/// result depends only on (g, omega, rel_tol).
QuadratureResult sine_transform(const std::function<double(double)>& g, double omega,
                                double rel_tol = 1e-13);

}  // namespace qso
