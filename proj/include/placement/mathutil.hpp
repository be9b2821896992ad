#pragma once

#include <cmath>

namespace placement {

inline double log1pexp(double x) {
    if (x > 33.0) return x;
    if (x < -37.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double log_sigmoid(double x) { return -log1pexp(-x); }

} // namespace placement
