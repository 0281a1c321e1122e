#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace reluforge {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

enum class XScale { log, identity };

// Ordinary least squares y = slope x + intercept.
inline LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size(), "fit_linear: x and y differ in length");
    require(x.size() >= 2, "fit_linear: need at least two points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    require(sxx > 0.0, "fit_linear: x values must not all coincide");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy == 0.0 ? 1.0 : sxy * sxy / (sxx * syy);
    return f;
}

// Least squares on (log size or size, log value); natural logarithms.
inline LinearFit fit_loglog(const std::vector<std::pair<double, double>>& pairs, XScale xs = XScale::log) {
    require(pairs.size() >= 3, "fit_loglog: need at least three pairs");
    std::vector<double> x, y;
    for (const auto& [s, v] : pairs) {
        require(v > 0.0 && std::isfinite(v), "fit_loglog: values must be positive");
        if (xs == XScale::log) require(s > 0.0, "fit_loglog: sizes must be positive");
        x.push_back(xs == XScale::log ? std::log(s) : s);
        y.push_back(std::log(v));
    }
    return fit_linear(x, y);
}

}  // namespace reluforge
