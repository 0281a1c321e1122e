#pragma once

#include <cmath>
#include <algorithm>
#include <functional>
#include <numeric>
#include <optional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "algebra.hpp"
#include "primitives.hpp"

namespace reluforge {

using MultiIndex = std::vector<std::size_t>;

inline std::size_t norm1(const MultiIndex& a) { return std::accumulate(a.begin(), a.end(), std::size_t{0}); }

inline double factorial(const MultiIndex& a) {
    double f = 1.0;
    for (std::size_t v : a)
        for (std::size_t i = 2; i <= v; ++i) f *= static_cast<double>(i);
    return f;
}

// All alpha in N^d with |alpha|_1 <= max_order, by degree then lexicographically.
inline std::vector<MultiIndex> multi_indices(std::size_t d, std::size_t max_order) {
    std::vector<MultiIndex> out;
    for (std::size_t deg = 0; deg <= max_order; ++deg) {
        MultiIndex a(d, 0);
        std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t j, std::size_t left) {
            if (j + 1 == d) {
                a[j] = left;
                out.push_back(a);
                return;
            }
            for (std::size_t v = left + 1; v-- > 0;) {
                a[j] = v;
                rec(j + 1, left - v);
            }
        };
        rec(0, deg);
    }
    return out;
}

struct FunctionOracle {
    std::string name;
    std::size_t d = 1;
    std::size_t q = 1;
    std::function<double(std::span<const double>)> value;
    std::function<double(const MultiIndex&, std::span<const double>)> partial;  // empty: finite differences
    double lipschitz = 1.0;                                                       // upper bound for L~
    double cq_norm = 1.0;                                                         // upper bound for ||f||_{C^q}

    static constexpr double fd_step = 1e-5;

    bool has_partials() const { return static_cast<bool>(partial); }

    double derivative(const MultiIndex& alpha, std::span<const double> x) const {
        if (alpha.size() != d || x.size() != d) throw dimension_error("FunctionOracle: dimension mismatch");
        if (norm1(alpha) == 0) return value(x);
        if (partial) return partial(alpha, x);
        std::size_t j = 0;
        while (alpha[j] == 0) ++j;
        MultiIndex lower = alpha;
        --lower[j];
        std::vector<double> xp(x.begin(), x.end()), xm = xp;
        xp[j] += fd_step;
        xm[j] -= fd_step;
        return (derivative(lower, xp) - derivative(lower, xm)) / (2.0 * fd_step);
    }

    void validate() const {
        require(d >= 1 && q >= 1, "FunctionOracle: d and q must be positive");
        require(static_cast<bool>(value), "FunctionOracle: value is required");
        require(std::isfinite(lipschitz) && lipschitz > 0.0, "FunctionOracle: lipschitz must be finite and positive");
        require(std::isfinite(cq_norm) && cq_norm > 0.0, "FunctionOracle: cq_norm must be finite and positive");
    }
};

inline const std::vector<std::string>& corpus_names() {
    static const std::vector<std::string> names{"constant", "linear", "square", "sine", "product"};
    return names;
}

// Built-in targets on [0,1]^d with analytic partials.
//   constant: k;  linear: mean of coordinates;  square: x1^2;  sine: 1/2 + sin(2 pi x1)/4;  product: x1 x2 (d = 2)
inline FunctionOracle make_oracle(const std::string& name, std::size_t d, std::size_t q, double constant = 0.5) {
    FunctionOracle f;
    f.name = name;
    f.d = d;
    f.q = q;
    const double dd = static_cast<double>(d);
    if (name == "constant") {
        f.value = [constant](std::span<const double>) { return constant; };
        f.partial = [](const MultiIndex&, std::span<const double>) { return 0.0; };
        f.lipschitz = 1.0;
        f.cq_norm = std::max(std::abs(constant), 1.0);
    } else if (name == "linear") {
        f.value = [dd](std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0) / dd; };
        f.partial = [dd](const MultiIndex& a, std::span<const double>) { return norm1(a) == 1 ? 1.0 / dd : 0.0; };
        f.lipschitz = 1.0;
        f.cq_norm = 1.0;
    } else if (name == "square") {
        f.value = [](std::span<const double> x) { return x[0] * x[0]; };
        f.partial = [](const MultiIndex& a, std::span<const double> x) {
            for (std::size_t j = 1; j < a.size(); ++j)
                if (a[j] != 0) return 0.0;
            return a[0] == 1 ? 2.0 * x[0] : a[0] == 2 ? 2.0 : 0.0;
        };
        f.lipschitz = 2.0;
        f.cq_norm = 2.0;
    } else if (name == "sine") {
        constexpr double tp = 2.0 * std::numbers::pi;
        f.value = [](std::span<const double> x) { return 0.5 + std::sin(tp * x[0]) / 4.0; };
        f.partial = [](const MultiIndex& a, std::span<const double> x) {
            for (std::size_t j = 1; j < a.size(); ++j)
                if (a[j] != 0) return 0.0;
            std::size_t k = a[0];
            // d^k/dx^k sin(tp x) = tp^k sin(tp x + k pi/2)
            return std::pow(tp, static_cast<double>(k)) * std::sin(tp * x[0] + static_cast<double>(k) * std::numbers::pi / 2.0) / 4.0;
        };
        f.lipschitz = tp / 4.0;
        f.cq_norm = std::max(0.75, std::pow(tp, static_cast<double>(q)) / 4.0);
    } else if (name == "product") {
        require(d == 2, "make_oracle: product needs d = 2");
        f.value = [](std::span<const double> x) { return x[0] * x[1]; };
        f.partial = [](const MultiIndex& a, std::span<const double> x) {
            if (a[0] > 1 || a[1] > 1) return 0.0;
            if (a[0] == 1 && a[1] == 1) return 1.0;
            return a[0] == 1 ? x[1] : x[0];
        };
        f.lipschitz = 2.0;
        f.cq_norm = 1.0;
    } else {
        throw precondition_error("make_oracle: unknown target '" + name + "'");
    }
    f.validate();
    return f;
}

// Omega([0,1]^d, R, delta): points with some coordinate in an open strip (k/R - delta, k/R), 1 <= k <= R-1.
struct TriflingRegion {
    std::size_t d = 1;
    std::size_t R = 1;
    double delta = 0.0;

    void validate() const {
        require(d >= 1 && R >= 1, "TriflingRegion: d and R must be positive");
        require(delta > 0.0 && delta <= 1.0 / (3.0 * static_cast<double>(R)), "TriflingRegion: need 0 < delta <= 1/(3R)");
    }

    bool coordinate_in_strip(double x) const {
        const double Rd = static_cast<double>(R);
        long long k0 = static_cast<long long>(std::ceil(x * Rd));
        for (long long k = k0 - 1; k <= k0 + 1; ++k) {
            if (k < 1 || k > static_cast<long long>(R) - 1) continue;
            double right = static_cast<double>(k) / Rd;
            if (x < right && x > right - delta) return true;
        }
        return false;
    }

    bool contains(std::span<const double> x) const {
        for (double v : x)
            if (coordinate_in_strip(v)) return true;
        return false;
    }
};

inline std::size_t corner_index(std::span<const std::size_t> k, std::size_t R) {
    std::size_t i = 0, p = 1;
    for (std::size_t v : k) {
        i += v * p;
        p *= R;
    }
    return i;
}

inline std::vector<std::size_t> corner_from_index(std::size_t i, std::size_t R, std::size_t d) {
    std::vector<std::size_t> k(d);
    for (std::size_t j = 0; j < d; ++j) {
        k[j] = i % R;
        i /= R;
    }
    return k;
}

struct ApproximatorInfo {
    std::size_t R = 0;
    std::size_t c = 0;
    double delta = 0.0;
    std::size_t s = 0;              // point-fitter order
    std::size_t J = 0;              // bits per point fitter
    std::size_t product_depth = 0;  // L passed to product and monomial nets
    bool finite_difference = false;
};

struct Approximator {
    Network net;
    ApproximatorInfo info;
};

inline std::size_t point_fitter_order(std::size_t q, std::size_t d) { return (q + d - 1) / d + 1; }

// Depth budget for product and monomial nets so their error is below (NL)^(-2q/d).
inline std::size_t product_depth(std::size_t N, std::size_t L, std::size_t q, std::size_t d) {
    const double k = static_cast<double>(square_teeth_per_layer(N));
    double need = static_cast<double>(q) / static_cast<double>(d) * std::log2(static_cast<double>(N * L)) / k;
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(need - 1e-12)) + 1);
}

// sum over |alpha| <= q-1 of phi(phi_alpha(i), P_alpha(x - Psi(x))) with the [0,1] rescaling of the samples undone.
inline Approximator build_local_approximator(const FunctionOracle& f, std::size_t N, std::size_t L, std::size_t c) {
    f.validate();
    require(N >= 1 && L >= 1, "build_local_approximator: N and L must be positive");
    const std::size_t d = f.d, q = f.q;
    StepSpec spec{d, N, L, c};
    spec.validate();
    ApproximatorInfo info;
    info.R = spec.K();
    info.c = c;
    info.delta = spec.delta();
    info.s = point_fitter_order(q, d);
    info.J = point_fitter_bits(N, L, info.s);
    info.product_depth = product_depth(N, L, q, d);
    info.finite_difference = !f.has_partials();
    const std::size_t R = info.R;
    const double C = f.cq_norm;

    std::size_t corners = 1;
    for (std::size_t j = 0; j < d; ++j) corners *= R;
    const std::size_t slots = N * N * L * L;
    require(corners <= slots, "build_local_approximator: corner grid exceeds point-fitter capacity");

    // inputs of the core: (i, u_1..u_d)
    std::vector<Network> terms;
    std::vector<double> coeffs;
    double bias = 0.0;
    std::vector<std::size_t> u_idx(d);
    std::iota(u_idx.begin(), u_idx.end(), std::size_t{1});
    std::optional<Network> unit;
    for (const auto& alpha : multi_indices(d, q - 1)) {
        std::vector<double> xi(slots, 0.0);
        std::vector<double> corner(d);
        for (std::size_t i = 0; i < corners; ++i) {
            auto k = corner_from_index(i, R, d);
            for (std::size_t j = 0; j < d; ++j) corner[j] = static_cast<double>(k[j]) / static_cast<double>(R);
            double v = f.derivative(alpha, corner);
            if (!std::isfinite(v)) throw numeric_error("build_local_approximator: oracle returned a non-finite partial");
            xi[i] = std::clamp((v + C) / (2.0 * C), 0.0, 1.0);
        }
        auto fit = compose_serial(select_coords(1 + d, {0}), build_point_fitter(xi, N, L, info.s));
        const double w = C / factorial(alpha);
        if (norm1(alpha) == 0) {
            terms.push_back(fit);
            coeffs.push_back(2.0 * w);
            bias -= w;
            continue;
        }
        if (!unit) unit = build_product_unit(N, info.product_depth);
        auto mono = compose(select_coords(1 + d, u_idx), build_monomial(alpha, N, info.product_depth));
        terms.push_back(compose(compose_parallel({fit, mono}), *unit));
        coeffs.push_back(2.0 * w);
        terms.push_back(mono);
        coeffs.push_back(-w);
    }
    auto core = linear_combination(terms, coeffs, bias);

    // x -> (x, k) with k_j = psi(x_j)
    auto psi = build_step_function(spec);
    std::vector<Network> psis(d, psi);
    std::vector<std::size_t> all(d);
    std::iota(all.begin(), all.end(), std::size_t{0});
    auto front = compose_parallel({select_coords(d, all), compose_parallel_disjoint(psis)});
    // (x, k) -> (sum k_j R^j, x - k/R)
    std::vector<Triplet> t;
    double p = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
        t.push_back({0, d + j, p});
        p *= static_cast<double>(R);
        t.push_back({1 + j, j, 1.0});
        t.push_back({1 + j, d + j, -1.0 / static_cast<double>(R)});
    }
    auto split = affine_map(Matrix::from_triplets(1 + d, 2 * d, std::move(t)), std::vector<double>(1 + d, 0.0));
    return {compose(front, compose(split, core)), info};
}

// phi_{i+1}(x) = mid(phi_i(x - delta e_i), phi_i(x), phi_i(x + delta e_i)), i = 1..d.
inline Network extend_from_trifling(const Network& net, std::size_t d, double delta) {
    require(delta > 0.0, "extend_from_trifling: delta must be positive");
    if (net.output_dim() != 1) throw dimension_error("extend_from_trifling: network must have scalar output");
    require(d <= net.input_dim(), "extend_from_trifling: d exceeds input dimension");
    const std::size_t n = net.input_dim();
    Network cur = net;
    for (std::size_t i = 0; i < d; ++i) {
        auto shifted = [&](double s) {
            std::vector<double> b(n, 0.0);
            b[i] = s;
            return compose_serial_lifted(affine_map(Matrix::identity(n), std::move(b)), cur);
        };
        cur = compose(compose_parallel({shifted(-delta), shifted(0.0), shifted(delta)}), mid3());
    }
    return cur;
}

// Smallest c >= 2 with L~ d N^(2(q-1)/d) L^(2(q-1)/d) <= c.
inline std::size_t select_c(const FunctionOracle& f, std::size_t N, std::size_t L) {
    const double e = 2.0 * (static_cast<double>(f.q) - 1.0) / static_cast<double>(f.d);
    double need = f.lipschitz * static_cast<double>(f.d) * std::pow(static_cast<double>(N), e) * std::pow(static_cast<double>(L), e);
    return std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(need - 1e-12)));
}

inline Approximator build_full_approximator(const FunctionOracle& f, std::size_t N, std::size_t L) {
    auto local = build_local_approximator(f, N, L, select_c(f, N, L));
    return {extend_from_trifling(local.net, f.d, local.info.delta), local.info};
}

}  // namespace reluforge
