#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "algebra.hpp"
#include "network.hpp"

namespace reluforge {

// Points x_k = x0 + k/R, k = 0..count.
struct EquiGrid {
    double R = 1.0;
    std::size_t count = 1;
    double x0 = 0.0;

    double point(std::size_t k) const { return x0 + static_cast<double>(k) / R; }
    void validate() const {
        require(std::isfinite(R) && R > 0.0 && count >= 1, "EquiGrid: grid must be strictly increasing (R > 0, count >= 1)");
    }
};

// Points x_{2k} = k/R, x_{2k-1} = k/R - delta with delta = 1/((c+1)R), indices 0..2*R_tilde.
// Blocks of n+1 consecutive points; m blocks with 2*R_tilde = m(n+1) and n+1 = 2p.
struct InequiGrid {
    double R = 1.0;
    std::size_t R_tilde = 1;
    std::size_t c = 1;
    std::size_t m = 1;
    std::size_t n = 1;

    double delta() const { return 1.0 / ((static_cast<double>(c) + 1.0) * R); }
    double alpha() const { return 1.0 / (static_cast<double>(c) + 1.0); }
    std::size_t p() const { return (n + 1) / 2; }
    std::size_t point_count() const { return 2 * R_tilde + 1; }

    double point(std::size_t i) const {
        double k = static_cast<double>((i + 1) / 2);
        return i % 2 == 0 ? k / R : k / R - delta();
    }
    // z_{2j} = pj/R, z_{2j-1} = pj/R - delta, j = 0..2m
    double designated(std::size_t j) const { return point(j % 2 == 0 ? (j / 2) * (n + 1) : ((j + 1) / 2) * (n + 1) - 1); }

    void validate() const {
        require(std::isfinite(R) && R > 0.0, "InequiGrid: R must be positive");
        require(c >= 1, "InequiGrid: c must be at least 1");
        require(m >= 1 && R_tilde >= 1, "InequiGrid: m and R_tilde must be positive");
        require((n + 1) % 2 == 0, "InequiGrid: n+1 must be even");
        require(2 * R_tilde == m * (n + 1), "InequiGrid: 2*R_tilde must equal m(n+1)");
    }
};

namespace detail {

// Hidden units relu(x - z_i), outer weights w, output bias b.
inline Network single_layer(const std::vector<double>& z, const std::vector<double>& w, double b) {
    std::size_t K = z.size();
    std::vector<Triplet> t1, t2;
    std::vector<double> b1(K);
    for (std::size_t i = 0; i < K; ++i) {
        t1.push_back({i, 0, 1.0});
        b1[i] = -z[i];
        t2.push_back({0, i, w[i]});
    }
    return Network(1, {{Matrix::from_triplets(K, 1, std::move(t1)), std::move(b1), Activation::relu},
                       {Matrix::from_triplets(1, K, std::move(t2)), {b}, Activation::identity}});
}

}  // namespace detail

// Outer weights of the single-hidden-layer interpolant with breakpoints z_0..z_{K-1} through
// (z_i, v_i), i = 0..K: slope changes, i.e. the solution of the lower-triangular system.
inline std::vector<double> pl_outer_weights(const std::vector<double>& z, const std::vector<double>& v) {
    require(z.size() == v.size() && z.size() >= 2, "pl_outer_weights: need matching z, v with at least two points");
    std::vector<double> w(z.size() - 1);
    double prev = 0.0;
    for (std::size_t i = 0; i + 1 < z.size(); ++i) {
        require(z[i + 1] > z[i], "pl_outer_weights: breakpoints must be strictly increasing");
        double s = (v[i + 1] - v[i]) / (z[i + 1] - z[i]);
        w[i] = s - prev;
        prev = s;
    }
    return w;
}

inline Network build_equi_interp(const EquiGrid& grid, const std::vector<double>& y) {
    grid.validate();
    require(y.size() == grid.count + 1, "build_equi_interp: need count+1 targets");
    const std::size_t K = grid.count;
    std::vector<double> z(K), w(K);
    for (std::size_t k = 0; k < K; ++k) z[k] = grid.point(k);
    w[0] = grid.R * (y[1] - y[0]);
    for (std::size_t j = 1; j < K; ++j) w[j] = grid.R * ((y[j + 1] - y[j]) - (y[j] - y[j - 1]));
    return detail::single_layer(z, w, y[0]);
}

// Closed-form outer weights on the designated points of an inequidistant grid.
inline std::vector<double> inequi_outer_weights(const InequiGrid& grid, const std::vector<double>& v) {
    const std::size_t m = grid.m;
    require(v.size() == 2 * m + 1, "inequi_outer_weights: need 2m+1 targets");
    const double s = (static_cast<double>(grid.c) + 1.0) * grid.R;
    const double P = static_cast<double>(grid.p()) * (static_cast<double>(grid.c) + 1.0) - 1.0;
    std::vector<double> w(2 * m);
    for (std::size_t j = 0; j < m; ++j) {
        double before = j == 0 ? v[0] : v[2 * j - 1];
        w[2 * j] = s * (v[2 * j + 1] / P - (1.0 + 1.0 / P) * v[2 * j] + before);
        w[2 * j + 1] = s * (v[2 * j + 2] - (1.0 + 1.0 / P) * v[2 * j + 1] + v[2 * j] / P);
    }
    return w;
}

inline Network build_inequi_interp(const InequiGrid& grid, const std::vector<double>& v) {
    grid.validate();
    require(v.size() == 2 * grid.m + 1, "build_inequi_interp: targets must be given at the 2m+1 designated points");
    std::vector<double> z(2 * grid.m);
    for (std::size_t j = 0; j < z.size(); ++j) z[j] = grid.designated(j);
    return detail::single_layer(z, inequi_outer_weights(grid, v), v[0]);
}

// f_{k,l}^j: residual after k-1 correction steps at local point l of block j.
struct FklTable {
    std::size_t blocks = 0;
    std::size_t n = 0;
    double alpha = 0.0;
    double Y = 0.0;                                       // max |y|
    std::vector<std::vector<double>> f1;                  // [j][l], l = 0..n
    std::vector<std::vector<std::vector<double>>> recursion;  // [j][k][l], valid for 2 <= k <= l <= n
    std::vector<std::vector<std::vector<double>>> closed;     // same layout

    double max_abs_difference() const {
        double d = 0.0;
        for (std::size_t j = 0; j < blocks; ++j)
            for (std::size_t k = 2; k <= n; ++k)
                for (std::size_t l = k; l <= n; ++l) d = std::max(d, std::abs(recursion[j][k][l] - closed[j][k][l]));
        return d;
    }
    double max_diagonal() const {
        double d = 0.0;
        for (std::size_t j = 0; j < blocks; ++j)
            for (std::size_t k = 1; k <= n; ++k) d = std::max(d, std::abs(k == 1 ? f1[j][1] : recursion[j][k][k]));
        return d;
    }
};

namespace detail {

// Values of the block-linear interpolant of y through the block end points, at every grid point.
inline std::vector<double> block_linear(const std::vector<double>& x, const std::vector<double>& end_vals, std::size_t m,
                                        std::size_t n) {
    std::vector<double> g(x.size());
    for (std::size_t j = 0; j < m; ++j) {
        std::size_t a = j * (n + 1), b = a + n;
        double va = end_vals[2 * j], vb = end_vals[2 * j + 1];
        for (std::size_t i = a; i <= b; ++i) g[i] = n == 0 ? va : va + (vb - va) * (x[i] - x[a]) / (x[b] - x[a]);
    }
    g.back() = end_vals[2 * m];
    return g;
}

inline std::vector<double> designated_values(const std::vector<double>& y, std::size_t m, std::size_t n) {
    std::vector<double> v(2 * m + 1);
    for (std::size_t j = 0; j < m; ++j) {
        v[2 * j] = y[j * (n + 1)];
        v[2 * j + 1] = y[j * (n + 1) + n];
    }
    v[2 * m] = y[m * (n + 1)];
    return v;
}

template <class WeightFn>
Network two_layer_core(const std::vector<double>& x, std::size_t m, std::size_t n, const std::vector<double>& y,
                       WeightFn&& outer_weights) {
    require(y.size() == m * (n + 1) + 1 && x.size() == y.size(), "build_two_layer_interp: need m(n+1)+1 targets");
    for (double v : y) require(std::isfinite(v) && v >= 0.0, "build_two_layer_interp: targets must be nonnegative");

    std::vector<double> z(2 * m);
    for (std::size_t j = 0; j < m; ++j) {
        z[2 * j] = x[j * (n + 1)];
        z[2 * j + 1] = x[j * (n + 1) + n];
    }
    std::vector<std::vector<double>> rows;  // designated values of g_0, g_1^+, g_1^-, ...
    rows.push_back(designated_values(y, m, n));
    std::vector<double> g0 = block_linear(x, rows[0], m, n);
    std::vector<double> f(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) f[i] = y[i] - g0[i];

    for (std::size_t k = 1; k <= n; ++k) {
        std::vector<double> vp(2 * m + 1, 0.0), vm(2 * m + 1, 0.0);
        for (std::size_t j = 0; j < m; ++j) {
            std::size_t a = j * (n + 1), b = a + n;
            double amp = f[a + k];
            double lo = x[a + k - 1], hi = x[a + k];
            auto line = [&](double xx) { return amp * (xx - lo) / (hi - lo); };
            auto& dst = amp >= 0.0 ? vp : vm;
            double sign = amp >= 0.0 ? 1.0 : -1.0;
            dst[2 * j] = sign * line(x[a]);
            dst[2 * j + 1] = sign * line(x[b]);
        }
        auto gp = block_linear(x, vp, m, n), gm = block_linear(x, vm, m, n);
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = f[i] - relu(gp[i]) + relu(gm[i]);
        rows.push_back(std::move(vp));
        rows.push_back(std::move(vm));
    }

    std::vector<Triplet> t1, t2, t3;
    std::vector<double> b1(2 * m), b2;
    for (std::size_t i = 0; i < 2 * m; ++i) {
        t1.push_back({i, 0, 1.0});
        b1[i] = -z[i];
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
        auto w = outer_weights(z, rows[r]);
        for (std::size_t i = 0; i < w.size(); ++i) t2.push_back({r, i, w[i]});
        b2.push_back(rows[r][0]);
        t3.push_back({0, r, r == 0 ? 1.0 : (r % 2 == 1 ? 1.0 : -1.0)});
    }
    const std::size_t H = rows.size();
    return Network(1, {{Matrix::from_triplets(2 * m, 1, std::move(t1)), std::move(b1), Activation::relu},
                       {Matrix::from_triplets(H, 2 * m, std::move(t2)), std::move(b2), Activation::relu},
                       {Matrix::from_triplets(1, H, std::move(t3)), {0.0}, Activation::identity}});
}

}  // namespace detail

// Interpolates all 2*R_tilde+1 grid points; hidden widths 2m and 2n+1. Targets must be >= 0.
inline Network build_two_layer_interp(const InequiGrid& grid, const std::vector<double>& y) {
    grid.validate();
    require(y.size() == grid.point_count(), "build_two_layer_interp: need one target per grid point");
    std::vector<double> x(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = grid.point(i);
    return detail::two_layer_core(x, grid.m, grid.n, y, [&](const std::vector<double>&, const std::vector<double>& v) {
        return inequi_outer_weights(grid, v);
    });
}

// Equidistant variant: count = m(n+1) intervals grouped into m blocks of n+1 points.
inline Network build_two_layer_interp(const EquiGrid& grid, std::size_t m, std::size_t n, const std::vector<double>& y) {
    grid.validate();
    require(m >= 1 && grid.count == m * (n + 1), "build_two_layer_interp: count must equal m(n+1)");
    require(y.size() == grid.count + 1, "build_two_layer_interp: need count+1 targets");
    for (double v : y) require(std::isfinite(v) && v >= 0.0, "build_two_layer_interp: targets must be nonnegative");
    if (n == 0) {
        // every point is a breakpoint: one equidistant layer, then relu of the interpolant
        auto inner = build_equi_interp(grid, y);
        const auto& h = inner.layer(0);
        const auto& o = inner.layer(1);
        return Network(1, {h, {o.weights, o.bias, Activation::relu},
                           {Matrix::from_dense(1, 1, std::vector<double>{1.0}), {0.0}, Activation::identity}});
    }
    std::vector<double> x(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = grid.point(i);
    return detail::two_layer_core(x, m, n, y, [&](const std::vector<double>& z, const std::vector<double>& v) {
        auto pts = z;
        pts.push_back(x.back());
        return pl_outer_weights(pts, v);
    });
}

// Residual table of the two-layer construction: one-step iteration and closed form side by side.
inline FklTable fkl_table(const InequiGrid& grid, const std::vector<double>& y) {
    grid.validate();
    require(y.size() == grid.point_count(), "fkl_table: need one target per grid point");
    const std::size_t m = grid.m, n = grid.n;
    const double a = grid.alpha();
    std::vector<double> x(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = grid.point(i);
    auto g0 = detail::block_linear(x, detail::designated_values(y, m, n), m, n);

    FklTable t;
    t.blocks = m;
    t.n = n;
    t.alpha = a;
    for (double v : y) t.Y = std::max(t.Y, std::abs(v));
    t.f1.assign(m, std::vector<double>(n + 1));
    t.recursion.assign(m, std::vector<std::vector<double>>(n + 1, std::vector<double>(n + 1, 0.0)));
    t.closed = t.recursion;
    for (std::size_t j = 0; j < m; ++j) {
        auto& f1 = t.f1[j];
        for (std::size_t l = 0; l <= n; ++l) f1[l] = y[j * (n + 1) + l] - g0[j * (n + 1) + l];
        auto& rec = t.recursion[j];
        rec[1] = f1;
        for (std::size_t k = 2; k <= n; ++k) {
            double fd = rec[k - 1][k - 1];
            for (std::size_t l = k; l <= n; ++l) {
                double kk = static_cast<double>(k), ll = static_cast<double>(l), coef;
                if (k % 2 == 0)
                    coef = (l % 2 == 0 ? kk - ll - 2.0 : kk - ll - 3.0 + 2.0 * a) / (2.0 * (1.0 - a));
                else
                    coef = (l % 2 == 0 ? kk - ll - 1.0 - 2.0 * a : kk - ll - 2.0) / (2.0 * a);
                rec[k][l] = rec[k - 1][l] + coef * fd;
            }
        }
        for (std::size_t k = 2; k <= n; ++k)
            for (std::size_t l = k; l <= n; ++l) {
                double d = static_cast<double>(l) - static_cast<double>(k), A, B;
                if (k % 2 == 0 && l % 2 == 0) {
                    A = (d + 2.0) / (2.0 * (1.0 - a));
                    B = (d + 2.0 * a) / (2.0 * (1.0 - a));
                } else if (k % 2 == 0) {
                    A = (d + 3.0 - 2.0 * a) / (2.0 * (1.0 - a));
                    B = (d + 1.0) / (2.0 * (1.0 - a));
                } else if (l % 2 == 0) {
                    A = (d + 1.0 + 2.0 * a) / (2.0 * a);
                    B = (d + 1.0) / (2.0 * a);
                } else {
                    A = (d + 2.0) / (2.0 * a);
                    B = (d + 2.0 - 2.0 * a) / (2.0 * a);
                }
                t.closed[j][k][l] = f1[l] - A * f1[k - 1] + B * f1[k - 2];
            }
    }
    return t;
}

}  // namespace reluforge
