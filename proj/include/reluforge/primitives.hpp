#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "algebra.hpp"
#include "interp.hpp"

namespace reluforge {

// Largest r with r^d <= v.
inline std::size_t integer_root(std::size_t v, std::size_t d) {
    require(d >= 1, "integer_root: d must be positive");
    auto pw = [d](std::size_t r) {
        long double p = 1;
        for (std::size_t i = 0; i < d; ++i) p *= static_cast<long double>(r);
        return p;
    };
    auto r = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(v), 1.0 / static_cast<double>(d))));
    while (pw(r + 1) <= static_cast<long double>(v)) ++r;
    while (r > 0 && pw(r) > static_cast<long double>(v)) --r;
    return r;
}

struct StepSpec {
    std::size_t d = 1;
    std::size_t N = 1;
    std::size_t L = 1;
    std::size_t c = 1;  // delta = 1/((c+1)K)

    std::size_t K() const { return integer_root(N, d) * integer_root(N, d) * integer_root(L * L, d); }
    double delta() const { return 1.0 / ((static_cast<double>(c) + 1.0) * static_cast<double>(K())); }

    // Accepts delta only when it equals 1/((c+1)K) for a natural c >= 1.
    static StepSpec from_delta(std::size_t d, std::size_t N, std::size_t L, double delta) {
        StepSpec s{d, N, L, 1};
        require(delta > 0.0 && std::isfinite(delta), "StepSpec: delta must be positive");
        double cp1 = 1.0 / (delta * static_cast<double>(s.K()));
        double r = std::round(cp1);
        require(r >= 2.0 && std::abs(cp1 - r) <= 1e-9 * r,
                "StepSpec: delta must have the form 1/((c+1)K) with natural c >= 1");
        s.c = static_cast<std::size_t>(r) - 1;
        return s;
    }

    void validate() const {
        require(d >= 1 && N >= 1 && L >= 1 && c >= 1, "StepSpec: d, N, L, c must be positive");
        require(K() >= 1, "StepSpec: K must be positive");
    }
};

// Values k at x_{2k}, k-1 at x_{2k-1}, count-1 at x_{2 count}: a staircase with plateaus 0..count-1.
inline std::vector<double> step_targets(std::size_t count) {
    std::vector<double> y(2 * count + 1);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<double>((i + 1) / 2) - (i % 2 == 1 ? 1.0 : 0.0);
    y.back() = static_cast<double>(count - 1);
    return y;
}

// Two hidden layers of widths a and b become a deep narrow net of width 2a+2, depth ceil(b/a)+2.
inline Network deepen_two_layer(const Network& net) {
    require(net.depth() == 3, "deepen_two_layer: expected two hidden layers");
    std::size_t a = net.layer(0).out_dim(), b = net.layer(1).out_dim();
    std::size_t L = (b + a - 1) / a;
    auto layers = net.layers();
    if (L * a != b) {
        auto& l2 = layers[1];
        l2.weights = Matrix::from_triplets(L * a, l2.in_dim(), l2.weights.triplets());
        l2.bias.resize(L * a, 0.0);
        layers[2].weights = Matrix::from_triplets(layers[2].out_dim(), L * a, layers[2].weights.triplets());
    }
    return widen_to_deep(Network(net.input_dim(), std::move(layers)), a, L);
}

// x -> k on [k/K, (k+1)/K - delta*1{k <= K-2}], k = 0..K-1.
inline Network build_step_function(const StepSpec& spec, bool deepen = true) {
    spec.validate();
    auto finish = [deepen](const Network& n) { return deepen ? deepen_two_layer(n) : n; };
    const std::size_t K = spec.K();
    if (spec.d >= 2) {
        std::size_t m = integer_root(spec.N, spec.d), l = integer_root(spec.L * spec.L, spec.d);
        InequiGrid g{static_cast<double>(K), K, spec.c, m, 2 * m * l - 1};
        return finish(build_two_layer_interp(g, step_targets(K)));
    }
    const std::size_t N = spec.N, L = spec.L, M = N * N * L;
    InequiGrid g1{static_cast<double>(M), M, (spec.c + 1) * L - 1, N, 2 * N * L - 1};
    InequiGrid g2{static_cast<double>(K), L, spec.c, 1, 2 * L - 1};
    auto phi1 = finish(build_two_layer_interp(g1, step_targets(M)));
    auto phi2 = finish(build_two_layer_interp(g2, step_targets(L)));
    // (x) -> (x, phi1(x)) -> L*phi1 + phi2(x - phi1/M)
    auto front = compose_parallel({select_coords(1, {0}), phi1});
    auto shifted = compose_serial(affine_map(Matrix::from_dense(1, 2, std::vector<double>{1.0, -1.0 / static_cast<double>(M)}), {0.0}), phi2);
    auto back = linear_combination({select_coords(2, {1}), shifted}, {static_cast<double>(L), 1.0}, 0.0);
    return compose(front, back);
}

// x -> 2^L x on all of R; width 2, depth L+1, every parameter in {-2, -1, 0, 1, 2}.
inline Network build_pow2_multiplier(std::size_t L) {
    require(L >= 1, "build_pow2_multiplier: L must be positive");
    std::vector<AffineLayer> layers;
    layers.push_back({Matrix::from_dense(2, 1, std::vector<double>{2.0, -2.0}), {0.0, 0.0}, Activation::relu});
    for (std::size_t i = 1; i < L; ++i) layers.push_back({Matrix::identity(2, 2.0), {0.0, 0.0}, Activation::relu});
    layers.push_back({Matrix::from_dense(1, 2, std::vector<double>{1.0, -1.0}), {0.0}, Activation::identity});
    return Network(1, std::move(layers));
}

// Row-major M x L bit matrix.
struct BitMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> bits;

    int operator()(std::size_t m, std::size_t l) const { return bits[m * cols + l]; }
};

namespace detail {

enum class BitScaling {
    pow2_chain,  // 2^L realized by build_pow2_multiplier before each extraction
    direct       // test-only: weights 2^L in one layer
};

// (xi, lambda) -> sum_{j=1..min(lambda, L)} of the leading binary digits of xi.
// Channel layout between steps: [xi, lambda, S, z].
inline Network prefix_digit_sum(std::size_t L, BitScaling scaling) {
    std::vector<AffineLayer> layers;
    auto layer = [&](std::size_t rows, std::size_t cols, std::vector<Triplet> t, std::vector<double> b) {
        layers.push_back({Matrix::from_triplets(rows, cols, std::move(t)), std::move(b), Activation::relu});
    };
    std::size_t in_cols = 2;  // first step reads (xi, lambda) directly
    for (std::size_t j = 1; j <= L; ++j) {
        const bool has_sz = j > 1;
        const double jj = static_cast<double>(j);
        // carries: xi, lambda, S (+z folded in)
        auto carry = [&](std::vector<Triplet>& t) {
            t.push_back({0, 0, 1.0});
            t.push_back({1, 1, 1.0});
            if (has_sz) {
                t.push_back({2, 2, 1.0});
                t.push_back({2, 3, 1.0});
            }
        };
        if (scaling == BitScaling::pow2_chain) {
            std::vector<Triplet> t;
            carry(t);
            t.push_back({3, 0, 2.0});
            t.push_back({4, 0, -2.0});
            layer(5, in_cols, std::move(t), {0.0, 0.0, 0.0, -1.0, 1.0});
            for (std::size_t i = 1; i < L; ++i) {
                std::vector<Triplet> d{{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}, {3, 3, 2.0}, {4, 4, 2.0}};
                layer(5, 5, std::move(d), {0.0, 0.0, 0.0, 0.0, 0.0});
            }
            // t = P - Q = 2^L (xi - 1/2)
            std::vector<Triplet> e{{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}, {3, 3, 1.0}, {3, 4, -1.0},
                                   {4, 3, 1.0}, {4, 4, -1.0}, {5, 1, 1.0}, {6, 1, 1.0}};
            layer(7, 5, std::move(e), {0.0, 0.0, 0.0, 1.0, 0.0, 1.0 - jj, -jj});
        } else {
            const double s = std::ldexp(1.0, static_cast<int>(L));
            std::vector<Triplet> t;
            carry(t);
            t.push_back({3, 0, s});
            t.push_back({4, 0, s});
            t.push_back({5, 1, 1.0});
            t.push_back({6, 1, 1.0});
            layer(7, in_cols, std::move(t), {0.0, 0.0, 0.0, 1.0 - s / 2.0, -s / 2.0, 1.0 - jj, -jj});
        }
        // [xi', lambda, S, z] from [xi, lambda, S, r1, r2, a, b]
        std::vector<Triplet> f{{0, 0, 2.0}, {0, 3, -1.0}, {0, 4, 1.0}, {1, 1, 1.0},  {2, 2, 1.0},
                               {3, 3, 1.0}, {3, 4, -1.0}, {3, 5, 1.0}, {3, 6, -1.0}};
        layer(4, 7, std::move(f), {0.0, 0.0, 0.0, -1.0});
        in_cols = 4;
    }
    layers.push_back({Matrix::from_dense(1, 4, std::vector<double>{0.0, 0.0, 1.0, 1.0}), {0.0}, Activation::identity});
    return Network(2, std::move(layers));
}

inline Network bit_sum_impl(const BitMatrix& bits, std::size_t N, std::size_t L, BitScaling scaling) {
    require(N >= 1 && L >= 1, "build_bit_sum: N and L must be positive");
    const std::size_t M = N * N * L;
    if (bits.rows != M || bits.cols != L || bits.bits.size() != M * L)
        throw precondition_error("build_bit_sum: bit matrix must be N^2 L x L");
    std::vector<double> y(M + 1, 0.0);
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t l = 0; l < L; ++l) {
            require(bits(m, l) == 0 || bits(m, l) == 1, "build_bit_sum: bits must be 0 or 1");
            if (bits(m, l)) y[m] += std::ldexp(1.0, -static_cast<int>(l + 1));
        }
    auto encode = build_two_layer_interp(EquiGrid{1.0, M, 0.0}, N, N * L - 1, y);
    encode = deepen_two_layer(encode);
    // (m, l) -> (y_m, l + 1)
    auto front = compose_parallel({compose_serial(select_coords(2, {0}), encode),
                                   affine_map(Matrix::from_dense(1, 2, std::vector<double>{0.0, 1.0}), {1.0})});
    return compose(front, prefix_digit_sum(L, scaling));
}

}  // namespace detail

// (m, l) -> sum_{j <= l} bits(m, j) at integers 0 <= m < N^2 L, 0 <= l < L.
inline Network build_bit_sum(const BitMatrix& bits, std::size_t N, std::size_t L) {
    return detail::bit_sum_impl(bits, N, L, detail::BitScaling::pow2_chain);
}

// i -> floor(i / L) on integers 0 <= i < N^2 L^2.
inline Network build_block_index(std::size_t N, std::size_t L) {
    const std::size_t M = N * N * L;
    if (L == 1) return select_coords(1, {0});
    InequiGrid g{1.0 / static_cast<double>(L), M, L - 1, N, 2 * N * L - 1};
    return deepen_two_layer(build_two_layer_interp(g, step_targets(M)));
}

// i -> theta_i at integers 0 <= i < N^2 L^2.
inline Network build_bit_lookup(const std::vector<std::uint8_t>& theta, std::size_t N, std::size_t L) {
    require(N >= 1 && L >= 1, "build_bit_lookup: N and L must be positive");
    const std::size_t M = N * N * L;
    if (theta.size() != M * L) throw precondition_error("build_bit_lookup: need N^2 L^2 bits");
    BitMatrix a{M, L, std::vector<std::uint8_t>(M * L, 0)}, b = a;
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t l = 0; l < L; ++l) {
            a.bits[m * L + l] = theta[m * L + l];
            b.bits[m * L + l] = l == 0 ? 0 : theta[m * L + l - 1];
        }
    auto diff = linear_combination({build_bit_sum(a, N, L), build_bit_sum(b, N, L)}, {1.0, -1.0}, 0.0);
    // (u, v) -> (u, v - L u)
    auto split = affine_map(Matrix::from_dense(2, 2, std::vector<double>{1.0, 0.0, -static_cast<double>(L), 1.0}), {0.0, 0.0});
    auto front = compose_parallel({build_block_index(N, L), select_coords(1, {0})});
    return compose(front, compose(split, diff));
}

inline std::size_t point_fitter_bits(std::size_t N, std::size_t L, std::size_t s) {
    double nl = static_cast<double>(N * L);
    return static_cast<std::size_t>(std::ceil(2.0 * static_cast<double>(s) * std::log2(nl + 1.0) - 1e-12));
}

inline constexpr std::size_t max_point_fitter_bits = 50;

// i -> xi_i within 2^-J <= (NL)^(-2s), clamped into [0, 1] everywhere.
inline Network build_point_fitter(const std::vector<double>& xi, std::size_t N, std::size_t L, std::size_t s) {
    require(N >= 1 && L >= 1 && s >= 1, "build_point_fitter: N, L, s must be positive");
    const std::size_t count = N * N * L * L;
    if (xi.size() != count) throw precondition_error("build_point_fitter: need N^2 L^2 values");
    for (double v : xi) require(v >= 0.0 && v <= 1.0, "build_point_fitter: values must lie in [0, 1]");
    const std::size_t J = point_fitter_bits(N, L, s);
    if (J > max_point_fitter_bits)
        throw precondition_error("build_point_fitter: J = " + std::to_string(J) + " exceeds the binary64 guard of 50 bits");
    std::vector<std::uint64_t> q(count);
    const std::uint64_t top = (std::uint64_t{1} << J) - 1;
    for (std::size_t i = 0; i < count; ++i)
        q[i] = std::min<std::uint64_t>(static_cast<std::uint64_t>(std::floor(std::ldexp(xi[i], static_cast<int>(J)))), top);
    std::vector<Network> digits;
    std::vector<double> coeffs;
    for (std::size_t j = 1; j <= J; ++j) {
        std::vector<std::uint8_t> theta(count);
        for (std::size_t i = 0; i < count; ++i) theta[i] = static_cast<std::uint8_t>((q[i] >> (J - j)) & 1u);
        digits.push_back(build_bit_lookup(theta, N, L));
        coeffs.push_back(std::ldexp(1.0, -static_cast<int>(j)));
    }
    auto sum = linear_combination(digits, coeffs, 0.0);
    // min(relu(t), 1) = relu(t) - relu(t - 1)
    auto clamp = Network(1, {{Matrix::from_dense(2, 1, std::vector<double>{1.0, 1.0}), {0.0, -1.0}, Activation::relu},
                             {Matrix::from_dense(1, 2, std::vector<double>{1.0, -1.0}), {0.0}, Activation::identity}});
    return compose(sum, clamp);
}

// k with (k-1) 2^(k-1) + 1 <= N <= k 2^k
inline std::size_t square_teeth_per_layer(std::size_t N) {
    require(N >= 1, "square_teeth_per_layer: N must be positive");
    std::size_t k = 1;
    while (N > k * (std::size_t{1} << k)) ++k;
    return k;
}

// Sawtooth T_i at x: 1 at odd multiples of 2^-i, 0 at even multiples, linear between.
inline double sawtooth(std::size_t i, double x) {
    double u = std::fmod(std::ldexp(x, static_cast<int>(i)), 2.0);
    if (u < 0) u += 2.0;
    return 1.0 - std::abs(u - 1.0);
}

// x - sum_{i=1}^{Lk} 4^-i T_i(x) on [0, 1].
inline Network build_square(std::size_t N, std::size_t L) {
    require(N >= 1 && L >= 1, "build_square: N and L must be positive");
    const std::size_t k = square_teeth_per_layer(N);
    const std::size_t B = std::size_t{1} << k;
    // outer weights of T_1..T_k on breakpoints t/2^k
    std::vector<std::vector<double>> tw(k + 1);
    for (std::size_t i = 1; i <= k; ++i) {
        std::vector<double> y(B + 1);
        for (std::size_t t = 0; t <= B; ++t) y[t] = sawtooth(i, static_cast<double>(t) / static_cast<double>(B));
        auto tooth = build_equi_interp(EquiGrid{static_cast<double>(B), B, 0.0}, y);
        tw[i].resize(B);
        for (std::size_t t = 0; t < B; ++t) tw[i][t] = tooth.layer(1).weights.at(0, t);
    }
    auto first = build_equi_interp(EquiGrid{static_cast<double>(B), B, 0.0}, std::vector<double>(B + 1, 0.0)).layer(0);

    std::vector<AffineLayer> layers{first};
    // S row: from [S (if carried) | h_0..h_{B-1}]
    auto s_row = [&](std::size_t level, bool carried, std::vector<Triplet>& t, std::size_t row) {
        std::size_t off = carried ? 1 : 0;
        t.push_back({row, 0, 1.0});  // carried S, or x = relu(x - 0) on [0, 1]
        for (std::size_t i = 1; i <= k; ++i) {
            double scale = std::ldexp(1.0, -2 * static_cast<int>(level * k + i));
            for (std::size_t tt = 0; tt < B; ++tt) t.push_back({row, off + tt, -scale * tw[i][tt]});
        }
    };
    for (std::size_t level = 0; level + 1 < L; ++level) {
        bool carried = level > 0;
        std::size_t cols = B + (carried ? 1 : 0), off = carried ? 1 : 0;
        std::vector<Triplet> t;
        s_row(level, carried, t, 0);
        std::vector<double> b(B + 1, 0.0);
        for (std::size_t tt = 0; tt < B; ++tt) {
            for (std::size_t u = 0; u < B; ++u) t.push_back({1 + tt, off + u, tw[k][u]});
            b[1 + tt] = -static_cast<double>(tt) / static_cast<double>(B);
        }
        layers.push_back({Matrix::from_triplets(B + 1, cols, std::move(t)), std::move(b), Activation::relu});
    }
    std::vector<Triplet> t;
    s_row(L - 1, L > 1, t, 0);
    layers.push_back({Matrix::from_triplets(1, B + (L > 1 ? 1 : 0), std::move(t)), {0.0}, Activation::identity});
    return Network(1, std::move(layers));
}

// (x, y) -> 2(psi((x+y)/2) - psi(x/2) - psi(y/2)) ~ xy on [0, 1]^2.
inline Network build_product_unit(std::size_t N, std::size_t L) {
    auto sq = build_square(N, L);
    auto half = [&](double a, double b) {
        return compose_serial(affine_map(Matrix::from_dense(1, 2, std::vector<double>{a, b}), {0.0}), sq);
    };
    return linear_combination({half(0.5, 0.5), half(0.5, 0.0), half(0.0, 0.5)}, {2.0, -2.0, -2.0}, 0.0);
}

// xy on [a, b]^2 via rescaling to the unit square.
inline Network build_product_general(std::size_t N, std::size_t L, double a, double b) {
    require(a < b, "build_product_general: need a < b");
    const double w = b - a, inv = 1.0 / w;
    auto unit = compose(affine_map(Matrix::from_dense(2, 2, std::vector<double>{inv, 0.0, 0.0, inv}), {-a * inv, -a * inv}),
                        build_product_unit(N, L));
    auto shift = Network(2, {{Matrix::from_dense(1, 2, std::vector<double>{1.0, 1.0}), {2.0 * std::abs(a)}, Activation::relu},
                             {Matrix::from_dense(1, 1, std::vector<double>{1.0}), {0.0}, Activation::identity}});
    return linear_combination({unit, shift}, {w * w, a}, -a * a - 2.0 * a * std::abs(a));
}

// x_1 x_2 ... x_k on [0, 1]^k by chaining the product unit.
inline Network build_multi_product(std::size_t k, std::size_t N, std::size_t L) {
    require(k >= 2, "build_multi_product: k must be at least 2");
    auto unit = build_product_unit(N, L);
    auto net = compose_serial(select_coords(k, {0, 1}), unit);
    for (std::size_t i = 2; i < k; ++i) {
        std::vector<Triplet> t{{0, i, 1.0}};
        auto carry = Network(k, {{Matrix::from_triplets(1, k, std::move(t)), {0.0}, Activation::relu},
                                 {Matrix::from_dense(1, 1, std::vector<double>{1.0}), {0.0}, Activation::identity}});
        net = compose(compose_parallel({net, carry}), unit);
    }
    return net;
}

// x^alpha on [0, 1]^d; replication map followed by the multi-product. alpha = 0 gives the constant 1.
inline Network build_monomial(const std::vector<std::size_t>& alpha, std::size_t N, std::size_t L) {
    require(!alpha.empty(), "build_monomial: alpha must have at least one entry");
    const std::size_t d = alpha.size();
    const std::size_t k = std::accumulate(alpha.begin(), alpha.end(), std::size_t{0});
    if (k == 0) return constant_net(d, 1.0);
    const std::size_t slots = std::max<std::size_t>(k, 2);
    std::vector<Triplet> t;
    std::vector<double> b(slots, 0.0);
    std::size_t r = 0;
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t e = 0; e < alpha[j]; ++e) t.push_back({r++, j, 1.0});
    for (; r < slots; ++r) b[r] = 1.0;
    return compose(affine_map(Matrix::from_triplets(slots, d, std::move(t)), std::move(b)), build_multi_product(slots, N, L));
}

}  // namespace reluforge
