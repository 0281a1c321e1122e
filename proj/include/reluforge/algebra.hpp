#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "network.hpp"

namespace reluforge {

// Single affine map x -> W x + b, no hidden layer.
inline Network affine_map(Matrix w, std::vector<double> b) {
    std::size_t in = w.cols();
    return Network(in, {AffineLayer{std::move(w), std::move(b), Activation::identity}});
}

inline Network constant_net(std::size_t in_dim, double value) {
    return affine_map(Matrix(1, in_dim), {value});
}

// Picks coordinates idx of an in_dim vector.
inline Network select_coords(std::size_t in_dim, const std::vector<std::size_t>& idx) {
    std::vector<Triplet> t;
    for (std::size_t r = 0; r < idx.size(); ++r) {
        require(idx[r] < in_dim, "select_coords: index out of range");
        t.push_back({r, idx[r], 1.0});
    }
    return affine_map(Matrix::from_triplets(idx.size(), in_dim, std::move(t)), std::vector<double>(idx.size(), 0.0));
}

namespace detail {

// [W; -W] stacked, bias [b; -b]
inline AffineLayer plus_minus(const AffineLayer& l) {
    std::size_t o = l.out_dim();
    std::vector<Triplet> t;
    for (const auto& e : l.weights.triplets()) {
        t.push_back({e.row, e.col, e.value});
        t.push_back({e.row + o, e.col, -e.value});
    }
    std::vector<double> b(2 * o);
    for (std::size_t i = 0; i < o; ++i) {
        b[i] = l.bias[i];
        b[i + o] = -l.bias[i];
    }
    return {Matrix::from_triplets(2 * o, l.in_dim(), std::move(t)), std::move(b), Activation::relu};
}

// [W, -W] side by side; consumes a (relu(y), relu(-y)) pair.
inline Matrix consume_pairs(const Matrix& w) {
    std::size_t c = w.cols();
    std::vector<Triplet> t;
    for (const auto& e : w.triplets()) {
        t.push_back({e.row, e.col, e.value});
        t.push_back({e.row, e.col + c, -e.value});
    }
    return Matrix::from_triplets(w.rows(), 2 * c, std::move(t));
}

inline AffineLayer merge_boundary(const AffineLayer& a_out, const AffineLayer& b_in) {
    AffineLayer m;
    m.weights = b_in.weights.multiply(a_out.weights);
    m.bias = b_in.weights.apply(a_out.bias);
    for (std::size_t i = 0; i < m.bias.size(); ++i) m.bias[i] += b_in.bias[i];
    m.activation = b_in.activation;
    return m;
}

inline double layer_sup(const AffineLayer& l) {
    double s = l.weights.max_abs();
    for (double v : l.bias) s = std::max(s, std::abs(v));
    return s;
}

}  // namespace detail

// b after a, boundary affine maps merged: depth(a) + depth(b) - 1.
inline Network compose_serial(const Network& a, const Network& b) {
    if (a.output_dim() != b.input_dim()) throw dimension_error("compose_serial: output dim of first differs from input dim of second");
    std::vector<AffineLayer> layers(a.layers().begin(), a.layers().end() - 1);
    layers.push_back(detail::merge_boundary(a.layers().back(), b.layers().front()));
    layers.insert(layers.end(), b.layers().begin() + 1, b.layers().end());
    return Network(a.input_dim(), std::move(layers));
}

// b after a through a (relu(y), relu(-y)) coupling: depth(a) + depth(b), no products of weights.
inline Network compose_serial_lifted(const Network& a, const Network& b) {
    if (a.output_dim() != b.input_dim()) throw dimension_error("compose_serial_lifted: dimension mismatch");
    std::vector<AffineLayer> layers(a.layers().begin(), a.layers().end() - 1);
    layers.push_back(detail::plus_minus(a.layers().back()));
    AffineLayer first = b.layers().front();
    first.weights = detail::consume_pairs(first.weights);
    layers.push_back(std::move(first));
    layers.insert(layers.end(), b.layers().begin() + 1, b.layers().end());
    return Network(a.input_dim(), std::move(layers));
}

// Merges the boundary when that keeps every entry within max(sup a, sup b, 1); lifts otherwise.
inline Network compose(const Network& a, const Network& b) {
    if (a.output_dim() != b.input_dim()) throw dimension_error("compose: dimension mismatch");
    double limit = std::max({profile(a).param_sup, profile(b).param_sup, 1.0});
    auto merged = detail::merge_boundary(a.layers().back(), b.layers().front());
    if (detail::layer_sup(merged) <= limit) return compose_serial(a, b);
    return compose_serial_lifted(a, b);
}

// x -> x on R^dim through +-ReLU pairs.
inline Network identity_channel(std::size_t dim, std::size_t depth) {
    require(dim >= 1 && depth >= 1, "identity_channel: dim and depth must be positive");
    if (depth == 1) return affine_map(Matrix::identity(dim), std::vector<double>(dim, 0.0));
    std::vector<AffineLayer> layers;
    layers.push_back(detail::plus_minus(AffineLayer{Matrix::identity(dim), std::vector<double>(dim, 0.0), Activation::identity}));
    for (std::size_t i = 0; i + 2 < depth; ++i)
        layers.push_back({Matrix::identity(2 * dim), std::vector<double>(2 * dim, 0.0), Activation::relu});
    layers.push_back({detail::consume_pairs(Matrix::identity(dim)), std::vector<double>(dim, 0.0), Activation::identity});
    return Network(dim, std::move(layers));
}

// Same function, depth raised to target by carrying the output through +-ReLU pairs.
inline Network pad_depth(const Network& net, std::size_t target) {
    require(target >= net.depth(), "pad_depth: target below current depth");
    if (target == net.depth()) return net;
    return compose_serial_lifted(net, identity_channel(net.output_dim(), target - net.depth()));
}

// Shared input; outputs concatenated. Shallower operands are padded first.
inline Network compose_parallel(const std::vector<Network>& nets) {
    require(!nets.empty(), "compose_parallel: empty operand list");
    std::size_t in = nets.front().input_dim();
    std::size_t depth = 0;
    for (const auto& n : nets) {
        if (n.input_dim() != in) throw dimension_error("compose_parallel: operands must share input_dim");
        depth = std::max(depth, n.depth());
    }
    if (nets.size() == 1) return pad_depth(nets.front(), depth);
    std::vector<Network> padded;
    padded.reserve(nets.size());
    for (const auto& n : nets) padded.push_back(pad_depth(n, depth));

    std::vector<AffineLayer> layers;
    for (std::size_t li = 0; li < depth; ++li) {
        std::vector<Triplet> t;
        std::vector<double> bias;
        std::size_t row_off = 0, col_off = 0;
        for (const auto& n : padded) {
            const auto& l = n.layer(li);
            for (const auto& e : l.weights.triplets()) t.push_back({e.row + row_off, e.col + (li == 0 ? 0 : col_off), e.value});
            bias.insert(bias.end(), l.bias.begin(), l.bias.end());
            row_off += l.out_dim();
            col_off += l.in_dim();
        }
        std::size_t cols = li == 0 ? in : col_off;
        Activation act = li + 1 == depth ? Activation::identity : Activation::relu;
        layers.push_back({Matrix::from_triplets(row_off, cols, std::move(t)), std::move(bias), act});
    }
    return Network(in, std::move(layers));
}

// Operands read consecutive disjoint slices of the input.
inline Network compose_parallel_disjoint(const std::vector<Network>& nets) {
    require(!nets.empty(), "compose_parallel_disjoint: empty operand list");
    std::size_t total = 0;
    for (const auto& n : nets) total += n.input_dim();
    std::vector<Network> routed;
    std::size_t off = 0;
    for (const auto& n : nets) {
        std::vector<std::size_t> idx(n.input_dim());
        std::iota(idx.begin(), idx.end(), off);
        off += n.input_dim();
        routed.push_back(compose_serial(select_coords(total, idx), n));
    }
    return compose_parallel(routed);
}

inline Network linear_combination(const std::vector<Network>& nets, const std::vector<double>& coeffs, double bias) {
    if (nets.size() != coeffs.size()) throw dimension_error("linear_combination: coefficient count differs from operand count");
    require(!nets.empty(), "linear_combination: empty operand list");
    for (const auto& n : nets)
        if (n.output_dim() != 1) throw dimension_error("linear_combination: operands must have scalar output");
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < coeffs.size(); ++i) t.push_back({0, i, coeffs[i]});
    auto outer = affine_map(Matrix::from_triplets(1, coeffs.size(), std::move(t)), {bias});
    return compose(compose_parallel(nets), outer);
}

inline Network max2() {
    auto w1 = Matrix::from_dense(4, 2, std::vector<double>{1, 1, -1, -1, 1, -1, -1, 1});
    auto w2 = Matrix::from_dense(1, 4, std::vector<double>{0.5, -0.5, 0.5, 0.5});
    return Network(2, {{w1, {0, 0, 0, 0}, Activation::relu}, {w2, {0}, Activation::identity}});
}

inline Network min2() {
    auto w1 = Matrix::from_dense(4, 2, std::vector<double>{1, 1, -1, -1, 1, -1, -1, 1});
    auto w2 = Matrix::from_dense(1, 4, std::vector<double>{0.5, -0.5, -0.5, -0.5});
    return Network(2, {{w1, {0, 0, 0, 0}, Activation::relu}, {w2, {0}, Activation::identity}});
}

namespace detail {

inline Network nest3(const Network& op2) {
    auto inner = compose_parallel({compose_serial(select_coords(3, {0, 1}), op2), select_coords(3, {2})});
    return compose(inner, op2);
}

}  // namespace detail

inline Network max3() { return detail::nest3(max2()); }
inline Network min3() { return detail::nest3(min2()); }

// relu(s) - relu(-s) - max3 - min3 with s = x1 + x2 + x3
inline Network mid3() {
    auto sum = affine_map(Matrix::from_dense(1, 3, std::vector<double>{1, 1, 1}), {0});
    return linear_combination({sum, max3(), min3()}, {1, -1, -1}, 0);
}

// Two hidden layers of widths N and N*L become L+1 hidden layers of width 2N + 2*out
// carrying [g | h_i | relu(s) | relu(-s)], s the running partial output.
inline Network widen_to_deep(const Network& shallow, std::size_t N, std::size_t L) {
    require(N >= 1 && L >= 1, "widen_to_deep: N and L must be positive");
    if (shallow.depth() != 3 || shallow.layer(0).out_dim() != N || shallow.layer(1).out_dim() != N * L)
        throw precondition_error("widen_to_deep: expected two hidden layers of widths N and N*L");
    const auto& l1 = shallow.layer(0);
    const auto& l2 = shallow.layer(1);
    const auto& l3 = shallow.layer(2);
    const std::size_t o = l3.out_dim();

    auto w2 = l2.weights.triplets();
    auto w3 = l3.weights.triplets();
    auto h_rows = [&](std::size_t i, std::size_t row_off, std::size_t g_col, std::vector<Triplet>& t, std::vector<double>& b) {
        for (const auto& e : w2)
            if (e.row / N == i) t.push_back({row_off + e.row % N, g_col + e.col, e.value});
        for (std::size_t r = 0; r < N; ++r) b.push_back(l2.bias[i * N + r]);
    };
    // s_{i} = s_{i-1} + W3_i h_i, written into rows [row_off, row_off+o) with sign.
    auto s_rows = [&](std::size_t i, std::size_t row_off, std::size_t h_col, bool have_prev, std::size_t s_col, double sign,
                      std::vector<Triplet>& t) {
        for (const auto& e : w3)
            if (e.col / N == i) t.push_back({row_off + e.row, h_col + e.col % N, sign * e.value});
        if (have_prev)
            for (std::size_t r = 0; r < o; ++r) {
                t.push_back({row_off + r, s_col + r, sign});
                t.push_back({row_off + r, s_col + o + r, -sign});
            }
    };

    std::vector<AffineLayer> layers;
    layers.push_back(l1);
    layers.back().activation = Activation::relu;

    // input layout of layer k (k >= 2): [g (N, if carried) | h_{k-2} (N) | sp (o) | sn (o)]
    std::size_t in_cols = N;
    bool in_has_g = true, in_has_h = false, in_has_s = false;
    for (std::size_t i = 0; i < L; ++i) {
        std::vector<Triplet> t;
        std::vector<double> b;
        std::size_t row = 0;
        const std::size_t g_col = 0, h_col = in_has_g ? N : 0, s_col = h_col + (in_has_h ? N : 0);
        bool carry_g = i + 1 < L;
        if (carry_g) {
            for (std::size_t r = 0; r < N; ++r) t.push_back({r, g_col + r, 1.0});
            b.insert(b.end(), N, 0.0);
            row += N;
        }
        h_rows(i, row, g_col, t, b);
        row += N;
        if (in_has_h) {
            s_rows(i - 1, row, h_col, in_has_s, s_col, 1.0, t);
            s_rows(i - 1, row + o, h_col, in_has_s, s_col, -1.0, t);
            b.insert(b.end(), 2 * o, 0.0);
            row += 2 * o;
        }
        layers.push_back({Matrix::from_triplets(row, in_cols, std::move(t)), std::move(b), Activation::relu});
        in_has_s = in_has_h;
        in_has_h = true;
        in_has_g = carry_g;
        in_cols = row;
    }
    std::vector<Triplet> t;
    const std::size_t h_col = in_has_g ? N : 0, s_col = h_col + N;
    s_rows(L - 1, 0, h_col, in_has_s, s_col, 1.0, t);
    layers.push_back({Matrix::from_triplets(o, in_cols, std::move(t)), l3.bias, Activation::identity});
    return Network(shallow.input_dim(), std::move(layers));
}

}  // namespace reluforge
