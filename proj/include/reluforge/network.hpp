#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"

namespace reluforge {

enum class Activation { relu, identity };

struct AffineLayer {
    Matrix weights;  // rows = output dim, cols = input dim
    std::vector<double> bias;
    Activation activation = Activation::relu;

    std::size_t in_dim() const noexcept { return weights.cols(); }
    std::size_t out_dim() const noexcept { return weights.rows(); }

    friend bool operator==(const AffineLayer& a, const AffineLayer& b) {
        return a.activation == b.activation && a.bias == b.bias && a.weights == b.weights;
    }
};

// Feed-forward network: ReLU on every hidden layer, identity on the output layer.
class Network {
public:
    Network(std::size_t input_dim, std::vector<AffineLayer> layers)
        : input_dim_(input_dim), layers_(std::move(layers)) {
        validate();
    }

    std::size_t input_dim() const noexcept { return input_dim_; }
    std::size_t output_dim() const noexcept { return layers_.back().out_dim(); }
    std::size_t depth() const noexcept { return layers_.size(); }
    const std::vector<AffineLayer>& layers() const noexcept { return layers_; }
    const AffineLayer& layer(std::size_t i) const { return layers_.at(i); }

    friend bool operator==(const Network& a, const Network& b) {
        return a.input_dim_ == b.input_dim_ && a.layers_ == b.layers_;
    }

private:
    void validate() const {
        if (input_dim_ == 0) throw precondition_error("network input dimension must be positive");
        if (layers_.empty()) throw precondition_error("network needs at least one layer");
        std::size_t prev = input_dim_;
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            const auto& l = layers_[i];
            const std::string at = "layer " + std::to_string(i) + ": ";
            if (l.in_dim() != prev) throw precondition_error(at + "input dimension does not match previous layer");
            if (l.out_dim() == 0) throw precondition_error(at + "output dimension must be positive");
            if (l.bias.size() != l.out_dim()) throw precondition_error(at + "bias length differs from row count");
            if (!l.weights.all_finite() ||
                !std::all_of(l.bias.begin(), l.bias.end(), [](double v) { return std::isfinite(v); }))
                throw precondition_error(at + "non-finite entry");
            bool last = i + 1 == layers_.size();
            if (last && l.activation != Activation::identity)
                throw precondition_error(at + "output layer must use identity activation");
            if (!last && l.activation != Activation::relu)
                throw precondition_error(at + "hidden layers must use ReLU activation");
            prev = l.out_dim();
        }
    }

    std::size_t input_dim_;
    std::vector<AffineLayer> layers_;
};

struct NetworkProfile {
    std::size_t width = 0;
    std::size_t depth = 0;
    double param_sup = 0.0;
    std::size_t nonzero_weights = 0;

    friend bool operator==(const NetworkProfile&, const NetworkProfile&) = default;
};

inline double relu(double v) noexcept { return v > 0.0 ? v : 0.0; }

// Pre-activations are computed as (sum of weight*input in column order) + bias.
inline std::vector<double> evaluate(const Network& net, std::span<const double> x) {
    if (x.size() != net.input_dim())
        throw dimension_error("input has length " + std::to_string(x.size()) + ", network expects " +
                              std::to_string(net.input_dim()));
    std::vector<double> cur(x.begin(), x.end()), next;
    for (const auto& l : net.layers()) {
        next.resize(l.out_dim());
        for (std::size_t r = 0; r < l.out_dim(); ++r) {
            double v = l.weights.row_dot(r, cur) + l.bias[r];
            next[r] = l.activation == Activation::relu ? relu(v) : v;
        }
        cur.swap(next);
    }
    return cur;
}

inline double evaluate_scalar(const Network& net, std::span<const double> x) {
    auto y = evaluate(net, x);
    if (y.size() != 1) throw dimension_error("network output is not scalar");
    return y[0];
}

inline double evaluate_scalar(const Network& net, double x) {
    return evaluate_scalar(net, std::span<const double>(&x, 1));
}

inline NetworkProfile profile(const Network& net) {
    NetworkProfile p;
    p.depth = net.depth();
    for (const auto& l : net.layers()) {
        p.width = std::max(p.width, l.out_dim());
        p.param_sup = std::max(p.param_sup, l.weights.max_abs());
        p.nonzero_weights += l.weights.nnz();
        for (double b : l.bias) {
            p.param_sup = std::max(p.param_sup, std::abs(b));
            if (b != 0.0) ++p.nonzero_weights;
        }
    }
    return p;
}

}  // namespace reluforge
