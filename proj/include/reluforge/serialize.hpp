#pragma once

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "network.hpp"

namespace reluforge {

namespace detail {

inline bool write_dense(const Matrix& w) {
    std::size_t cells = w.rows() * w.cols();
    return cells <= 4096 || cells <= 4 * w.nnz();
}

inline nlohmann::json layer_to_json(const AffineLayer& l) {
    nlohmann::json j;
    j["out_dim"] = l.out_dim();
    j["in_dim"] = l.in_dim();
    if (write_dense(l.weights)) {
        j["weights"] = l.weights.to_dense();
    } else {
        auto arr = nlohmann::json::array();
        for (const auto& t : l.weights.triplets()) arr.push_back(nlohmann::json::array({t.row, t.col, t.value}));
        j["weights_sparse"] = std::move(arr);
    }
    j["bias"] = l.bias;
    j["activation"] = l.activation == Activation::relu ? "relu" : "identity";
    return j;
}

inline AffineLayer layer_from_json(const nlohmann::json& j, int idx) {
    auto fail = [idx](const std::string& m) { return parse_error(m, idx); };
    if (!j.is_object()) throw fail("layer is not an object");
    for (const char* key : {"out_dim", "in_dim", "bias", "activation"})
        if (!j.contains(key)) throw fail(std::string("missing field '") + key + "'");
    if (!j["out_dim"].is_number_unsigned() || !j["in_dim"].is_number_unsigned())
        throw fail("out_dim/in_dim must be non-negative integers");
    std::size_t rows = j["out_dim"].get<std::size_t>();
    std::size_t cols = j["in_dim"].get<std::size_t>();

    auto number = [&](const nlohmann::json& v) {
        if (!v.is_number()) throw fail("non-numeric entry");
        double d = v.get<double>();
        if (!std::isfinite(d)) throw fail("non-finite entry");
        return d;
    };

    AffineLayer l;
    bool dense = j.contains("weights"), sparse = j.contains("weights_sparse");
    if (dense == sparse) throw fail("exactly one of 'weights' or 'weights_sparse' is required");
    if (dense) {
        const auto& w = j["weights"];
        if (!w.is_array() || w.size() != rows * cols) throw fail("weights length differs from out_dim*in_dim");
        std::vector<double> d;
        d.reserve(w.size());
        for (const auto& v : w) d.push_back(number(v));
        l.weights = Matrix::from_dense(rows, cols, d);
    } else {
        const auto& w = j["weights_sparse"];
        if (!w.is_array()) throw fail("weights_sparse must be an array");
        std::vector<Triplet> t;
        for (const auto& e : w) {
            if (!e.is_array() || e.size() != 3 || !e[0].is_number_unsigned() || !e[1].is_number_unsigned())
                throw fail("weights_sparse entries must be [row, col, value]");
            std::size_t r = e[0].get<std::size_t>(), c = e[1].get<std::size_t>();
            if (r >= rows || c >= cols) throw fail("weights_sparse index out of range");
            t.push_back({r, c, number(e[2])});
        }
        l.weights = Matrix::from_triplets(rows, cols, std::move(t));
    }
    const auto& b = j["bias"];
    if (!b.is_array()) throw fail("bias must be an array");
    if (b.size() != rows) throw fail("bias length differs from out_dim");
    for (const auto& v : b) l.bias.push_back(number(v));
    const auto& a = j["activation"];
    if (a == "relu")
        l.activation = Activation::relu;
    else if (a == "identity")
        l.activation = Activation::identity;
    else
        throw fail("activation must be \"relu\" or \"identity\"");
    return l;
}

}  // namespace detail

inline nlohmann::json to_json(const Network& net) {
    nlohmann::json j;
    j["input_dim"] = net.input_dim();
    auto layers = nlohmann::json::array();
    for (const auto& l : net.layers()) layers.push_back(detail::layer_to_json(l));
    j["layers"] = std::move(layers);
    return j;
}

inline Network from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw parse_error("document is not an object");
    if (!j.contains("input_dim") || !j["input_dim"].is_number_unsigned())
        throw parse_error("missing or invalid input_dim");
    if (!j.contains("layers") || !j["layers"].is_array() || j["layers"].empty())
        throw parse_error("missing or empty layers");
    std::vector<AffineLayer> layers;
    int idx = 0;
    for (const auto& lj : j["layers"]) layers.push_back(detail::layer_from_json(lj, idx++));
    std::size_t prev = j["input_dim"].get<std::size_t>();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        int at = static_cast<int>(i);
        if (layers[i].in_dim() != prev) throw parse_error("in_dim does not match previous layer", at);
        bool last = i + 1 == layers.size();
        if (last != (layers[i].activation == Activation::identity))
            throw parse_error(last ? "output layer must be identity" : "hidden layer must be relu", at);
        prev = layers[i].out_dim();
    }
    try {
        return Network(j["input_dim"].get<std::size_t>(), std::move(layers));
    } catch (const precondition_error& e) {
        throw parse_error(e.what());
    }
}

inline std::string serialize(const Network& net) { return to_json(net).dump(); }

inline Network deserialize(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw parse_error(std::string("malformed document: ") + e.what());
    }
    return from_json(j);
}

inline void write_network(std::ostream& os, const Network& net) { os << serialize(net) << '\n'; }

inline Network read_network(std::istream& is) {
    std::stringstream ss;
    ss << is.rdbuf();
    return deserialize(ss.str());
}

}  // namespace reluforge
