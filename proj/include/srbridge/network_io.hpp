#pragma once

#include <fstream>
#include <json.hpp>
#include <string>

#include "srbridge/errors.hpp"
#include "srbridge/network.hpp"

namespace srb {

inline constexpr int network_format_version = 1;

inline nlohmann::json network_to_json(const NetworkParams& p) {
    nlohmann::json j;
    j["format_version"] = network_format_version;
    j["layer_sizes"] = p.layer_sizes;
    j["activation"] = to_string(p.activation);
    nlohmann::json weights = nlohmann::json::array();
    nlohmann::json biases = nlohmann::json::array();
    for (int l = 0; l < p.layers(); ++l) {
        std::vector<double> w;
        w.reserve(p.weights[l].size());
        for (int r = 0; r < p.weights[l].rows(); ++r)       // row-major
            for (int c = 0; c < p.weights[l].cols(); ++c) w.push_back(p.weights[l](r, c));
        weights.push_back(w);
        std::vector<double> b(p.biases[l].data(), p.biases[l].data() + p.biases[l].size());
        biases.push_back(b);
    }
    j["weights"] = weights;
    j["biases"] = biases;
    return j;
}

inline NetworkParams network_from_json(const nlohmann::json& j) {
    if (!j.contains("format_version") || j["format_version"].get<int>() != network_format_version)
        throw ConfigError("network file: unsupported format version");
    NetworkParams p;
    p.layer_sizes = j["layer_sizes"].get<std::vector<int>>();
    p.activation = activation_from_string(j["activation"].get<std::string>());
    const auto& weights = j["weights"];
    const auto& biases = j["biases"];
    if (weights.size() + 1 != p.layer_sizes.size() || biases.size() != weights.size())
        throw ConfigError("network file: layer count mismatch");
    for (std::size_t l = 0; l + 1 < p.layer_sizes.size(); ++l) {
        const int in = p.layer_sizes[l], out = p.layer_sizes[l + 1];
        const auto w = weights[l].get<std::vector<double>>();
        const auto b = biases[l].get<std::vector<double>>();
        if (static_cast<int>(w.size()) != in * out || static_cast<int>(b.size()) != out)
            throw ConfigError("network file: weight block size mismatch");
        Eigen::MatrixXd W(out, in);
        for (int r = 0; r < out; ++r)
            for (int c = 0; c < in; ++c) W(r, c) = w[r * in + c];
        p.weights.push_back(std::move(W));
        p.biases.push_back(Eigen::Map<const Eigen::VectorXd>(b.data(), out));
    }
    return p;
}

inline void save_network(const NetworkParams& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write network file '" + path + "'");
    out << network_to_json(p).dump(1) << "\n";
}

inline NetworkParams load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read network file '" + path + "'");
    nlohmann::json j;
    in >> j;
    return network_from_json(j);
}

}  // namespace srb
