// JSON (de)serialization for networks and normalizers. Doubles go through
// the library's shortest-round-trip decimal form, so a dump/parse cycle
// reproduces every value bit-exactly.
#pragma once

#include <fstream>
#include <string>

#include "json.hpp"
#include "penet/mlp.hpp"
#include "penet/normalize.hpp"

namespace penet {

inline nlohmann::ordered_json mlp_to_json(const Mlp& mlp) {
  nlohmann::ordered_json j;
  j["layer_dims"] = mlp.layer_dims;
  j["hidden_activation"] = to_string(mlp.hidden_activation);
  auto layers = nlohmann::ordered_json::array();
  for (const auto& layer : mlp.layers)
    layers.push_back({{"W", layer.W}, {"b", layer.b}});
  j["layers"] = layers;
  return j;
}

inline Mlp mlp_from_json(const nlohmann::json& j) {
  Mlp mlp;
  mlp.layer_dims = j.at("layer_dims").get<std::vector<std::size_t>>();
  mlp.hidden_activation =
      activation_from_string(j.at("hidden_activation").get<std::string>());
  for (const auto& layer : j.at("layers")) {
    mlp.layers.push_back({layer.at("W").get<std::vector<double>>(),
                          layer.at("b").get<std::vector<double>>()});
  }
  if (mlp.layer_dims.size() < 2 || mlp.layers.size() + 1 != mlp.layer_dims.size())
    throw schema_error("mlp_from_json: inconsistent layer structure");
  for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
    if (mlp.layers[l].W.size() != mlp.layer_dims[l + 1] * mlp.layer_dims[l] ||
        mlp.layers[l].b.size() != mlp.layer_dims[l + 1])
      throw schema_error("mlp_from_json: layer shape mismatch");
  }
  return mlp;
}

inline nlohmann::ordered_json normalizer_to_json(const Normalizer& n) {
  return {{"mode", "minmax"},
          {"names", n.names()},
          {"min", n.mins()},
          {"max", n.maxs()}};
}

inline Normalizer normalizer_from_json(const nlohmann::json& j) {
  if (j.at("mode").get<std::string>() != "minmax")
    throw schema_error("normalizer_from_json: unsupported mode");
  return Normalizer(j.at("min").get<std::vector<double>>(),
                    j.at("max").get<std::vector<double>>(),
                    j.at("names").get<std::vector<std::string>>());
}

inline void write_json_file(const nlohmann::ordered_json& j,
                            const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_json_file: cannot open " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write_json_file: write failed for " + path);
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_json_file: cannot open " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

}  // namespace penet
