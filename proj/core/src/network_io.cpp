#include "drm/network_io.hpp"

#include <fstream>

#include "drm/errors.hpp"

namespace drm {

using nlohmann::json;

json network_to_json(const Network& net) {
  json layers = json::array();
  for (const Layer& l : net.layers()) {
    json w = json::array();
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) row.push_back(l.weights(r, c));
      w.push_back(std::move(row));
    }
    json b = json::array();
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) b.push_back(l.bias(r));
    json act;
    if (auto u = l.uniform_activation()) {
      act = std::string(to_string(*u));
    } else {
      act = json::array();
      for (Activation a : l.activations) act.push_back(std::string(to_string(a)));
    }
    layers.push_back({{"weights", std::move(w)}, {"bias", std::move(b)}, {"activation", std::move(act)}});
  }
  return {{"input_dim", net.input_dim()}, {"layers", std::move(layers)}};
}

namespace {

const json& field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(std::string("model: missing field '") + key + "'");
  return *it;
}

}  // namespace

Network network_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("model: expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "input_dim" && it.key() != "layers") throw ConfigError("model: unknown key '" + it.key() + "'");
  }
  const int input_dim = field(j, "input_dim").get<int>();
  const json& jl = field(j, "layers");
  if (!jl.is_array() || jl.empty()) throw ConfigError("model: 'layers' must be a non-empty array");
  std::vector<Layer> layers;
  Eigen::Index in_dim = input_dim;
  try {
    for (const json& l : jl) {
      for (auto it = l.begin(); it != l.end(); ++it) {
        if (it.key() != "weights" && it.key() != "bias" && it.key() != "activation") {
          throw ConfigError("model: unknown layer key '" + it.key() + "'");
        }
      }
      const auto bias = field(l, "bias").get<std::vector<double>>();
      const Eigen::Index out = static_cast<Eigen::Index>(bias.size());
      const json& jw = field(l, "weights");
      Matrix w(out, in_dim);
      if (!jw.empty() && jw.front().is_array()) {
        if (static_cast<Eigen::Index>(jw.size()) != out) throw ShapeError("model: weights rows != bias size");
        for (Eigen::Index r = 0; r < out; ++r) {
          const auto row = jw[static_cast<std::size_t>(r)].get<std::vector<double>>();
          if (static_cast<Eigen::Index>(row.size()) != in_dim) throw ShapeError("model: weights columns mismatch");
          for (Eigen::Index c = 0; c < in_dim; ++c) w(r, c) = row[static_cast<std::size_t>(c)];
        }
      } else {
        const auto flat = jw.get<std::vector<double>>();
        if (static_cast<Eigen::Index>(flat.size()) != out * in_dim) throw ShapeError("model: weights size mismatch");
        for (Eigen::Index r = 0; r < out; ++r) {
          for (Eigen::Index c = 0; c < in_dim; ++c) w(r, c) = flat[static_cast<std::size_t>(r * in_dim + c)];
        }
      }
      const json& ja = field(l, "activation");
      Vector b = Eigen::Map<const Vector>(bias.data(), out);
      if (ja.is_string()) {
        layers.emplace_back(std::move(w), std::move(b), activation_from_string(ja.get<std::string>()));
      } else {
        std::vector<Activation> acts;
        for (const json& a : ja) acts.push_back(activation_from_string(a.get<std::string>()));
        if (static_cast<Eigen::Index>(acts.size()) != out) throw ShapeError("model: one activation per unit expected");
        layers.emplace_back(std::move(w), std::move(b), std::move(acts));
      }
      in_dim = out;
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  return Network(input_dim, std::move(layers));
}

void save_network(const Network& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << network_to_json(net).dump(2) << '\n';
}

Network load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return network_from_json(j);
}

}  // namespace drm
