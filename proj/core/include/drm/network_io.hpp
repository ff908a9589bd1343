#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "drm/network.hpp"

namespace drm {

/// {input_dim, layers:[{weights:[[row],...], bias:[...], activation}]}
///
/// `activation` is a string when a layer uses one activation for all units
/// and an array of strings (one per unit) otherwise. On input, weights may
/// also be given as a flat row-major array.
nlohmann::json network_to_json(const Network& net);
Network network_from_json(const nlohmann::json& j);

void save_network(const Network& net, const std::filesystem::path& path);
Network load_network(const std::filesystem::path& path);

}  // namespace drm
