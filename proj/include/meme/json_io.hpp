#ifndef MEME_JSON_IO_HPP
#define MEME_JSON_IO_HPP

#include <json.hpp>

#include <fstream>
#include <string>
#include <vector>

#include "meme/error.hpp"
#include "meme/gmm.hpp"

namespace meme {

/// {"components":[{"w":..,"mean":..,"std":..},...]}; unknown keys are rejected.
inline GaussianMixture1D mixture_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("components") || j.size() != 1)
    throw Error("mixture must be an object with a single \"components\" array");
  const auto& arr = j.at("components");
  if (!arr.is_array()) throw Error("\"components\" must be an array");
  GaussianMixture1D g;
  for (const auto& c : arr) {
    if (!c.is_object()) throw Error("mixture component must be an object");
    for (const auto& [key, value] : c.items()) {
      if (key != "w" && key != "mean" && key != "std") throw Error("unknown mixture component key '" + key + "'");
      if (!value.is_number()) throw Error("mixture component '" + key + "' must be a number");
    }
    if (!c.contains("w") || !c.contains("mean") || !c.contains("std"))
      throw Error("mixture component needs w, mean and std");
    g.components.push_back({c["w"].get<double>(), c["mean"].get<double>(), c["std"].get<double>()});
  }
  g.validate();
  return g;
}

inline nlohmann::json mixture_to_json(const GaussianMixture1D& g) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : g.components) arr.push_back({{"w", c.weight}, {"mean", c.mean}, {"std", c.stddev}});
  return {{"components", arr}};
}

/// Accepts one mixture object or {"mixtures":[...]}.
inline std::vector<GaussianMixture1D> mixtures_from_json(const nlohmann::json& j) {
  if (j.is_object() && j.contains("mixtures")) {
    if (j.size() != 1 || !j["mixtures"].is_array())
      throw Error("batch file must be an object with a single \"mixtures\" array");
    std::vector<GaussianMixture1D> out;
    for (const auto& m : j["mixtures"]) out.push_back(mixture_from_json(m));
    if (out.empty()) throw Error("batch file contains no mixtures");
    return out;
  }
  return {mixture_from_json(j)};
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("invalid JSON in '" + path + "': " + e.what());
  }
}

inline std::vector<GaussianMixture1D> read_mixtures(const std::string& path) {
  return mixtures_from_json(read_json_file(path));
}

}  // namespace meme

#endif  // MEME_JSON_IO_HPP
