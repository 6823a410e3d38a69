#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fewbose/errors.hpp"
#include "fewbose/units.hpp"

namespace fewbose {

// Resonance catalog: JSON array of records with the ResonanceParams fields
// in experimental units (Gauss, Bohr radii, |mu_B|, amu). "b" may be omitted
// to default to R_vdW.

inline ResonanceParams parse_resonance(const nlohmann::json& j) {
  ResonanceParams r;
  r.label = j.at("label").get<std::string>();
  r.B0_gauss = j.at("B0").get<double>();
  r.delta_B_gauss = j.at("deltaB").get<double>();
  r.a_bg_a0 = j.at("a_bg").get<double>();
  r.delta_mu_muB = j.at("delta_mu").get<double>();
  r.R_vdW_a0 = j.at("R_vdW").get<double>();
  r.mass_amu = j.at("mass").get<double>();
  if (j.contains("b")) r.b_a0 = j.at("b").get<double>();
  r.validate();
  return r;
}

inline std::vector<ResonanceParams> load_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("catalog: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("catalog: parse error in " + path + ": " + e.what());
  }
  if (!j.is_array()) throw ConfigError("catalog: expected a JSON array");
  std::vector<ResonanceParams> out;
  for (const auto& rec : j) out.push_back(parse_resonance(rec));
  return out;
}

// The two resonances used throughout: Cs at -11.7 G with b = 0.7 R_vdW, and
// Na at 907 G with b = R_vdW. Same values as data/resonances.json.
inline std::vector<ResonanceParams> builtin_catalog() {
  std::vector<ResonanceParams> out;
  out.push_back(ResonanceParams{"Cs", -11.7, 28.7, 1720.0, 2.3, 101.0, 70.7,
                                132.905451933});
  out.push_back(
      ResonanceParams{"Na", 907.0, 1.0, 63.0, 3.8, 44.5, 44.5, 22.98976928});
  return out;
}

inline ResonanceParams find_resonance(const std::vector<ResonanceParams>& cat,
                                      const std::string& label) {
  for (const auto& r : cat)
    if (r.label == label) return r;
  throw ConfigError("catalog: no resonance labeled '" + label + "'");
}

}  // namespace fewbose
