// Dataset generator configuration and construction: Latin-hypercube designs
// over shape/process bounds, labeled by the elastic-plastic bending model.
// Dataset 1 is the large single-layer corpus, dataset 2 the small bi-layer
// one; the bi-layer labels come from exact two-layer integration, never from
// the section equivalence, so the equivalence error is present in the data.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "penet/bending.hpp"
#include "penet/dataset.hpp"
#include "penet/lhs.hpp"
#include "penet/section.hpp"

namespace penet {

struct FeatureBounds {
  Interval Do{12.0, 30.0};
  Interval T{0.8, 2.5};
  Interval Tr{0.2, 0.8};
  Interval RB{40.0, 120.0};
  Interval alphaB{30.0, 120.0};
  Interval vB{5.0, 20.0};
  Interval omegaB{0.2, 1.0};
  Interval Lp{50.0, 150.0};
  Interval gap{0.05, 0.3};
  Interval friction{0.05, 0.3};
};

struct ProcessEffectConfig {
  double v_coeff = 0.02;
  double omega_coeff = 0.01;
};

struct GeneratorConfig {
  FeatureBounds bounds;
  MaterialSpec outer{80700.0, 150.0, 500.0};    // reference material 1
  MaterialSpec inner{110000.0, 200.0, 1000.0};  // material 2
  std::size_t n_dataset1 = 600;
  std::size_t n_dataset2 = 80;
  double noise_sigma = 0.05;  // degrees
  BendingGrid grid;
  ProcessEffectConfig effect;
  bool include_optional_features = false;
  bool tr_is_inner = false;

  double lambda2() const { return inner.E / outer.E; }

  ProcessEffect process_effect() const {
    return {effect.v_coeff, effect.omega_coeff,
            0.5 * (bounds.vB.lo + bounds.vB.hi),
            0.5 * (bounds.omegaB.lo + bounds.omegaB.hi)};
  }
};

namespace detail {

inline nlohmann::ordered_json interval_json(const Interval& iv) {
  return nlohmann::ordered_json::array({iv.lo, iv.hi});
}

inline Interval interval_from(const nlohmann::json& j, const Interval& fallback) {
  if (j.is_null()) return fallback;
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

inline nlohmann::ordered_json material_json(const MaterialSpec& m) {
  return {{"E", m.E}, {"sigma_y", m.sigma_y}, {"Et", m.Et}};
}

inline MaterialSpec material_from(const nlohmann::json& j, const MaterialSpec& fb) {
  if (j.is_null()) return fb;
  return {j.value("E", fb.E), j.value("sigma_y", fb.sigma_y), j.value("Et", fb.Et)};
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const GeneratorConfig& c) {
  nlohmann::ordered_json j;
  j["bounds"] = {{"Do", detail::interval_json(c.bounds.Do)},
                 {"T", detail::interval_json(c.bounds.T)},
                 {"Tr", detail::interval_json(c.bounds.Tr)},
                 {"RB", detail::interval_json(c.bounds.RB)},
                 {"alphaB", detail::interval_json(c.bounds.alphaB)},
                 {"vB", detail::interval_json(c.bounds.vB)},
                 {"omegaB", detail::interval_json(c.bounds.omegaB)},
                 {"Lp", detail::interval_json(c.bounds.Lp)},
                 {"gap", detail::interval_json(c.bounds.gap)},
                 {"friction", detail::interval_json(c.bounds.friction)}};
  j["material_outer"] = detail::material_json(c.outer);
  j["material_inner"] = detail::material_json(c.inner);
  j["n_dataset1"] = c.n_dataset1;
  j["n_dataset2"] = c.n_dataset2;
  j["noise_sigma"] = c.noise_sigma;
  j["grid"] = {{"radial", c.grid.radial}, {"angular", c.grid.angular}};
  j["process_effect"] = {{"v_coeff", c.effect.v_coeff},
                         {"omega_coeff", c.effect.omega_coeff}};
  j["include_optional_features"] = c.include_optional_features;
  j["tr_is_inner"] = c.tr_is_inner;
  return j;
}

inline GeneratorConfig generator_config_from_json(const nlohmann::json& j) {
  GeneratorConfig c;
  if (j.contains("bounds")) {
    const auto& b = j.at("bounds");
    auto get = [&](const char* key, Interval fb) {
      return b.contains(key) ? detail::interval_from(b.at(key), fb) : fb;
    };
    c.bounds.Do = get("Do", c.bounds.Do);
    c.bounds.T = get("T", c.bounds.T);
    c.bounds.Tr = get("Tr", c.bounds.Tr);
    c.bounds.RB = get("RB", c.bounds.RB);
    c.bounds.alphaB = get("alphaB", c.bounds.alphaB);
    c.bounds.vB = get("vB", c.bounds.vB);
    c.bounds.omegaB = get("omegaB", c.bounds.omegaB);
    c.bounds.Lp = get("Lp", c.bounds.Lp);
    c.bounds.gap = get("gap", c.bounds.gap);
    c.bounds.friction = get("friction", c.bounds.friction);
  }
  if (j.contains("material_outer"))
    c.outer = detail::material_from(j.at("material_outer"), c.outer);
  if (j.contains("material_inner"))
    c.inner = detail::material_from(j.at("material_inner"), c.inner);
  c.n_dataset1 = j.value("n_dataset1", c.n_dataset1);
  c.n_dataset2 = j.value("n_dataset2", c.n_dataset2);
  c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
  if (j.contains("grid")) {
    c.grid.radial = j.at("grid").value("radial", c.grid.radial);
    c.grid.angular = j.at("grid").value("angular", c.grid.angular);
  }
  if (j.contains("process_effect")) {
    c.effect.v_coeff = j.at("process_effect").value("v_coeff", c.effect.v_coeff);
    c.effect.omega_coeff =
        j.at("process_effect").value("omega_coeff", c.effect.omega_coeff);
  }
  c.include_optional_features =
      j.value("include_optional_features", c.include_optional_features);
  c.tr_is_inner = j.value("tr_is_inner", c.tr_is_inner);
  return c;
}

// FNV-1a over the canonical JSON dump; identifies a config in provenance.
inline std::string config_hash(const nlohmann::ordered_json& j) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

constexpr std::uint64_t kTagD1Lhs = 11;
constexpr std::uint64_t kTagD1Noise = 12;
constexpr std::uint64_t kTagD2Lhs = 21;
constexpr std::uint64_t kTagD2Noise = 22;

inline ProcessParams process_from_row(std::span<const double> row,
                                      std::size_t offset, bool optional_tail) {
  ProcessParams p;
  p.RB = row[offset];
  p.alphaB = row[offset + 1];
  p.vB = row[offset + 2];
  p.omegaB = row[offset + 3];
  if (optional_tail) {
    p.Lp_die = row[offset + 4];
    p.gap = row[offset + 5];
    p.friction = row[offset + 6];
  }
  return p;
}

}  // namespace detail

inline std::vector<std::string> dataset1_feature_names(const GeneratorConfig& c) {
  std::vector<std::string> names{"Do", "T", "RB", "alphaB", "vB", "omegaB"};
  if (c.include_optional_features)
    names.insert(names.end(), {"Lp", "gap", "friction"});
  return names;
}

inline std::vector<std::string> dataset2_feature_names(const GeneratorConfig& c) {
  std::vector<std::string> names{"Do", "T", "Tr", "RB", "alphaB", "vB", "omegaB"};
  if (c.include_optional_features)
    names.insert(names.end(), {"Lp", "gap", "friction"});
  return names;
}

// Single-layer dataset: tubes of the reference material.
inline Dataset generate_dataset1(const GeneratorConfig& c, std::uint64_t seed) {
  if (c.n_dataset1 < 1)
    throw std::invalid_argument("generate_dataset1: sample count must be >= 1");
  c.outer.validate();
  std::vector<Interval> bounds{c.bounds.Do, c.bounds.T, c.bounds.RB,
                               c.bounds.alphaB, c.bounds.vB, c.bounds.omegaB};
  if (c.include_optional_features)
    bounds.insert(bounds.end(), {c.bounds.Lp, c.bounds.gap, c.bounds.friction});

  Dataset ds;
  ds.feature_names = dataset1_feature_names(c);
  ds.features = lhs_sample(c.n_dataset1, bounds,
                           derive_seed(seed, detail::kTagD1Lhs));
  ds.labels.resize(c.n_dataset1);
  ProcessEffect effect = c.process_effect();
  std::uint64_t noise_base = derive_seed(seed, detail::kTagD1Noise);
  for (std::size_t i = 0; i < c.n_dataset1; ++i) {
    const auto& row = ds.features[i];
    auto layers = single_tube_layers(row[0], row[1], c.outer);
    ProcessParams p =
        detail::process_from_row(row, 2, c.include_optional_features);
    ds.labels[i] = springback_angle(layers, p, c.grid, effect, c.noise_sigma,
                                    noise_base + i);
  }
  ds.provenance = "gen=" + config_hash(to_json(c)) + ";seed=" +
                  std::to_string(seed) + ";dataset=1";
  return ds;
}

// Bi-layer dataset labeled by exact two-layer integration.
inline Dataset generate_dataset2(const GeneratorConfig& c, std::uint64_t seed) {
  if (c.n_dataset2 < 1)
    throw std::invalid_argument("generate_dataset2: sample count must be >= 1");
  c.outer.validate();
  c.inner.validate();
  std::vector<Interval> bounds{c.bounds.Do, c.bounds.T,  c.bounds.Tr,
                               c.bounds.RB, c.bounds.alphaB, c.bounds.vB,
                               c.bounds.omegaB};
  if (c.include_optional_features)
    bounds.insert(bounds.end(), {c.bounds.Lp, c.bounds.gap, c.bounds.friction});

  Dataset ds;
  ds.feature_names = dataset2_feature_names(c);
  ds.features = lhs_sample(c.n_dataset2, bounds,
                           derive_seed(seed, detail::kTagD2Lhs));
  ds.labels.resize(c.n_dataset2);
  ProcessEffect effect = c.process_effect();
  std::uint64_t noise_base = derive_seed(seed, detail::kTagD2Noise);
  for (std::size_t i = 0; i < c.n_dataset2; ++i) {
    const auto& row = ds.features[i];
    BmtShape shape{row[0], row[1], row[2]};
    auto layers = bmt_layers(shape, c.outer, c.inner, c.tr_is_inner);
    ProcessParams p =
        detail::process_from_row(row, 3, c.include_optional_features);
    ds.labels[i] = springback_angle(layers, p, c.grid, effect, c.noise_sigma,
                                    noise_base + i);
  }
  ds.provenance = "gen=" + config_hash(to_json(c)) + ";seed=" +
                  std::to_string(seed) + ";dataset=2";
  return ds;
}

inline std::pair<Dataset, Dataset> generate_datasets(const GeneratorConfig& c,
                                                     std::uint64_t seed) {
  return {generate_dataset1(c, seed), generate_dataset2(c, seed)};
}

inline void write_datasets(const GeneratorConfig& c, std::uint64_t seed,
                           const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto [d1, d2] = generate_datasets(c, seed);
  write_csv(d1, (std::filesystem::path(dir) / "dataset1.csv").string());
  write_csv(d2, (std::filesystem::path(dir) / "dataset2.csv").string());
}

}  // namespace penet
