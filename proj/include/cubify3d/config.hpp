// Copyright 2026 The cubify3d Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cubify3d/errors.hpp"
#include "cubify3d/geometry.hpp"
#include "cubify3d/iou.hpp"

namespace cubify3d {

// Stock dimension priors (dataset-wide min/max in meters).
inline constexpr DimPriors kKittiDimPriors{0.30, 3.01, 0.76, 4.20, 0.20, 35.24};
inline constexpr DimPriors kVKitti2DimPriors{1.13, 3.02, 1.22, 4.20, 2.22, 16.44};

/// Region of interest and tensor shape: 4 image-plane quadrants, `cuboids`
/// depth cells of z_max/cuboids meters each, `slots` objects per cell.
struct RoiPriorConfig {
  double x_max = 40.0;  // half-extent, meters
  double y_max = 10.0;  // half-extent, meters
  double z_max = 100.0;
  int cuboids = 5;  // depth cells per quadrant
  int slots = 10;   // object slots per cuboid
  DimPriors dim_priors = kKittiDimPriors;

  double dz() const { return z_max / cuboids; }
  int capacity() const { return 4 * cuboids * slots; }
};

inline void validate(const RoiPriorConfig& cfg) {
  if (cfg.x_max <= 0.0 || cfg.y_max <= 0.0 || cfg.z_max <= 0.0) {
    throw ConfigError("roi extents must be positive");
  }
  if (cfg.cuboids < 1 || cfg.slots < 1) {
    throw ConfigError("cuboids and slots must be >= 1");
  }
  if (!priors_valid(cfg.dim_priors)) {
    throw ConfigError("dim priors require min < max per dimension");
  }
}

struct LossWeights {
  double mse = 0.8;
  double eas = 0.2;
  double xyz = 5.0;
  double whl = 5.0;
  double orientation = 1.0;
  double iou = 0.01;
  double conf = 0.5;
};

inline void validate(const LossWeights& w) {
  for (double v : {w.mse, w.eas, w.xyz, w.whl, w.orientation, w.iou, w.conf}) {
    if (v < 0.0) throw ConfigError("loss weights must be nonnegative");
  }
}

/// Class name <-> id mapping. Ids are indices into `names`.
struct ClassRegistry {
  std::vector<std::string> names = {"Car",  "Van",            "Truck", "Pedestrian",
                                    "Person_sitting", "Cyclist",        "Tram",  "Misc"};

  int id_of(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    return it == names.end() ? -1 : static_cast<int>(it - names.begin());
  }
  const std::string& name_of(int id) const {
    if (id < 0 || id >= static_cast<int>(names.size())) {
      throw ConfigError("unknown class id " + std::to_string(id));
    }
    return names[static_cast<std::size_t>(id)];
  }
  int size() const { return static_cast<int>(names.size()); }
};

enum class Difficulty { kEasy = 0, kModerate = 1, kHard = 2 };

inline const char* to_string(Difficulty d) {
  switch (d) {
    case Difficulty::kEasy: return "easy";
    case Difficulty::kModerate: return "moderate";
    case Difficulty::kHard: return "hard";
  }
  return "?";
}

struct DifficultyRule {
  double min_bbox_height_px = 0.0;
  int max_occlusion = 2;
  double max_truncation = 1.0;
};

// KITTI eval-kit convention; overridable through the config file.
struct DifficultyTable {
  DifficultyRule easy{40.0, 0, 0.15};
  DifficultyRule moderate{25.0, 1, 0.30};
  DifficultyRule hard{25.0, 2, 0.50};

  const DifficultyRule& rule(Difficulty d) const {
    switch (d) {
      case Difficulty::kEasy: return easy;
      case Difficulty::kModerate: return moderate;
      default: return hard;
    }
  }
};

/// Everything the CLI needs: ROI/priors, loss weights, thresholds, classes.
struct ToolkitConfig {
  RoiPriorConfig roi;
  LossWeights weights;
  ClassRegistry classes;
  DifficultyTable difficulty;
  double conf_threshold = 0.5;
  double nms_threshold = 0.5;
  IouKind iou_kind = IouKind::k3D;
  bool per_class_nms = true;
  std::vector<double> eval_iou_thresholds = {0.3, 0.5, 0.7};
  double err_bin_width_m = 2.0;
  int threads = 1;
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// JSON (de)serialization. Unknown keys are rejected nowhere; missing keys keep
// defaults, so partial config files stay valid as defaults evolve.

inline nlohmann::json to_json(const DimPriors& p) {
  return {{"width_min", p.w_min},  {"width_max", p.w_max},  {"height_min", p.h_min},
          {"height_max", p.h_max}, {"length_min", p.l_min}, {"length_max", p.l_max}};
}

inline DimPriors dim_priors_from_json(const nlohmann::json& j) {
  DimPriors p;
  p.w_min = j.value("width_min", p.w_min);
  p.w_max = j.value("width_max", p.w_max);
  p.h_min = j.value("height_min", p.h_min);
  p.h_max = j.value("height_max", p.h_max);
  p.l_min = j.value("length_min", p.l_min);
  p.l_max = j.value("length_max", p.l_max);
  return p;
}

inline nlohmann::json to_json(const RoiPriorConfig& cfg) {
  return {{"x_max", cfg.x_max},     {"y_max", cfg.y_max}, {"z_max", cfg.z_max},
          {"cuboids", cfg.cuboids}, {"slots", cfg.slots}, {"dim_priors", to_json(cfg.dim_priors)}};
}

inline RoiPriorConfig roi_from_json(const nlohmann::json& j) {
  RoiPriorConfig cfg;
  cfg.x_max = j.value("x_max", cfg.x_max);
  cfg.y_max = j.value("y_max", cfg.y_max);
  cfg.z_max = j.value("z_max", cfg.z_max);
  cfg.cuboids = j.value("cuboids", cfg.cuboids);
  cfg.slots = j.value("slots", cfg.slots);
  if (j.contains("dim_priors")) {
    const auto& dp = j.at("dim_priors");
    if (dp.is_string()) {
      const std::string name = dp.get<std::string>();
      if (name == "kitti") {
        cfg.dim_priors = kKittiDimPriors;
      } else if (name == "vkitti2") {
        cfg.dim_priors = kVKitti2DimPriors;
      } else {
        throw ConfigError("unknown named priors '" + name + "' (expected kitti or vkitti2)");
      }
    } else {
      cfg.dim_priors = dim_priors_from_json(dp);
    }
  }
  validate(cfg);
  return cfg;
}

inline nlohmann::json to_json(const LossWeights& w) {
  return {{"lambda_mse", w.mse},   {"lambda_eas", w.eas},
          {"lambda_xyz", w.xyz},   {"lambda_whl", w.whl},
          {"lambda_orientation", w.orientation}, {"lambda_iou", w.iou},
          {"lambda_conf", w.conf}};
}

inline LossWeights weights_from_json(const nlohmann::json& j) {
  LossWeights w;
  w.mse = j.value("lambda_mse", w.mse);
  w.eas = j.value("lambda_eas", w.eas);
  w.xyz = j.value("lambda_xyz", w.xyz);
  w.whl = j.value("lambda_whl", w.whl);
  w.orientation = j.value("lambda_orientation", w.orientation);
  w.iou = j.value("lambda_iou", w.iou);
  w.conf = j.value("lambda_conf", w.conf);
  validate(w);
  return w;
}

inline nlohmann::json to_json(const DifficultyTable& t) {
  const auto rule = [](const DifficultyRule& r) {
    return nlohmann::json{{"min_bbox_height_px", r.min_bbox_height_px},
                          {"max_occlusion", r.max_occlusion},
                          {"max_truncation", r.max_truncation}};
  };
  return {{"easy", rule(t.easy)}, {"moderate", rule(t.moderate)}, {"hard", rule(t.hard)}};
}

inline DifficultyTable difficulty_from_json(const nlohmann::json& j) {
  DifficultyTable t;
  const auto rule = [](const nlohmann::json& rj, DifficultyRule r) {
    r.min_bbox_height_px = rj.value("min_bbox_height_px", r.min_bbox_height_px);
    r.max_occlusion = rj.value("max_occlusion", r.max_occlusion);
    r.max_truncation = rj.value("max_truncation", r.max_truncation);
    return r;
  };
  if (j.contains("easy")) t.easy = rule(j.at("easy"), t.easy);
  if (j.contains("moderate")) t.moderate = rule(j.at("moderate"), t.moderate);
  if (j.contains("hard")) t.hard = rule(j.at("hard"), t.hard);
  return t;
}

inline nlohmann::json to_json(const ToolkitConfig& cfg) {
  return {{"roi", to_json(cfg.roi)},
          {"loss_weights", to_json(cfg.weights)},
          {"classes", cfg.classes.names},
          {"difficulty", to_json(cfg.difficulty)},
          {"conf_threshold", cfg.conf_threshold},
          {"nms_threshold", cfg.nms_threshold},
          {"iou_kind", cfg.iou_kind == IouKind::k3D ? "3d" : "bev"},
          {"per_class_nms", cfg.per_class_nms},
          {"eval_iou_thresholds", cfg.eval_iou_thresholds},
          {"err_bin_width_m", cfg.err_bin_width_m},
          {"threads", cfg.threads},
          {"seed", cfg.seed}};
}

inline IouKind iou_kind_from_string(const std::string& s) {
  if (s == "3d") return IouKind::k3D;
  if (s == "bev") return IouKind::kBev;
  throw ConfigError("iou_kind must be '3d' or 'bev', got '" + s + "'");
}

inline ToolkitConfig config_from_json(const nlohmann::json& j) {
  ToolkitConfig cfg;
  if (j.contains("roi")) cfg.roi = roi_from_json(j.at("roi"));
  if (j.contains("loss_weights")) cfg.weights = weights_from_json(j.at("loss_weights"));
  if (j.contains("classes")) cfg.classes.names = j.at("classes").get<std::vector<std::string>>();
  if (j.contains("difficulty")) cfg.difficulty = difficulty_from_json(j.at("difficulty"));
  cfg.conf_threshold = j.value("conf_threshold", cfg.conf_threshold);
  cfg.nms_threshold = j.value("nms_threshold", cfg.nms_threshold);
  if (j.contains("iou_kind")) cfg.iou_kind = iou_kind_from_string(j.at("iou_kind"));
  cfg.per_class_nms = j.value("per_class_nms", cfg.per_class_nms);
  if (j.contains("eval_iou_thresholds")) {
    cfg.eval_iou_thresholds = j.at("eval_iou_thresholds").get<std::vector<double>>();
  }
  cfg.err_bin_width_m = j.value("err_bin_width_m", cfg.err_bin_width_m);
  cfg.threads = j.value("threads", cfg.threads);
  cfg.seed = j.value("seed", cfg.seed);
  return cfg;
}

inline ToolkitConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad config JSON in " + path + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace cubify3d
