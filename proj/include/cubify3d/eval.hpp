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
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cubify3d/config.hpp"
#include "cubify3d/dataset_io.hpp"
#include "cubify3d/geometry.hpp"
#include "cubify3d/iou.hpp"
#include "cubify3d/matching.hpp"

namespace cubify3d {

/// Ground-truth record for evaluation. DontCare and otherwise invalid entries
/// carry no box and act only as ignore regions.
struct GtObject {
  std::optional<Box3D> box;
  int class_id = -1;
  double bbox_height_px = 0.0;
  int occlusion = 0;
  double truncation = 0.0;
  bool dont_care = false;
};

inline GtObject to_gt_object(const KittiLabel& lab, const ClassRegistry& classes) {
  GtObject g;
  g.class_id = classes.id_of(lab.type);
  g.bbox_height_px = lab.bbox.height();
  g.occlusion = lab.occlusion;
  g.truncation = lab.truncation;
  g.dont_care = lab.dont_care();
  if (!g.dont_care && lab.width > 0.0 && lab.height > 0.0 && lab.length > 0.0) {
    try {
      g.box = to_box3d(lab, classes);
    } catch (const std::invalid_argument&) {
      g.box.reset();
    }
  }
  return g;
}

inline bool passes_difficulty(const GtObject& g, const DifficultyRule& rule) {
  return g.bbox_height_px >= rule.min_bbox_height_px && g.occlusion <= rule.max_occlusion &&
         g.truncation <= rule.max_truncation;
}

struct PRPoint {
  double confidence = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

/// One point per distinct confidence threshold, descending; cumulative
/// precision/recall over all detections at or above that confidence.
struct PRCurve {
  std::vector<PRPoint> points;
  int total_gt = 0;
};

namespace detail {

struct SweepItem {
  double confidence = 0.0;
  bool is_tp = false;
};

// Per-frame matching with ignore semantics: detections of the target class
// match counted ground truths greedily; leftover detections overlapping an
// ignored ground truth (DontCare or difficulty-excluded) drop out of the FP
// pool instead of penalizing precision.
inline void sweep_frame(std::span<const Box3D> dets, std::span<const GtObject> gts, int class_id,
                        const DifficultyRule& rule, double iou_threshold, IouKind kind,
                        std::vector<SweepItem>& items, int& total_gt) {
  std::vector<Box3D> class_dets;
  for (const Box3D& d : dets) {
    if (d.class_id == class_id) class_dets.push_back(d);
  }
  std::vector<Box3D> counted;
  std::vector<Box3D> ignored;
  for (const GtObject& g : gts) {
    if (!g.box) continue;
    if (g.dont_care) {
      ignored.push_back(*g.box);
    } else if (g.class_id == class_id) {
      if (passes_difficulty(g, rule)) {
        counted.push_back(*g.box);
      } else {
        ignored.push_back(*g.box);
      }
    }
  }
  total_gt += static_cast<int>(counted.size());

  const Assignment a = assign(class_dets, counted, iou_threshold, kind);
  std::vector<bool> matched(class_dets.size(), false);
  for (const MatchPair& p : a.pairs) matched[static_cast<std::size_t>(p.pred_index)] = true;
  for (std::size_t i = 0; i < class_dets.size(); ++i) {
    if (matched[i]) {
      items.push_back(SweepItem{class_dets[i].confidence, true});
      continue;
    }
    bool overlaps_ignored = false;
    for (const Box3D& ig : ignored) {
      if (iou(class_dets[i], ig, kind) >= iou_threshold) {
        overlaps_ignored = true;
        break;
      }
    }
    if (!overlaps_ignored) items.push_back(SweepItem{class_dets[i].confidence, false});
  }
}

}  // namespace detail

/// Cumulative TP/FP sweep over all frames for one class/difficulty/threshold.
inline PRCurve pr_curve(std::span<const std::vector<Box3D>> dets_by_frame,
                        std::span<const std::vector<GtObject>> gts_by_frame, int class_id,
                        const DifficultyRule& rule, double iou_threshold,
                        IouKind kind = IouKind::k3D) {
  std::vector<detail::SweepItem> items;
  PRCurve curve;
  for (std::size_t f = 0; f < dets_by_frame.size(); ++f) {
    detail::sweep_frame(dets_by_frame[f],
                        f < gts_by_frame.size() ? std::span<const GtObject>(gts_by_frame[f])
                                                : std::span<const GtObject>(),
                        class_id, rule, iou_threshold, kind, items, curve.total_gt);
  }
  // Group equal confidences so the curve is invariant to frame order.
  std::sort(items.begin(), items.end(), [](const detail::SweepItem& a, const detail::SweepItem& b) {
    return a.confidence > b.confidence;
  });
  int tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < items.size()) {
    const double conf = items[i].confidence;
    while (i < items.size() && items[i].confidence == conf) {
      items[i].is_tp ? ++tp : ++fp;
      ++i;
    }
    PRPoint pt;
    pt.confidence = conf;
    pt.precision = static_cast<double>(tp) / (tp + fp);
    pt.recall = curve.total_gt > 0 ? static_cast<double>(tp) / curve.total_gt : 0.0;
    curve.points.push_back(pt);
  }
  return curve;
}

namespace detail {

// Interpolated precision p(r) = max{precision at recall' >= r}, evaluated on
// an even grid of `steps` points spanning [0, 1]; returns the mean * 100.
inline double ap_on_grid(const PRCurve& curve, int steps) {
  if (curve.total_gt == 0) return 0.0;
  std::vector<PRPoint> byr(curve.points);
  std::sort(byr.begin(), byr.end(),
            [](const PRPoint& a, const PRPoint& b) { return a.recall < b.recall; });
  std::vector<double> envelope(byr.size());  // suffix max of precision
  double run = 0.0;
  for (std::size_t i = byr.size(); i-- > 0;) {
    run = std::max(run, byr[i].precision);
    envelope[i] = run;
  }
  double sum = 0.0;
  for (int s = 0; s < steps; ++s) {
    const double r = static_cast<double>(s) / (steps - 1);
    // first curve point with recall >= r
    std::size_t lo = 0, hi = byr.size();
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (byr[mid].recall >= r) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    if (lo < byr.size()) sum += envelope[lo];
  }
  return sum / steps * 100.0;
}

}  // namespace detail

/// 101-point interpolated average precision, in percent.
inline double ap_101(const PRCurve& curve) { return detail::ap_on_grid(curve, 101); }

/// 11-point interpolated average precision, in percent.
inline double ap_r11(const PRCurve& curve) { return detail::ap_on_grid(curve, 11); }

struct ErrVsZBin {
  double z_lo = 0.0;
  double z_hi = 0.0;
  int count = 0;
  double mean_center_error = 0.0;
};

/// Matched pairs binned by ground-truth z; per-bin mean Euclidean center error.
inline std::vector<ErrVsZBin> err_vs_z(std::span<const std::vector<Box3D>> dets_by_frame,
                                       std::span<const std::vector<GtObject>> gts_by_frame,
                                       int class_id, double iou_threshold, IouKind kind,
                                       double bin_width, double z_max) {
  const int nbins = static_cast<int>(std::ceil(z_max / bin_width));
  std::vector<ErrVsZBin> bins(static_cast<std::size_t>(nbins));
  std::vector<double> sums(static_cast<std::size_t>(nbins), 0.0);
  for (int i = 0; i < nbins; ++i) {
    bins[static_cast<std::size_t>(i)].z_lo = i * bin_width;
    bins[static_cast<std::size_t>(i)].z_hi = std::min((i + 1) * bin_width, z_max);
  }
  for (std::size_t f = 0; f < dets_by_frame.size(); ++f) {
    if (f >= gts_by_frame.size()) break;
    std::vector<Box3D> class_dets;
    for (const Box3D& d : dets_by_frame[f]) {
      if (d.class_id == class_id) class_dets.push_back(d);
    }
    std::vector<Box3D> class_gts;
    for (const GtObject& g : gts_by_frame[f]) {
      if (g.box && !g.dont_care && g.class_id == class_id) class_gts.push_back(*g.box);
    }
    const Assignment a = assign(class_dets, class_gts, iou_threshold, kind);
    for (const MatchPair& p : a.pairs) {
      const Box3D& det = class_dets[static_cast<std::size_t>(p.pred_index)];
      const Box3D& gt = class_gts[static_cast<std::size_t>(p.gt_index)];
      if (!(gt.z_c > 0.0 && gt.z_c <= z_max)) continue;
      int bin = static_cast<int>(gt.z_c / bin_width);
      bin = std::min(bin, nbins - 1);
      const double dx = det.x_c - gt.x_c, dy = det.y_c - gt.y_c, dz = det.z_c - gt.z_c;
      sums[static_cast<std::size_t>(bin)] += std::sqrt(dx * dx + dy * dy + dz * dz);
      ++bins[static_cast<std::size_t>(bin)].count;
    }
  }
  for (int i = 0; i < nbins; ++i) {
    if (bins[static_cast<std::size_t>(i)].count > 0) {
      bins[static_cast<std::size_t>(i)].mean_center_error =
          sums[static_cast<std::size_t>(i)] / bins[static_cast<std::size_t>(i)].count;
    }
  }
  return bins;
}

// --------------------------------------------------------------------------
// Full report

struct EvalConfig {
  std::vector<double> iou_thresholds = {0.3, 0.5, 0.7};
  std::vector<IouKind> kinds = {IouKind::k3D, IouKind::kBev};
  DifficultyTable difficulty;
  ClassRegistry classes;
  double err_match_iou = 0.5;
  IouKind err_kind = IouKind::k3D;
  double err_bin_width_m = 2.0;
  double z_max = 100.0;
};

inline EvalConfig eval_config_from(const ToolkitConfig& cfg) {
  EvalConfig e;
  e.iou_thresholds = cfg.eval_iou_thresholds;
  e.difficulty = cfg.difficulty;
  e.classes = cfg.classes;
  e.err_kind = cfg.iou_kind;
  e.err_bin_width_m = cfg.err_bin_width_m;
  e.z_max = cfg.roi.z_max;
  return e;
}

struct ApEntry {
  int class_id = -1;
  double iou_threshold = 0.0;
  Difficulty difficulty = Difficulty::kEasy;
  IouKind kind = IouKind::k3D;
  double ap101 = 0.0;
  double ap11 = 0.0;
  PRCurve curve;
};

struct MapEntry {
  double iou_threshold = 0.0;
  Difficulty difficulty = Difficulty::kEasy;
  IouKind kind = IouKind::k3D;
  double map = 0.0;
  int class_count = 0;  // classes with at least one counted gt
};

struct ErrHistogram {
  int class_id = -1;
  std::vector<ErrVsZBin> bins;
};

struct EvalReport {
  std::vector<ApEntry> entries;
  std::vector<MapEntry> map_entries;
  std::vector<ErrHistogram> err_histograms;
};

/// AP for every (class, threshold, difficulty, kind); mAP over classes with
/// ground truth; error-vs-distance histogram per class.
inline EvalReport evaluate(std::span<const std::vector<Box3D>> dets_by_frame,
                           std::span<const std::vector<GtObject>> gts_by_frame,
                           const EvalConfig& cfg) {
  EvalReport report;
  const Difficulty difficulties[] = {Difficulty::kEasy, Difficulty::kModerate, Difficulty::kHard};
  for (IouKind kind : cfg.kinds) {
    for (double thr : cfg.iou_thresholds) {
      for (Difficulty diff : difficulties) {
        double ap_sum = 0.0;
        int present = 0;
        for (int cls = 0; cls < cfg.classes.size(); ++cls) {
          PRCurve curve = pr_curve(dets_by_frame, gts_by_frame, cls,
                                   cfg.difficulty.rule(diff), thr, kind);
          if (curve.total_gt == 0) continue;  // class absent at this difficulty
          ApEntry entry;
          entry.class_id = cls;
          entry.iou_threshold = thr;
          entry.difficulty = diff;
          entry.kind = kind;
          entry.ap101 = ap_101(curve);
          entry.ap11 = ap_r11(curve);
          entry.curve = std::move(curve);
          ap_sum += entry.ap101;
          ++present;
          report.entries.push_back(std::move(entry));
        }
        MapEntry me;
        me.iou_threshold = thr;
        me.difficulty = diff;
        me.kind = kind;
        me.class_count = present;
        me.map = present > 0 ? ap_sum / present : 0.0;
        report.map_entries.push_back(me);
      }
    }
  }
  for (int cls = 0; cls < cfg.classes.size(); ++cls) {
    ErrHistogram h;
    h.class_id = cls;
    h.bins = err_vs_z(dets_by_frame, gts_by_frame, cls, cfg.err_match_iou, cfg.err_kind,
                      cfg.err_bin_width_m, cfg.z_max);
    bool any = false;
    for (const auto& b : h.bins) any = any || b.count > 0;
    if (any) report.err_histograms.push_back(std::move(h));
  }
  return report;
}

// --------------------------------------------------------------------------
// Serialization

inline const char* to_string(IouKind k) { return k == IouKind::k3D ? "3d" : "bev"; }

inline nlohmann::json report_to_json(const EvalReport& report, const ClassRegistry& classes) {
  nlohmann::json j;
  j["ap"] = nlohmann::json::array();
  for (const ApEntry& e : report.entries) {
    j["ap"].push_back({{"class", classes.name_of(e.class_id)},
                       {"iou_threshold", e.iou_threshold},
                       {"difficulty", to_string(e.difficulty)},
                       {"kind", to_string(e.kind)},
                       {"ap_101", e.ap101},
                       {"ap_r11", e.ap11},
                       {"total_gt", e.curve.total_gt}});
  }
  j["map"] = nlohmann::json::array();
  for (const MapEntry& m : report.map_entries) {
    j["map"].push_back({{"iou_threshold", m.iou_threshold},
                        {"difficulty", to_string(m.difficulty)},
                        {"kind", to_string(m.kind)},
                        {"map", m.map},
                        {"classes", m.class_count}});
  }
  j["err_vs_z"] = nlohmann::json::array();
  for (const ErrHistogram& h : report.err_histograms) {
    nlohmann::json bins = nlohmann::json::array();
    for (const ErrVsZBin& b : h.bins) {
      if (b.count == 0) continue;
      bins.push_back({{"z_lo", b.z_lo},
                      {"z_hi", b.z_hi},
                      {"count", b.count},
                      {"mean_center_error_m", b.mean_center_error}});
    }
    j["err_vs_z"].push_back({{"class", classes.name_of(h.class_id)}, {"bins", bins}});
  }
  return j;
}

inline std::string ap_csv(const EvalReport& report, const ClassRegistry& classes) {
  std::string out = "class,kind,iou_threshold,difficulty,ap_101,ap_r11,total_gt\n";
  char buf[256];
  for (const ApEntry& e : report.entries) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%.2f,%s,%.6f,%.6f,%d\n",
                  classes.name_of(e.class_id).c_str(), to_string(e.kind), e.iou_threshold,
                  to_string(e.difficulty), e.ap101, e.ap11, e.curve.total_gt);
    out += buf;
  }
  return out;
}

inline std::string pr_csv(const PRCurve& curve) {
  std::string out = "confidence,precision,recall\n";
  char buf[128];
  for (const PRPoint& p : curve.points) {
    std::snprintf(buf, sizeof(buf), "%.9f,%.9f,%.9f\n", p.confidence, p.precision, p.recall);
    out += buf;
  }
  return out;
}

inline std::string err_csv(const std::vector<ErrHistogram>& hists, const ClassRegistry& classes) {
  std::string out = "class,z_bin_center_m,count,mean_center_error_m\n";
  char buf[160];
  for (const ErrHistogram& h : hists) {
    for (const ErrVsZBin& b : h.bins) {
      if (b.count == 0) continue;
      std::snprintf(buf, sizeof(buf), "%s,%.2f,%d,%.6f\n", classes.name_of(h.class_id).c_str(),
                    0.5 * (b.z_lo + b.z_hi), b.count, b.mean_center_error);
      out += buf;
    }
  }
  return out;
}

}  // namespace cubify3d
