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
#include <numeric>
#include <span>
#include <vector>

#include "cubify3d/geometry.hpp"
#include "cubify3d/iou.hpp"

namespace cubify3d {

// Canonical detection order: descending confidence, then nearer in z, then
// input position. Every tie in this module breaks the same way.
inline std::vector<int> detection_order(std::span<const Box3D> dets) {
  std::vector<int> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&dets](int a, int b) {
    const Box3D& ba = dets[static_cast<std::size_t>(a)];
    const Box3D& bb = dets[static_cast<std::size_t>(b)];
    if (ba.confidence != bb.confidence) return ba.confidence > bb.confidence;
    if (ba.z_c != bb.z_c) return ba.z_c < bb.z_c;
    return a < b;
  });
  return order;
}

/// Greedy non-max suppression: walk detections in canonical order, keep a box
/// iff its IoU with every kept box stays below the threshold. With
/// `per_class`, suppression only acts between boxes of the same class.
/// Output is sorted by descending confidence.
inline std::vector<Box3D> nms(std::span<const Box3D> dets, double iou_threshold,
                              IouKind kind = IouKind::k3D, bool per_class = true) {
  const auto order = detection_order(dets);
  std::vector<Box3D> kept;
  kept.reserve(dets.size());
  for (int idx : order) {
    const Box3D& cand = dets[static_cast<std::size_t>(idx)];
    bool suppressed = false;
    for (const Box3D& k : kept) {
      if (per_class && k.class_id != cand.class_id) continue;
      if (iou(cand, k, kind) >= iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(cand);
  }
  return kept;
}

struct MatchPair {
  int pred_index = -1;
  int gt_index = -1;
  double iou = 0.0;
};

/// Prediction-to-ground-truth assignment for evaluation.
struct Assignment {
  std::vector<MatchPair> pairs;       // in prediction confidence order
  std::vector<int> unmatched_preds;   // ascending index
  std::vector<int> unmatched_gts;     // ascending index
};

/// Greedy matching in canonical confidence order: each prediction takes the
/// highest-IoU still-unmatched ground truth with IoU >= threshold. IoU ties
/// prefer the nearer (smaller z), then lower-index, ground truth.
inline Assignment assign(std::span<const Box3D> preds, std::span<const Box3D> gts,
                         double iou_threshold, IouKind kind = IouKind::k3D) {
  Assignment out;
  std::vector<bool> gt_taken(gts.size(), false);
  std::vector<bool> pred_matched(preds.size(), false);
  for (int pi : detection_order(preds)) {
    const Box3D& p = preds[static_cast<std::size_t>(pi)];
    int best = -1;
    double best_iou = 0.0;
    for (int gi = 0; gi < static_cast<int>(gts.size()); ++gi) {
      if (gt_taken[static_cast<std::size_t>(gi)]) continue;
      const double v = iou(p, gts[static_cast<std::size_t>(gi)], kind);
      if (v < iou_threshold) continue;
      const bool better =
          v > best_iou ||
          (v == best_iou && best >= 0 &&
           (gts[static_cast<std::size_t>(gi)].z_c < gts[static_cast<std::size_t>(best)].z_c));
      if (best < 0 ? v >= iou_threshold : better) {
        best = gi;
        best_iou = v;
      }
    }
    if (best >= 0) {
      gt_taken[static_cast<std::size_t>(best)] = true;
      pred_matched[static_cast<std::size_t>(pi)] = true;
      out.pairs.push_back(MatchPair{pi, best, best_iou});
    }
  }
  for (int i = 0; i < static_cast<int>(preds.size()); ++i) {
    if (!pred_matched[static_cast<std::size_t>(i)]) out.unmatched_preds.push_back(i);
  }
  for (int i = 0; i < static_cast<int>(gts.size()); ++i) {
    if (!gt_taken[static_cast<std::size_t>(i)]) out.unmatched_gts.push_back(i);
  }
  return out;
}

}  // namespace cubify3d
