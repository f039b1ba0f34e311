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

// Self-verification suites. Every oracle here deliberately takes a different
// route than the implementation it checks: volumes by Monte-Carlo sampling
// instead of polygon clipping, suppression and matching by spelled-out
// reference loops, encoding by a second independent bucketing pass, and
// gradients by central differences.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cubify3d/config.hpp"
#include "cubify3d/cubify.hpp"
#include "cubify3d/geometry.hpp"
#include "cubify3d/iou.hpp"
#include "cubify3d/losses.hpp"
#include "cubify3d/matching.hpp"

namespace cubify3d {

// ---------------------------------------------------------------------------
// Monte-Carlo IoU oracle

inline bool point_in_box(double px, double py, double pz, const Box3D& b, double cos_yaw,
                         double sin_yaw) {
  const double dx = px - b.x_c;
  const double dz = pz - b.z_c;
  const double lx = dx * cos_yaw - dz * sin_yaw;
  const double lz = dx * sin_yaw + dz * cos_yaw;
  return std::fabs(lx) <= 0.5 * b.width && std::fabs(py - b.y_c) <= 0.5 * b.height &&
         std::fabs(lz) <= 0.5 * b.length;
}

/// Volume IoU estimated by uniform sampling over the joint bounding box.
inline double mc_iou_3d(const Box3D& a, const Box3D& b, long samples, std::mt19937_64& rng) {
  const auto ca = corners(a);
  const auto cb = corners(b);
  double lo[3] = {1e30, 1e30, 1e30}, hi[3] = {-1e30, -1e30, -1e30};
  for (const auto& cs : {ca, cb}) {
    for (const Point3& p : cs) {
      lo[0] = std::min(lo[0], p.x);
      hi[0] = std::max(hi[0], p.x);
      lo[1] = std::min(lo[1], p.y);
      hi[1] = std::max(hi[1], p.y);
      lo[2] = std::min(lo[2], p.z);
      hi[2] = std::max(hi[2], p.z);
    }
  }
  std::uniform_real_distribution<double> ux(lo[0], hi[0]);
  std::uniform_real_distribution<double> uy(lo[1], hi[1]);
  std::uniform_real_distribution<double> uz(lo[2], hi[2]);
  const double cos_a = std::cos(a.yaw), sin_a = std::sin(a.yaw);
  const double cos_b = std::cos(b.yaw), sin_b = std::sin(b.yaw);
  long in_both = 0, in_either = 0;
  for (long i = 0; i < samples; ++i) {
    const double x = ux(rng), y = uy(rng), z = uz(rng);
    const bool ia = point_in_box(x, y, z, a, cos_a, sin_a);
    const bool ib = point_in_box(x, y, z, b, cos_b, sin_b);
    in_both += ia && ib;
    in_either += ia || ib;
  }
  return in_either == 0 ? 0.0 : static_cast<double>(in_both) / static_cast<double>(in_either);
}

/// Footprint IoU estimated by 2D sampling.
inline double mc_bev_iou(const Box3D& a, const Box3D& b, long samples, std::mt19937_64& rng) {
  const BevPolygon fa = bev_footprint(a);
  const BevPolygon fb = bev_footprint(b);
  double lo[2] = {1e30, 1e30}, hi[2] = {-1e30, -1e30};
  for (const auto& poly : {fa, fb}) {
    for (const Vec2& p : poly.pts) {
      lo[0] = std::min(lo[0], p.x);
      hi[0] = std::max(hi[0], p.x);
      lo[1] = std::min(lo[1], p.z);
      hi[1] = std::max(hi[1], p.z);
    }
  }
  std::uniform_real_distribution<double> ux(lo[0], hi[0]);
  std::uniform_real_distribution<double> uz(lo[1], hi[1]);
  const double cos_a = std::cos(a.yaw), sin_a = std::sin(a.yaw);
  const double cos_b = std::cos(b.yaw), sin_b = std::sin(b.yaw);
  long in_both = 0, in_either = 0;
  for (long i = 0; i < samples; ++i) {
    const double x = ux(rng), z = uz(rng);
    const bool ia = point_in_box(x, a.y_c, z, a, cos_a, sin_a);
    const bool ib = point_in_box(x, b.y_c, z, b, cos_b, sin_b);
    in_both += ia && ib;
    in_either += ia || ib;
  }
  return in_either == 0 ? 0.0 : static_cast<double>(in_both) / static_cast<double>(in_either);
}

// ---------------------------------------------------------------------------
// Brute-force references for suppression and matching

inline std::vector<Box3D> reference_nms(std::span<const Box3D> dets, double iou_threshold,
                                        IouKind kind, bool per_class) {
  // Spelled-out canonical order, then pairwise suppression scan.
  std::vector<int> order;
  for (int i = 0; i < static_cast<int>(dets.size()); ++i) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const Box3D& ba = dets[static_cast<std::size_t>(a)];
    const Box3D& bb = dets[static_cast<std::size_t>(b)];
    if (ba.confidence != bb.confidence) return ba.confidence > bb.confidence;
    return ba.z_c < bb.z_c;
  });
  std::vector<Box3D> kept;
  for (int i : order) {
    const Box3D& cand = dets[static_cast<std::size_t>(i)];
    bool ok = true;
    for (const Box3D& k : kept) {
      if (per_class && k.class_id != cand.class_id) continue;
      const double v = kind == IouKind::k3D ? iou_3d(cand, k) : bev_iou(cand, k);
      if (v >= iou_threshold) ok = false;
    }
    if (ok) kept.push_back(cand);
  }
  return kept;
}

inline Assignment reference_assign(std::span<const Box3D> preds, std::span<const Box3D> gts,
                                   double iou_threshold, IouKind kind) {
  std::vector<int> order;
  for (int i = 0; i < static_cast<int>(preds.size()); ++i) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const Box3D& ba = preds[static_cast<std::size_t>(a)];
    const Box3D& bb = preds[static_cast<std::size_t>(b)];
    if (ba.confidence != bb.confidence) return ba.confidence > bb.confidence;
    return ba.z_c < bb.z_c;
  });
  Assignment out;
  std::vector<bool> taken(gts.size(), false);
  std::vector<bool> matched(preds.size(), false);
  for (int pi : order) {
    int best = -1;
    for (int gi = 0; gi < static_cast<int>(gts.size()); ++gi) {
      if (taken[static_cast<std::size_t>(gi)]) continue;
      const double v = kind == IouKind::k3D ? iou_3d(preds[static_cast<std::size_t>(pi)],
                                                     gts[static_cast<std::size_t>(gi)])
                                            : bev_iou(preds[static_cast<std::size_t>(pi)],
                                                      gts[static_cast<std::size_t>(gi)]);
      if (v < iou_threshold) continue;
      if (best < 0) {
        best = gi;
        continue;
      }
      const double bv = kind == IouKind::k3D ? iou_3d(preds[static_cast<std::size_t>(pi)],
                                                      gts[static_cast<std::size_t>(best)])
                                             : bev_iou(preds[static_cast<std::size_t>(pi)],
                                                       gts[static_cast<std::size_t>(best)]);
      if (v > bv || (v == bv && gts[static_cast<std::size_t>(gi)].z_c <
                                    gts[static_cast<std::size_t>(best)].z_c)) {
        best = gi;
      }
    }
    if (best >= 0) {
      taken[static_cast<std::size_t>(best)] = true;
      matched[static_cast<std::size_t>(pi)] = true;
      const double v = kind == IouKind::k3D ? iou_3d(preds[static_cast<std::size_t>(pi)],
                                                     gts[static_cast<std::size_t>(best)])
                                            : bev_iou(preds[static_cast<std::size_t>(pi)],
                                                      gts[static_cast<std::size_t>(best)]);
      out.pairs.push_back(MatchPair{pi, best, v});
    }
  }
  for (int i = 0; i < static_cast<int>(preds.size()); ++i) {
    if (!matched[static_cast<std::size_t>(i)]) out.unmatched_preds.push_back(i);
  }
  for (int i = 0; i < static_cast<int>(gts.size()); ++i) {
    if (!taken[static_cast<std::size_t>(i)]) out.unmatched_gts.push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random scene generation

/// Random in-ROI box with dimensions strictly inside the priors.
inline Box3D random_box(std::mt19937_64& rng, const RoiPriorConfig& cfg, bool random_confidence) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const DimPriors& p = cfg.dim_priors;
  const auto mid = [&u01, &rng](double lo, double hi) {
    return lo + (0.02 + 0.96 * u01(rng)) * (hi - lo);
  };
  Box3D b;
  b.x_c = (2.0 * u01(rng) - 1.0) * cfg.x_max * 0.98;
  b.y_c = (2.0 * u01(rng) - 1.0) * cfg.y_max * 0.98;
  b.z_c = 0.5 + (cfg.z_max - 1.0) * u01(rng);
  b.width = mid(p.w_min, p.w_max);
  b.height = mid(p.h_min, p.h_max);
  b.length = mid(p.l_min, p.l_max);
  b.yaw = wrap_to_pi((2.0 * u01(rng) - 1.0) * kPi);
  b.class_id = static_cast<int>(u01(rng) * 3.0);
  b.confidence = random_confidence ? u01(rng) : 1.0;
  return b;
}

/// Overlapping pair: the second box is a mild perturbation of the first.
inline std::pair<Box3D, Box3D> random_overlapping_pair(std::mt19937_64& rng,
                                                       const RoiPriorConfig& cfg) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const Box3D a = random_box(rng, cfg, false);
  Box3D b = a;
  b.x_c += (2.0 * u01(rng) - 1.0) * 0.3 * a.width;
  b.y_c += (2.0 * u01(rng) - 1.0) * 0.3 * a.height;
  b.z_c += (2.0 * u01(rng) - 1.0) * 0.3 * a.length;
  b.width *= 0.8 + 0.4 * u01(rng);
  b.height *= 0.8 + 0.4 * u01(rng);
  b.length *= 0.8 + 0.4 * u01(rng);
  b.yaw = wrap_to_pi(b.yaw + (2.0 * u01(rng) - 1.0) * 0.3);
  return {a, b};
}

// ---------------------------------------------------------------------------
// Suites

struct CheckParams {
  std::uint64_t seed = 0;
  int roundtrip_scenes = 200;
  int max_objects_per_scene = 40;
  int iou_pairs = 50;
  long iou_samples = 200000;
  double iou_tolerance = 0.02;
  int grad_points_per_loss = 10;
  double grad_step = 1e-5;
  double grad_tolerance = 1e-4;
  int nms_scenes = 100;
  int nms_max_boxes = 50;
};

struct CheckReport {
  std::vector<std::string> lines;
  bool passed = true;

  void add(bool ok, const std::string& text) {
    lines.push_back(std::string(ok ? "[PASS] " : "[FAIL] ") + text);
    passed = passed && ok;
  }
  std::string to_string() const {
    std::string out;
    for (const auto& l : lines) {
      out += l;
      out += '\n';
    }
    return out;
  }
};

namespace detail {

inline std::string fmt(const char* format, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), format, a, b);
  return buf;
}

}  // namespace detail

/// Encode/decode roundtrip against an independent bucketing pass, plus count
/// accounting and tensor invariants.
inline void check_codec_roundtrip(const CheckParams& params, const RoiPriorConfig& cfg,
                                  CheckReport& report) {
  std::mt19937_64 rng(params.seed ^ 0x1ull);
  std::uniform_int_distribution<int> n_objects(0, params.max_objects_per_scene);
  double worst = 0.0;
  int bad_scenes = 0;
  for (int s = 0; s < params.roundtrip_scenes; ++s) {
    std::vector<Box3D> scene;
    const int n = n_objects(rng);
    for (int i = 0; i < n; ++i) scene.push_back(random_box(rng, cfg, false));

    const EncodeResult enc = encode(scene, cfg);
    const auto decoded = decode(enc.tensor, cfg, 0.5);

    if (check_tensor_invariants(enc.tensor, enc.mask)) ++bad_scenes;
    if (static_cast<int>(decoded.size()) + enc.overflow + enc.skipped !=
        static_cast<int>(scene.size())) {
      ++bad_scenes;
      continue;
    }

    // Independent route: bucket by the stated quadrant/floor rules, order by
    // z, truncate to the slot count, then compare field-by-field.
    std::vector<std::vector<Box3D>> buckets(static_cast<std::size_t>(4) * cfg.cuboids);
    for (const Box3D& b : scene) {
      if (std::abs(b.x_c) > cfg.x_max || std::abs(b.y_c) > cfg.y_max || b.z_c <= 0.0 ||
          b.z_c > cfg.z_max) {
        continue;
      }
      const int q = (b.y_c < 0.0 ? 0 : 2) + (b.x_c < 0.0 ? 0 : 1);
      int j = static_cast<int>(b.z_c / (cfg.z_max / cfg.cuboids));
      if (j >= cfg.cuboids) j = cfg.cuboids - 1;
      buckets[static_cast<std::size_t>(q) * cfg.cuboids + j].push_back(b);
    }
    std::vector<Box3D> expected;
    for (auto& bucket : buckets) {
      std::sort(bucket.begin(), bucket.end(),
                [](const Box3D& a, const Box3D& b) { return a.z_c < b.z_c; });
      for (std::size_t k = 0; k < bucket.size() && k < static_cast<std::size_t>(cfg.slots); ++k) {
        expected.push_back(bucket[k]);
      }
    }
    if (expected.size() != decoded.size()) {
      ++bad_scenes;
      continue;
    }
    // decode() walks buckets in the same (quadrant, cuboid, slot) order
    std::sort(expected.begin(), expected.end(), [&cfg](const Box3D& a, const Box3D& b) {
      const int qa = (a.y_c < 0.0 ? 0 : 2) + (a.x_c < 0.0 ? 0 : 1);
      const int qb = (b.y_c < 0.0 ? 0 : 2) + (b.x_c < 0.0 ? 0 : 1);
      if (qa != qb) return qa < qb;
      return a.z_c < b.z_c;
    });
    for (std::size_t i = 0; i < expected.size(); ++i) {
      const Box3D& e = expected[i];
      const Box3D& d = decoded[i];
      const double err = std::max({std::fabs(e.x_c - d.x_c), std::fabs(e.y_c - d.y_c),
                                   std::fabs(e.z_c - d.z_c), std::fabs(e.width - d.width),
                                   std::fabs(e.height - d.height), std::fabs(e.length - d.length),
                                   std::fabs(wrap_to_pi(e.yaw - d.yaw)),
                                   std::fabs(e.confidence - d.confidence)});
      worst = std::max(worst, err);
    }
  }
  const bool ok = bad_scenes == 0 && worst <= 1e-9;
  report.add(ok, "codec roundtrip: " + std::to_string(params.roundtrip_scenes) + " scenes, " +
                     std::to_string(bad_scenes) + " structural failures, max field error " +
                     detail::fmt("%.3e", worst));
}

/// Clipped IoU vs the Monte-Carlo volume estimate.
inline void check_iou_oracle(const CheckParams& params, const RoiPriorConfig& cfg,
                             CheckReport& report) {
  std::mt19937_64 rng(params.seed ^ 0x2ull);
  double worst = 0.0;
  for (int i = 0; i < params.iou_pairs; ++i) {
    const auto [a, b] = random_overlapping_pair(rng, cfg);
    worst = std::max(worst, std::fabs(iou_3d(a, b) - mc_iou_3d(a, b, params.iou_samples, rng)));
    worst = std::max(worst, std::fabs(bev_iou(a, b) - mc_bev_iou(a, b, params.iou_samples, rng)));
  }
  report.add(worst <= params.iou_tolerance,
             "iou vs monte-carlo: " + std::to_string(params.iou_pairs) + " pairs, max |diff| " +
                 detail::fmt("%.4f (tol %.4f)", worst, params.iou_tolerance));
}

/// Analytic gradients vs central differences for every loss.
inline void check_gradients(const CheckParams& params, const RoiPriorConfig& cfg,
                            const LossWeights& weights, CheckReport& report) {
  std::mt19937_64 rng(params.seed ^ 0x3ull);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  RoiPriorConfig small = cfg;
  small.cuboids = 2;
  small.slots = 2;

  const auto random_pair = [&](LabelTensor& gt, LabelTensor& pred, OccupancyMask& mask) {
    std::vector<Box3D> scene;
    const int n = 3 + static_cast<int>(u01(rng) * 4.0);
    for (int i = 0; i < n; ++i) scene.push_back(random_box(rng, small, false));
    EncodeResult enc = encode(scene, small);
    gt = enc.tensor;
    mask = enc.mask;
    pred = gt;
    for (double& v : pred.values()) {
      v = std::clamp(v + (2.0 * u01(rng) - 1.0) * 0.02, 0.05, 0.95);
    }
  };

  struct Suite {
    std::string name;
    double worst = 0.0;
    int checked = 0;
    int boundary_skips = 0;
  };
  std::vector<Suite> suites;

  const auto run_tensor_suite = [&](const std::string& name, auto make_fn) {
    Suite s{name};
    int guard = 0;
    while (s.checked < params.grad_points_per_loss && guard < params.grad_points_per_loss * 20) {
      ++guard;
      LabelTensor gt, pred;
      OccupancyMask mask;
      random_pair(gt, pred, mask);
      if (mask.count() == 0) continue;
      const DifferentiableScalarFn fn = make_fn(gt, mask);
      try {
        s.worst = std::max(s.worst, grad_check(fn, pred.values(), params.grad_step));
        ++s.checked;
      } catch (const BoundaryPointError&) {
        ++s.boundary_skips;
      }
    }
    suites.push_back(s);
  };

  run_tensor_suite("xyz_loss", [&](const LabelTensor& gt, const OccupancyMask& m) {
    return make_xyz_fn(gt, m, weights.xyz);
  });
  run_tensor_suite("whl_loss", [&](const LabelTensor& gt, const OccupancyMask& m) {
    return make_whl_fn(gt, m, weights.whl);
  });
  run_tensor_suite("orientation_loss", [&](const LabelTensor& gt, const OccupancyMask& m) {
    return make_orientation_fn(gt, m, weights.orientation);
  });
  run_tensor_suite("conf_loss", [&](const LabelTensor& gt, const OccupancyMask& m) {
    return make_conf_fn(gt, m, weights.conf);
  });
  run_tensor_suite("iou_loss", [&](const LabelTensor& gt, const OccupancyMask& m) {
    return make_iou_fn(gt, m, small, weights.iou);
  });
  run_tensor_suite("total_loss", [&](const LabelTensor& gt, const OccupancyMask& m) {
    return make_total_fn(gt, m, small, weights);
  });

  // depth branch on 8x8 maps
  {
    Suite mse_suite{"mse_loss"}, eas_suite{"eas_loss"};
    int guard = 0;
    while ((mse_suite.checked < params.grad_points_per_loss ||
            eas_suite.checked < params.grad_points_per_loss) &&
           guard < params.grad_points_per_loss * 20) {
      ++guard;
      Grid gt_grid(8, 8), pred_grid(8, 8);
      RgbImage image(8, 8);
      for (double& v : gt_grid.values()) v = u01(rng) - 0.5;
      for (double& v : pred_grid.values()) v = u01(rng) - 0.5;
      for (double& v : image.values()) v = u01(rng);
      DepthMap gt{gt_grid, DepthMap::State::kNormalized, 100.0};
      if (mse_suite.checked < params.grad_points_per_loss) {
        mse_suite.worst = std::max(
            mse_suite.worst,
            grad_check(make_mse_fn(gt, weights.mse), pred_grid.values(), params.grad_step));
        ++mse_suite.checked;
      }
      if (eas_suite.checked < params.grad_points_per_loss) {
        try {
          eas_suite.worst = std::max(
              eas_suite.worst,
              grad_check(make_eas_fn(image, weights.eas), pred_grid.values(), params.grad_step));
          ++eas_suite.checked;
        } catch (const BoundaryPointError&) {
          ++eas_suite.boundary_skips;
        }
      }
    }
    suites.push_back(mse_suite);
    suites.push_back(eas_suite);
  }

  for (const Suite& s : suites) {
    const bool ok = s.checked >= params.grad_points_per_loss && s.worst <= params.grad_tolerance;
    report.add(ok, "gradient " + s.name + ": " + std::to_string(s.checked) +
                       " interior points, max rel error " +
                       detail::fmt("%.3e (tol %.1e)", s.worst, params.grad_tolerance));
  }
}

/// Production NMS and assignment vs the reference loops, exact equality.
inline void check_nms_oracle(const CheckParams& params, const RoiPriorConfig& cfg,
                             CheckReport& report) {
  std::mt19937_64 rng(params.seed ^ 0x4ull);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int nms_mismatches = 0, assign_mismatches = 0;
  for (int s = 0; s < params.nms_scenes; ++s) {
    // clusters of jittered copies force suppression decisions
    std::vector<Box3D> dets;
    const int n = 1 + static_cast<int>(u01(rng) * params.nms_max_boxes);
    while (static_cast<int>(dets.size()) < n) {
      auto [a, b] = random_overlapping_pair(rng, cfg);
      a.confidence = u01(rng);
      b.confidence = u01(rng);
      a.class_id = static_cast<int>(u01(rng) * 2.0);
      b.class_id = static_cast<int>(u01(rng) * 2.0);
      dets.push_back(a);
      if (static_cast<int>(dets.size()) < n) dets.push_back(b);
    }
    const double thr = 0.2 + 0.6 * u01(rng);
    const IouKind kind = u01(rng) < 0.5 ? IouKind::k3D : IouKind::kBev;
    const bool per_class = u01(rng) < 0.5;

    const auto got = nms(dets, thr, kind, per_class);
    const auto want = reference_nms(dets, thr, kind, per_class);
    bool same = got.size() == want.size();
    for (std::size_t i = 0; same && i < got.size(); ++i) {
      same = got[i].x_c == want[i].x_c && got[i].confidence == want[i].confidence &&
             got[i].class_id == want[i].class_id;
    }
    if (!same) ++nms_mismatches;

    std::vector<Box3D> gts;
    const int m = static_cast<int>(u01(rng) * 10.0);
    for (int i = 0; i < m; ++i) gts.push_back(random_box(rng, cfg, false));
    const Assignment ag = assign(dets, gts, thr, kind);
    const Assignment aw = reference_assign(dets, gts, thr, kind);
    bool asame = ag.pairs.size() == aw.pairs.size() &&
                 ag.unmatched_preds == aw.unmatched_preds && ag.unmatched_gts == aw.unmatched_gts;
    for (std::size_t i = 0; asame && i < ag.pairs.size(); ++i) {
      asame = ag.pairs[i].pred_index == aw.pairs[i].pred_index &&
              ag.pairs[i].gt_index == aw.pairs[i].gt_index;
    }
    if (!asame) ++assign_mismatches;
  }
  report.add(nms_mismatches == 0, "nms vs reference: " + std::to_string(params.nms_scenes) +
                                      " scenes, " + std::to_string(nms_mismatches) +
                                      " mismatches");
  report.add(assign_mismatches == 0, "assignment vs reference: " +
                                         std::to_string(params.nms_scenes) + " scenes, " +
                                         std::to_string(assign_mismatches) + " mismatches");
}

inline CheckReport run_self_checks(const CheckParams& params, const RoiPriorConfig& roi,
                                   const LossWeights& weights) {
  CheckReport report;
  check_codec_roundtrip(params, roi, report);
  check_iou_oracle(params, roi, report);
  check_gradients(params, roi, weights, report);
  check_nms_oracle(params, roi, report);
  return report;
}

}  // namespace cubify3d
