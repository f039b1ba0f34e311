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

// Acceptance suite: end-to-end checks with fixed seeds and pinned tolerances.
// Usage: acceptance [criterion ...]   (no arguments runs all nine)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "cubify3d/cubify3d.hpp"
#include "support/kitti_fixture.hpp"
#include "support/loss_oracles.hpp"

using namespace cubify3d;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool g_all_passed = true;

void report(int criterion, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
  g_all_passed = g_all_passed && ok;
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. IoU oracle equivalence: 200 seeded pairs vs 1e6-sample Monte-Carlo,
//    |diff| <= 0.01 each, under 60 s.

void criterion_1() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20260810);
  const RoiPriorConfig cfg;  // centers in ROI, dims in KITTI priors, yaw uniform
  double worst = 0.0;
  int failures = 0;
  for (int i = 0; i < 200; ++i) {
    Box3D a, b;
    if (i % 2 == 0) {
      a = random_box(rng, cfg, false);
      b = random_box(rng, cfg, false);
    } else {
      std::tie(a, b) = random_overlapping_pair(rng, cfg);
    }
    const double diff = std::fabs(iou_3d(a, b) - mc_iou_3d(a, b, 1000000, rng));
    worst = std::max(worst, diff);
    failures += diff > 0.01;
  }
  const double secs = seconds_since(t0);
  report(1, failures == 0 && secs < 60.0,
         fmt("iou vs 1e6-sample MC on 200 pairs: max |diff| %.4f (tol 0.01), %.1f s (limit 60)",
             worst, secs));
}

// ---------------------------------------------------------------------------
// 2. Codec roundtrip: 1e4 scenes up to 40 objects, per-field error <= 1e-9,
//    exact count accounting, under 10 s single-threaded.

void criterion_2() {
  const auto t0 = Clock::now();
  CheckParams params;
  params.seed = 99;
  params.roundtrip_scenes = 10000;
  params.max_objects_per_scene = 40;
  CheckReport rep;
  check_codec_roundtrip(params, RoiPriorConfig{}, rep);
  const double secs = seconds_since(t0);
  report(2, rep.passed && secs < 10.0,
         fmt("decode(encode(.)) on 10000 scenes: %s, %.2f s (limit 10)",
             rep.lines.front().c_str(), secs));
}

// ---------------------------------------------------------------------------
// 3. Loss identities: gt-vs-gt components vanish; every loss matches the
//    naive loop oracle to 1e-12.

void criterion_3() {
  std::mt19937_64 rng(31337);
  const RoiPriorConfig cfg;
  const LossWeights w;
  std::uniform_real_distribution<double> u(0.02, 0.98);
  bool identity_ok = true;
  double worst_oracle = 0.0;
  for (int i = 0; i < 100; ++i) {
    std::vector<Box3D> scene;
    std::uniform_int_distribution<int> n_objects(1, 25);
    for (int n = n_objects(rng); n > 0; --n) scene.push_back(random_box(rng, cfg, false));
    const EncodeResult enc = encode(scene, cfg);

    const LossBreakdown b = total_detection_loss(enc.tensor, enc.tensor, enc.mask, cfg, w);
    identity_ok = identity_ok && b.xyz == 0.0 && b.whl == 0.0 && b.orientation == 0.0 &&
                  b.iou == 0.0 && b.conf <= 1e-12;

    // random prediction vs this ground truth, against the loop oracles
    LabelTensor pred(cfg.cuboids, cfg.slots);
    for (double& v : pred.values()) v = u(rng);
    const auto check = [&worst_oracle](double got, double want) {
      worst_oracle = std::max(worst_oracle, std::fabs(got - want));
    };
    check(xyz_loss(pred, enc.tensor, enc.mask, w.xyz), oracle::xyz(pred, enc.tensor, enc.mask, w.xyz));
    check(whl_loss(pred, enc.tensor, enc.mask, w.whl), oracle::whl(pred, enc.tensor, enc.mask, w.whl));
    check(orientation_loss(pred, enc.tensor, enc.mask, w.orientation),
          oracle::orientation(pred, enc.tensor, enc.mask, w.orientation));
    check(conf_loss(pred, enc.tensor, enc.mask, w.conf),
          oracle::conf(pred, enc.tensor, enc.mask, w.conf));
    check(iou_loss(pred, enc.tensor, enc.mask, cfg, w.iou),
          oracle::iou(pred, enc.tensor, enc.mask, cfg, w.iou));

    // depth branch oracles on 8x8 maps
    Grid gp(8, 8), gg(8, 8);
    RgbImage img(8, 8);
    for (double& v : gp.values()) v = u(rng) - 0.5;
    for (double& v : gg.values()) v = u(rng) - 0.5;
    for (double& v : img.values()) v = u(rng);
    const DepthMap dp{gp, DepthMap::State::kNormalized, 100.0};
    const DepthMap dg{gg, DepthMap::State::kNormalized, 100.0};
    check(mse_loss(dp, dg, w.mse), oracle::mse(dp, dg, w.mse));
    check(eas_loss(dp, img, w.eas), oracle::eas(dp, img, w.eas));
  }
  report(3, identity_ok && worst_oracle <= 1e-12,
         fmt("gt-vs-gt identities %s; max |loss - loop oracle| = %.2e (tol 1e-12)",
             identity_ok ? "hold" : "VIOLATED", worst_oracle));
}

// ---------------------------------------------------------------------------
// 4. Gradient checks: analytic vs central differences (h = 1e-5), relative
//    error <= 1e-4 on 100 interior points per loss, depth losses on 8x8 maps.

void criterion_4() {
  CheckParams params;
  params.seed = 4242;
  params.grad_points_per_loss = 100;
  params.grad_step = 1e-5;
  params.grad_tolerance = 1e-4;
  CheckReport rep;
  check_gradients(params, RoiPriorConfig{}, LossWeights{}, rep);
  std::string merged;
  for (const auto& line : rep.lines) {
    merged += "\n    " + line;
  }
  report(4, rep.passed, "analytic vs finite-difference, 100 points per loss:" + merged);
}

// ---------------------------------------------------------------------------
// 5. NMS and assignment vs brute-force references on 500 scenes up to 50 boxes.

void criterion_5() {
  CheckParams params;
  params.seed = 777;
  params.nms_scenes = 500;
  params.nms_max_boxes = 50;
  CheckReport rep;
  check_nms_oracle(params, RoiPriorConfig{}, rep);
  report(5, rep.passed,
         rep.lines.size() >= 2 ? rep.lines[0] + "; " + rep.lines[1] : "suite did not run");
}

// ---------------------------------------------------------------------------
// 6. AP exactness: grid-sum oracles to 1e-12 on 100 synthetic curves, and the
//    encode -> decode -> evaluate self-match scores exactly 100 everywhere.

double oracle_ap_grid(const PRCurve& curve, int steps) {
  if (curve.total_gt == 0) return 0.0;
  double total = 0.0;
  for (int s = 0; s < steps; ++s) {
    const double r = static_cast<double>(s) / (steps - 1);
    double best = 0.0;
    for (const PRPoint& p : curve.points) {
      if (p.recall >= r) best = std::max(best, p.precision);
    }
    total += best;
  }
  return total / steps * 100.0;
}

void criterion_6() {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    PRCurve c;
    c.total_gt = 1 + static_cast<int>(u(rng) * 30.0);
    int tp = 0, fp = 0;
    double conf = 1.0;
    for (int n = 1 + static_cast<int>(u(rng) * 40.0); n > 0; --n) {
      conf -= u(rng) * 0.04;
      (u(rng) < 0.5 && tp < c.total_gt ? tp : fp)++;
      c.points.push_back(PRPoint{conf, static_cast<double>(tp) / (tp + fp),
                                 static_cast<double>(tp) / c.total_gt});
    }
    worst = std::max(worst, std::fabs(ap_101(c) - oracle_ap_grid(c, 101)));
    worst = std::max(worst, std::fabs(ap_r11(c) - oracle_ap_grid(c, 11)));
  }
  const bool oracles_ok = worst <= 1e-12;

  // self-match pipeline, including both file-format transformations
  const ToolkitConfig cfg;
  std::mt19937_64 scene_rng(607);
  std::vector<std::vector<Box3D>> dets_by_frame;
  std::vector<std::vector<GtObject>> gts_by_frame;
  const char* names[3] = {"Car", "Pedestrian", "Cyclist"};
  bool pipeline_ran = true;
  for (int f = 0; f < 20; ++f) {
    // well-separated scene in canonical label text form
    std::vector<KittiLabel> labels;
    for (int i = 0; i < 6; ++i) {
      KittiLabel lab;
      lab.type = names[i % 3];
      lab.bbox = Rect2D{100.0 + 60.0 * i, 150.0, 150.0 + 60.0 * i, 250.0};
      lab.height = 1.5 + 0.25 * (i % 3);
      lab.width = 0.6 + 0.5 * (i % 3);
      lab.length = 1.2 + 1.1 * (i % 3);
      lab.x = -30.0 + 10.0 * i + u(scene_rng) * 4.0;
      lab.y = 1.4 + u(scene_rng) * 0.4;
      lab.z = 8.0 + 14.0 * i + u(scene_rng) * 5.0;
      lab.rotation_y = std::round((u(scene_rng) * 2.0 - 1.0) * 3.0 * 100.0) / 100.0;
      labels.push_back(lab);
    }
    const auto parsed = parse_labels(serialize_labels(labels));

    std::vector<Box3D> boxes;
    for (const auto& lab : parsed) boxes.push_back(to_box3d(lab, cfg.classes));
    const EncodeResult enc = encode(boxes, cfg.roi);
    if (enc.skipped != 0 || enc.overflow != 0) pipeline_ran = false;

    // binary tensor roundtrip, then decode + class sidecar + NMS
    const auto bytes = tensor_to_bytes(enc.tensor);
    const LabelTensor loaded = tensor_from_bytes(bytes.data(), bytes.size());
    std::vector<Box3D> decoded = decode(loaded, cfg.roi, cfg.conf_threshold);
    for (Box3D& d : decoded) {
      double best = 1e30;
      for (const Box3D& src : boxes) {
        if (quadrant_index(src, cfg.roi) != quadrant_index(d, cfg.roi) ||
            cuboid_index(src.z_c, cfg.roi) != cuboid_index(d.z_c, cfg.roi)) {
          continue;
        }
        const double dz = std::fabs(src.z_c - d.z_c);
        if (dz < best) {
          best = dz;
          d.class_id = src.class_id;
        }
      }
    }
    decoded = nms(decoded, cfg.nms_threshold, cfg.iou_kind, cfg.per_class_nms);

    // result-file roundtrip for the detections
    std::vector<KittiLabel> det_labels;
    for (const Box3D& b : decoded) det_labels.push_back(from_box3d(b, cfg.classes));
    std::vector<Box3D> det_boxes;
    for (const auto& lab : parse_labels(serialize_labels(det_labels))) {
      det_boxes.push_back(to_box3d(lab, cfg.classes));
    }

    std::vector<GtObject> gts;
    for (const auto& lab : parsed) gts.push_back(to_gt_object(lab, cfg.classes));
    dets_by_frame.push_back(std::move(det_boxes));
    gts_by_frame.push_back(std::move(gts));
  }
  EvalConfig ecfg = eval_config_from(cfg);
  const EvalReport rep = evaluate(dets_by_frame, gts_by_frame, ecfg);
  bool self_match_ok = pipeline_ran && !rep.entries.empty();
  double min_ap = 100.0;
  for (const ApEntry& e : rep.entries) {
    min_ap = std::min(min_ap, std::min(e.ap101, e.ap11));
    self_match_ok = self_match_ok && e.ap101 == 100.0 && e.ap11 == 100.0;
  }
  report(6, oracles_ok && self_match_ok,
         fmt("ap grid oracles max |diff| %.2e (tol 1e-12); self-match pipeline min AP %.6f "
             "across %zu (class, threshold, difficulty, kind) cells",
             worst, min_ap, rep.entries.size()));
}

// ---------------------------------------------------------------------------
// 7. Format fidelity on the hand-built label corpus.

void criterion_7() {
  const auto labels = parse_labels(fixture::kLabels);
  bool ok = static_cast<int>(labels.size()) == fixture::kLabelCount && labels.size() >= 20;

  // every default class present, DontCare present, both field widths present
  const ClassRegistry classes;
  std::map<std::string, int> seen;
  int with_score = 0, without_score = 0, dont_care = 0;
  for (const auto& lab : labels) {
    seen[lab.type]++;
    (lab.score ? with_score : without_score)++;
    dont_care += lab.dont_care();
  }
  for (const std::string& name : classes.names) ok = ok && seen.count(name) > 0;
  ok = ok && dont_care >= 2 && with_score >= 8 && without_score >= 10;

  // canonical re-serialization: zero field drift, byte-identical text
  const std::string canonical = serialize_labels(labels);
  ok = ok && canonical == fixture::kLabels;
  const auto reparsed = parse_labels(canonical);
  ok = ok && serialize_labels(reparsed) == canonical;

  // line-precise strict errors
  int caught = 0;
  try {
    parse_labels("Car 0.00 0 1.85 1 2 3 4 1.5 1.6 3.7 1 2 30\n");  // 14 fields
  } catch (const MalformedLineError& e) {
    caught += e.line_number == 1;
  }
  try {
    parse_labels(std::string(fixture::kLabels) + "Car 0.00 0 bad 1 2 3 4 1.5 1.6 3.7 1 2 30 0.5\n");
  } catch (const MalformedLineError& e) {
    caught += e.line_number == fixture::kLabelCount + 1;
  }
  try {
    parse_labels("Car 0.00 0 1.85 1 2 3 4 1.5 1.6 inf 1 2 30 0.5\n");
  } catch (const MalformedLineError& e) {
    caught += e.line_number == 1;
  }
  ok = ok && caught == 3;

  report(7, ok,
         fmt("%zu-line corpus (8 classes + DontCare, 15/16 fields): canonical roundtrip %s, "
             "%d/3 malformed lines pinpointed",
             labels.size(), canonical == fixture::kLabels ? "byte-identical" : "DRIFTED",
             caught));
}

// ---------------------------------------------------------------------------
// 8. Paper-constant conformance of the default configuration.

void criterion_8() {
  const ToolkitConfig cfg;
  bool ok = cfg.roi.x_max == 40.0 && cfg.roi.y_max == 10.0 && cfg.roi.z_max == 100.0;
  ok = ok && cfg.roi.cuboids == 5 && cfg.roi.slots == 10 && cfg.roi.capacity() == 200;
  ok = ok && cfg.weights.mse == 0.8 && cfg.weights.eas == 0.2 && cfg.weights.xyz == 5.0 &&
       cfg.weights.whl == 5.0 && cfg.weights.orientation == 1.0 && cfg.weights.iou == 0.01 &&
       cfg.weights.conf == 0.5;
  const DimPriors& k = cfg.roi.dim_priors;
  ok = ok && k.w_min == 0.30 && k.w_max == 3.01 && k.h_min == 0.76 && k.h_max == 4.20 &&
       k.l_min == 0.20 && k.l_max == 35.24;
  const DimPriors& v = kVKitti2DimPriors;
  ok = ok && v.w_min == 1.13 && v.w_max == 3.02 && v.h_min == 1.22 && v.h_max == 4.20 &&
       v.l_min == 2.22 && v.l_max == 16.44;
  ok = ok && cfg.eval_iou_thresholds == std::vector<double>{0.3, 0.5, 0.7};
  report(8, ok,
         "defaults: ROI (40, 10, 100) m, 5 cuboids x 10 slots = 200-object capacity, lambda = "
         "(0.8, 0.2, 5.0, 5.0, 1.0, 0.01, 0.5), KITTI + vKITTI2 priors");
}

// ---------------------------------------------------------------------------
// 9. Throughput: encode + decode + NMS + assignment over 3769 synthetic
//    frames (~15 objects each) in < 5 s on one core; near-linear thread
//    scaling up to 4 threads.

void criterion_9() {
  const RoiPriorConfig cfg;
  std::mt19937_64 rng(909);
  std::uniform_int_distribution<int> n_objects(10, 20);
  const int n_frames = 3769;
  std::vector<std::vector<Box3D>> frames(n_frames);
  for (auto& scene : frames) {
    for (int n = n_objects(rng); n > 0; --n) scene.push_back(random_box(rng, cfg, false));
  }

  std::vector<int> sink(static_cast<std::size_t>(n_frames), 0);
  const auto pipeline = [&](std::size_t i) {
    const EncodeResult enc = encode(frames[i], cfg);
    const auto decoded = decode(enc.tensor, cfg, 0.5);
    const auto kept = nms(decoded, 0.5, IouKind::k3D, false);
    const Assignment a = assign(kept, frames[i], 0.5);
    sink[i] = static_cast<int>(a.pairs.size());
  };

  const auto run_with = [&](int threads) {
    const auto t0 = Clock::now();
    parallel_for(frames.size(), threads, pipeline);
    return seconds_since(t0);
  };

  run_with(1);  // warm-up pass: faults pages and stabilizes the allocator
  const double t1 = run_with(1);
  const double t2 = run_with(2);
  const double t4 = run_with(4);
  const double s2 = t1 / t2;
  const double s4 = t1 / t4;
  const bool single_ok = t1 < 5.0;
  const bool scale_ok = s2 >= 2.0 * 0.7 && s4 >= 4.0 * 0.7;
  const unsigned cores = std::thread::hardware_concurrency();
  report(9, single_ok && scale_ok,
         fmt("3769 frames: %.2f s single-thread (limit 5); speedup x%.2f @2 threads, x%.2f @4 "
             "threads (need >= 1.40 / 2.80; %u hardware cores)",
             t1, s2, s4, cores));
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  const auto want = [&selected](int n) {
    return selected.empty() ||
           std::find(selected.begin(), selected.end(), n) != selected.end();
  };

  if (want(1)) criterion_1();
  if (want(2)) criterion_2();
  if (want(3)) criterion_3();
  if (want(4)) criterion_4();
  if (want(5)) criterion_5();
  if (want(6)) criterion_6();
  if (want(7)) criterion_7();
  if (want(8)) criterion_8();
  if (want(9)) criterion_9();

  std::printf("%s\n", g_all_passed ? "acceptance: all criteria passed"
                                   : "acceptance: FAILURES PRESENT");
  return g_all_passed ? 0 : 1;
}
