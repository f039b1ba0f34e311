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

#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "cubify3d/matching.hpp"
#include "cubify3d/selfcheck.hpp"

using namespace cubify3d;

namespace {

Box3D det(double x, double z, double conf, int cls = 0) {
  return make_box(x, 0.0, z, 1.8, 1.5, 4.2, 0.0, cls, conf);
}

}  // namespace

TEST_CASE("duplicate detections collapse to the most confident") {
  const std::vector<Box3D> dets = {det(0, 20, 0.8), det(0, 20, 0.9)};
  const auto kept = nms(dets, 0.5);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].confidence == 0.9);
}

TEST_CASE("disjoint boxes all survive in confidence order") {
  const std::vector<Box3D> dets = {det(-10, 20, 0.3), det(10, 20, 0.9), det(0, 60, 0.6)};
  const auto kept = nms(dets, 0.5);
  REQUIRE(kept.size() == 3);
  CHECK(kept[0].confidence == 0.9);
  CHECK(kept[1].confidence == 0.6);
  CHECK(kept[2].confidence == 0.3);
}

TEST_CASE("per-class suppression keeps overlapping boxes of distinct classes") {
  const std::vector<Box3D> dets = {det(0, 20, 0.9, 0), det(0, 20, 0.8, 1)};
  CHECK(nms(dets, 0.5, IouKind::k3D, true).size() == 2);
  CHECK(nms(dets, 0.5, IouKind::k3D, false).size() == 1);
}

TEST_CASE("nms output is a subset with no surviving overlap") {
  std::mt19937_64 rng(41);
  const RoiPriorConfig cfg;
  for (int s = 0; s < 50; ++s) {
    std::vector<Box3D> dets;
    for (int i = 0; i < 30; ++i) {
      auto [a, b] = random_overlapping_pair(rng, cfg);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      a.confidence = u(rng);
      b.confidence = u(rng);
      dets.push_back(a);
      dets.push_back(b);
    }
    const auto kept = nms(dets, 0.45, IouKind::k3D, false);
    CHECK(kept.size() <= dets.size());
    for (std::size_t i = 0; i < kept.size(); ++i)
      for (std::size_t j = i + 1; j < kept.size(); ++j) {
        CHECK(iou_3d(kept[i], kept[j]) < 0.45);
      }
    // idempotence
    const auto again = nms(kept, 0.45, IouKind::k3D, false);
    CHECK(again.size() == kept.size());
  }
}

TEST_CASE("nms equals the brute-force reference on random scenes") {
  std::mt19937_64 rng(43);
  const RoiPriorConfig cfg;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < 100; ++s) {
    std::vector<Box3D> dets;
    const int n = 1 + static_cast<int>(u(rng) * 50.0);
    while (static_cast<int>(dets.size()) < n) {
      auto [a, b] = random_overlapping_pair(rng, cfg);
      a.confidence = u(rng);
      b.confidence = u(rng);
      dets.push_back(a);
      dets.push_back(b);
    }
    const double thr = 0.25 + 0.5 * u(rng);
    const auto got = nms(dets, thr, IouKind::k3D, false);
    const auto want = reference_nms(dets, thr, IouKind::k3D, false);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].x_c == want[i].x_c);
      CHECK(got[i].confidence == want[i].confidence);
    }
  }
}

TEST_CASE("one perfect prediction matches its ground truth") {
  const Box3D gt = det(0, 20, 1.0);
  const Assignment a = assign(std::vector<Box3D>{gt}, std::vector<Box3D>{gt}, 0.7);
  REQUIRE(a.pairs.size() == 1);
  CHECK(a.pairs[0].iou == 1.0);
  CHECK(a.unmatched_preds.empty());
  CHECK(a.unmatched_gts.empty());
}

TEST_CASE("below-threshold overlap leaves both sides unmatched") {
  const Box3D p = det(0, 20, 0.9);
  const Box3D g = det(1.4, 20, 1.0);  // mild overlap, well under 0.5
  REQUIRE(iou_3d(p, g) < 0.5);
  REQUIRE(iou_3d(p, g) > 0.0);
  const Assignment a = assign(std::vector<Box3D>{p}, std::vector<Box3D>{g}, 0.5);
  CHECK(a.pairs.empty());
  CHECK(a.unmatched_preds == std::vector<int>{0});
  CHECK(a.unmatched_gts == std::vector<int>{0});
}

TEST_CASE("greedy assignment takes the highest IoU first") {
  // one confident pred between two gts; it must take the closer one
  const Box3D p = det(0.2, 20, 0.9);
  const std::vector<Box3D> gts = {det(0, 20, 1.0), det(1.0, 20, 1.0)};
  const Assignment a = assign(std::vector<Box3D>{p}, gts, 0.1);
  REQUIRE(a.pairs.size() == 1);
  CHECK(a.pairs[0].gt_index == 0);
}

TEST_CASE("assignment equals the brute-force oracle on random scenes") {
  std::mt19937_64 rng(47);
  const RoiPriorConfig cfg;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < 100; ++s) {
    std::vector<Box3D> preds, gts;
    for (int i = 0; i < 5; ++i) {
      auto [a, b] = random_overlapping_pair(rng, cfg);
      a.confidence = u(rng);
      preds.push_back(a);
      gts.push_back(b);
    }
    for (int i = 0; i < 3; ++i) gts.push_back(random_box(rng, cfg, false));
    const double thr = 0.2 + 0.5 * u(rng);
    const Assignment got = assign(preds, gts, thr);
    const Assignment want = reference_assign(preds, gts, thr, IouKind::k3D);
    REQUIRE(got.pairs.size() == want.pairs.size());
    for (std::size_t i = 0; i < got.pairs.size(); ++i) {
      CHECK(got.pairs[i].pred_index == want.pairs[i].pred_index);
      CHECK(got.pairs[i].gt_index == want.pairs[i].gt_index);
    }
    CHECK(got.unmatched_preds == want.unmatched_preds);
    CHECK(got.unmatched_gts == want.unmatched_gts);
    CHECK(got.pairs.size() <= std::min(preds.size(), gts.size()));
  }
}

TEST_CASE("removing an unmatched prediction never changes existing pairs") {
  std::mt19937_64 rng(53);
  const RoiPriorConfig cfg;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < 30; ++s) {
    std::vector<Box3D> preds, gts;
    for (int i = 0; i < 4; ++i) {
      auto [a, b] = random_overlapping_pair(rng, cfg);
      a.confidence = u(rng);
      preds.push_back(a);
      gts.push_back(b);
    }
    preds.push_back(random_box(rng, cfg, true));  // likely unmatched
    const Assignment before = assign(preds, gts, 0.4);
    const int victim = before.unmatched_preds.empty() ? -1 : before.unmatched_preds.back();
    if (victim < 0) continue;
    std::vector<Box3D> fewer = preds;
    fewer.erase(fewer.begin() + victim);
    const Assignment after = assign(fewer, gts, 0.4);
    REQUIRE(after.pairs.size() == before.pairs.size());
    for (std::size_t i = 0; i < after.pairs.size(); ++i) {
      CHECK(after.pairs[i].gt_index == before.pairs[i].gt_index);
    }
  }
}
