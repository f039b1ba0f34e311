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

// cubify3d: label codec, NMS, priors, and evaluation pipeline over
// KITTI-format object labels.
//
// Exit codes: 0 success, 1 verification failure, 2 input or parse error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cubify3d/cubify3d.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitInputError = 2;

struct CommonOpts {
  std::string config_path;
  int threads = 0;          // 0 = keep config value
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string iou_kind;
  double conf = -1.0;       // <0 = keep config value
  double nms = -1.0;
};

cubify3d::ToolkitConfig resolve_config(const CommonOpts& opts) {
  cubify3d::ToolkitConfig cfg;
  if (!opts.config_path.empty()) cfg = cubify3d::load_config(opts.config_path);
  if (opts.threads > 0) cfg.threads = opts.threads;
  if (opts.seed_set) cfg.seed = opts.seed;
  if (!opts.iou_kind.empty()) cfg.iou_kind = cubify3d::iou_kind_from_string(opts.iou_kind);
  if (opts.conf >= 0.0) cfg.conf_threshold = opts.conf;
  if (opts.nms >= 0.0) cfg.nms_threshold = opts.nms;
  return cfg;
}

void add_common_flags(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "JSON config file; flags override its values");
  cmd->add_option("--threads", opts.threads, "worker threads for frame-parallel stages");
  cmd->add_option("--seed", opts.seed, "RNG seed")->each([&opts](const std::string&) {
    opts.seed_set = true;
  });
  cmd->add_option("--iou-kind", opts.iou_kind, "IoU flavor: 3d or bev")
      ->check(CLI::IsMember({"3d", "bev"}));
  cmd->add_option("--conf", opts.conf, "confidence threshold");
  cmd->add_option("--nms", opts.nms, "NMS IoU threshold");
}

std::vector<std::pair<std::string, fs::path>> list_frames(const fs::path& dir,
                                                          const std::string& ext) {
  if (!fs::is_directory(dir)) {
    throw std::runtime_error("not a directory: " + dir.string());
  }
  std::vector<std::pair<std::string, fs::path>> frames;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) {
      frames.emplace_back(entry.path().stem().string(), entry.path());
    }
  }
  std::sort(frames.begin(), frames.end());
  return frames;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
  }
  fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// encode: label dir -> tensor files + class sidecars + summary

int cmd_encode(const CommonOpts& opts, const std::string& label_dir, const std::string& out_dir) {
  const cubify3d::ToolkitConfig cfg = resolve_config(opts);
  const auto frames = list_frames(label_dir, ".txt");
  fs::create_directories(out_dir);

  struct FrameStat {
    std::string id;
    int encoded = 0, overflow = 0, skipped = 0;
  };
  std::vector<FrameStat> stats(frames.size());
  std::mutex io_error_mutex;

  cubify3d::parallel_for(frames.size(), cfg.threads, [&](std::size_t i) {
    const auto& [frame_id, path] = frames[i];
    const auto labels = cubify3d::parse_labels(read_file(path));
    std::vector<cubify3d::Box3D> boxes;
    std::vector<int> class_ids;
    for (const auto& lab : labels) {
      if (lab.dont_care()) continue;
      try {
        boxes.push_back(cubify3d::to_box3d(lab, cfg.classes));
      } catch (const std::invalid_argument&) {
        continue;  // zero-dim or out-of-range record: not encodable
      }
    }
    const cubify3d::EncodeResult enc = cubify3d::encode(boxes, cfg.roi);
    cubify3d::save_tensor(fs::path(out_dir) / (frame_id + ".cub3"), enc.tensor);

    // the tensor has no class channel; classes ride in a sidecar keyed by slot
    json sidecar = json::array();
    for (const cubify3d::Box3D& b : boxes) {
      if (!cubify3d::in_roi(b, cfg.roi)) continue;
      const int q = cubify3d::quadrant_index(b, cfg.roi);
      const int j = cubify3d::cuboid_index(b.z_c, cfg.roi);
      sidecar.push_back({{"quadrant", q}, {"cuboid", j}, {"z", b.z_c}, {"class_id", b.class_id}});
    }
    write_file_atomic(fs::path(out_dir) / (frame_id + ".classes.json"), sidecar.dump());

    stats[i] = FrameStat{frame_id, enc.encoded, enc.overflow, enc.skipped};
  });

  json summary;
  summary["frames"] = json::array();
  int total_encoded = 0, total_overflow = 0, total_skipped = 0;
  for (const FrameStat& s : stats) {
    summary["frames"].push_back({{"frame", s.id},
                                 {"encoded", s.encoded},
                                 {"overflow", s.overflow},
                                 {"skipped", s.skipped}});
    total_encoded += s.encoded;
    total_overflow += s.overflow;
    total_skipped += s.skipped;
  }
  summary["total_encoded"] = total_encoded;
  summary["total_overflow"] = total_overflow;
  summary["total_skipped"] = total_skipped;
  write_file_atomic(fs::path(out_dir) / "summary.json", summary.dump(2));
  std::cout << "encoded " << frames.size() << " frames (" << total_encoded << " objects, "
            << total_overflow << " overflow, " << total_skipped << " skipped)\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// decode: tensor dir -> KITTI result files

int cmd_decode(const CommonOpts& opts, const std::string& tensor_dir, const std::string& out_dir) {
  const cubify3d::ToolkitConfig cfg = resolve_config(opts);
  const auto frames = list_frames(tensor_dir, ".cub3");
  fs::create_directories(out_dir);

  cubify3d::parallel_for(frames.size(), cfg.threads, [&](std::size_t i) {
    const auto& [frame_id, path] = frames[i];
    cubify3d::LabelTensor tensor;
    try {
      tensor = cubify3d::load_tensor(path);
    } catch (const cubify3d::TensorFormatError& e) {
      throw std::runtime_error("frame " + frame_id + ": " + e.what());
    }
    std::vector<cubify3d::Box3D> boxes = cubify3d::decode(tensor, cfg.roi, cfg.conf_threshold);

    // classes from the encode sidecar when present: nearest recorded object
    // in the same (quadrant, cuboid) bucket by z
    const fs::path sidecar_path = fs::path(tensor_dir) / (frame_id + ".classes.json");
    if (fs::exists(sidecar_path)) {
      const json sidecar = json::parse(read_file(sidecar_path));
      for (cubify3d::Box3D& b : boxes) {
        const int q = cubify3d::quadrant_index(b, cfg.roi);
        const int j = cubify3d::cuboid_index(b.z_c, cfg.roi);
        double best = 1e30;
        for (const auto& rec : sidecar) {
          if (rec.at("quadrant").get<int>() != q || rec.at("cuboid").get<int>() != j) continue;
          const double dz = std::fabs(rec.at("z").get<double>() - b.z_c);
          if (dz < best) {
            best = dz;
            b.class_id = rec.at("class_id").get<int>();
          }
        }
      }
    }

    boxes = cubify3d::nms(boxes, cfg.nms_threshold, cfg.iou_kind, cfg.per_class_nms);
    std::vector<cubify3d::KittiLabel> labels;
    for (const cubify3d::Box3D& b : boxes) {
      labels.push_back(cubify3d::from_box3d(b, cfg.classes));
    }
    write_file_atomic(fs::path(out_dir) / (frame_id + ".txt"),
                      cubify3d::serialize_labels(labels));
  });
  std::cout << "decoded " << frames.size() << " frames\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// priors: label dir -> dimension min/max JSON

int cmd_priors(const CommonOpts& opts, const std::string& label_dir, const std::string& out_path) {
  const cubify3d::ToolkitConfig cfg = resolve_config(opts);
  const auto frames = list_frames(label_dir, ".txt");
  std::vector<cubify3d::KittiLabel> all;
  for (const auto& [frame_id, path] : frames) {
    const auto labels = cubify3d::parse_labels(read_file(path));
    all.insert(all.end(), labels.begin(), labels.end());
  }
  const cubify3d::DimPriors priors = cubify3d::compute_priors(all, cfg.roi);
  const std::string text = cubify3d::to_json(priors).dump(2) + "\n";
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    write_file_atomic(out_path, text);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval / errmap

struct LoadedFrames {
  std::vector<std::vector<cubify3d::Box3D>> dets;
  std::vector<std::vector<cubify3d::GtObject>> gts;
};

LoadedFrames load_eval_inputs(const std::string& gt_dir, const std::string& det_dir,
                              const cubify3d::ToolkitConfig& cfg) {
  const auto gt_frames = list_frames(gt_dir, ".txt");
  std::map<std::string, fs::path> det_paths;
  for (const auto& [frame_id, path] : list_frames(det_dir, ".txt")) det_paths[frame_id] = path;

  LoadedFrames out;
  out.dets.resize(gt_frames.size());
  out.gts.resize(gt_frames.size());
  cubify3d::parallel_for(gt_frames.size(), cfg.threads, [&](std::size_t i) {
    const auto& [frame_id, gt_path] = gt_frames[i];
    for (const auto& lab : cubify3d::parse_labels(read_file(gt_path))) {
      out.gts[i].push_back(cubify3d::to_gt_object(lab, cfg.classes));
    }
    const auto it = det_paths.find(frame_id);
    if (it == det_paths.end()) return;  // no detections for this frame
    for (const auto& lab : cubify3d::parse_labels(read_file(it->second))) {
      if (lab.dont_care()) continue;
      try {
        out.dets[i].push_back(cubify3d::to_box3d(lab, cfg.classes));
      } catch (const std::invalid_argument&) {
      }
    }
  });
  return out;
}

int cmd_eval(const CommonOpts& opts, const std::string& gt_dir, const std::string& det_dir,
             const std::string& out_dir) {
  const cubify3d::ToolkitConfig cfg = resolve_config(opts);
  const LoadedFrames frames = load_eval_inputs(gt_dir, det_dir, cfg);
  const cubify3d::EvalConfig ecfg = cubify3d::eval_config_from(cfg);
  const cubify3d::EvalReport report = cubify3d::evaluate(frames.dets, frames.gts, ecfg);

  fs::create_directories(out_dir);
  write_file_atomic(fs::path(out_dir) / "report.json",
                    cubify3d::report_to_json(report, cfg.classes).dump(2) + "\n");
  write_file_atomic(fs::path(out_dir) / "ap.csv", cubify3d::ap_csv(report, cfg.classes));
  write_file_atomic(fs::path(out_dir) / "err_vs_z.csv",
                    cubify3d::err_csv(report.err_histograms, cfg.classes));
  for (const cubify3d::ApEntry& e : report.entries) {
    char name[128];
    std::snprintf(name, sizeof(name), "pr_%s_%s_%.2f_%s.csv",
                  cfg.classes.name_of(e.class_id).c_str(), cubify3d::to_string(e.kind),
                  e.iou_threshold, cubify3d::to_string(e.difficulty));
    write_file_atomic(fs::path(out_dir) / name, cubify3d::pr_csv(e.curve));
  }

  for (const cubify3d::MapEntry& m : report.map_entries) {
    char line[160];
    std::snprintf(line, sizeof(line), "mAP %s iou=%.2f %-8s : %7.3f (%d classes)\n",
                  cubify3d::to_string(m.kind), m.iou_threshold, cubify3d::to_string(m.difficulty),
                  m.map, m.class_count);
    std::cout << line;
  }
  return kExitOk;
}

int cmd_errmap(const CommonOpts& opts, const std::string& gt_dir, const std::string& det_dir,
               const std::string& out_path, double bin_width, double match_iou) {
  const cubify3d::ToolkitConfig cfg = resolve_config(opts);
  const LoadedFrames frames = load_eval_inputs(gt_dir, det_dir, cfg);
  std::vector<cubify3d::ErrHistogram> hists;
  for (int cls = 0; cls < cfg.classes.size(); ++cls) {
    cubify3d::ErrHistogram h;
    h.class_id = cls;
    h.bins = cubify3d::err_vs_z(frames.dets, frames.gts, cls, match_iou, cfg.iou_kind, bin_width,
                                cfg.roi.z_max);
    bool any = false;
    for (const auto& b : h.bins) any = any || b.count > 0;
    if (any) hists.push_back(std::move(h));
  }
  const std::string csv = cubify3d::err_csv(hists, cfg.classes);
  if (out_path.empty() || out_path == "-") {
    std::cout << csv;
  } else {
    write_file_atomic(out_path, csv);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// check: deterministic self-verification suites

int cmd_check(const CommonOpts& opts, int cases) {
  const cubify3d::ToolkitConfig cfg = resolve_config(opts);
  cubify3d::CheckParams params;
  params.seed = cfg.seed;
  params.roundtrip_scenes = cases;
  params.iou_pairs = std::max(10, cases / 4);
  params.grad_points_per_loss = std::max(5, cases / 10);
  params.nms_scenes = std::max(20, cases / 2);
  const cubify3d::CheckReport report =
      cubify3d::run_self_checks(params, cfg.roi, cfg.weights);
  std::cout << report.to_string();
  std::cout << (report.passed ? "all checks passed\n" : "CHECKS FAILED\n");
  return report.passed ? kExitOk : kExitVerifyFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cubified label codec and evaluation toolkit for monocular 3D object detection"};
  app.require_subcommand(1);

  CommonOpts opts;

  std::string label_dir, tensor_dir, out_dir, gt_dir, det_dir, out_path;
  double bin_width = 2.0, match_iou = 0.5;
  int cases = 100;

  CLI::App* enc = app.add_subcommand("encode", "encode KITTI labels into label tensors");
  enc->add_option("--labels", label_dir, "directory of KITTI label .txt files")->required();
  enc->add_option("--out", out_dir, "output directory for .cub3 tensors")->required();
  add_common_flags(enc, opts);

  CLI::App* dec = app.add_subcommand("decode", "decode label tensors into KITTI result files");
  dec->add_option("--tensors", tensor_dir, "directory of .cub3 tensors")->required();
  dec->add_option("--out", out_dir, "output directory for result .txt files")->required();
  add_common_flags(dec, opts);

  CLI::App* pri = app.add_subcommand("priors", "compute dimension priors from labels");
  pri->add_option("--labels", label_dir, "directory of KITTI label .txt files")->required();
  pri->add_option("--out", out_path, "output JSON path (default: stdout)");
  add_common_flags(pri, opts);

  CLI::App* ev = app.add_subcommand("eval", "AP / mAP / PR-curve evaluation");
  ev->add_option("--gt", gt_dir, "ground-truth label directory")->required();
  ev->add_option("--dets", det_dir, "detection result directory")->required();
  ev->add_option("--out", out_dir, "report output directory")->required();
  add_common_flags(ev, opts);

  CLI::App* em = app.add_subcommand("errmap", "center-error vs distance histogram");
  em->add_option("--gt", gt_dir, "ground-truth label directory")->required();
  em->add_option("--dets", det_dir, "detection result directory")->required();
  em->add_option("--out", out_path, "output CSV path (default: stdout)");
  em->add_option("--bin-width", bin_width, "histogram bin width in meters");
  em->add_option("--match-iou", match_iou, "IoU threshold for matching");
  add_common_flags(em, opts);

  CLI::App* chk = app.add_subcommand("check", "run the self-verification suites");
  chk->add_option("--cases", cases, "base case count per suite");
  add_common_flags(chk, opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (enc->parsed()) return cmd_encode(opts, label_dir, out_dir);
    if (dec->parsed()) return cmd_decode(opts, tensor_dir, out_dir);
    if (pri->parsed()) return cmd_priors(opts, label_dir, out_path);
    if (ev->parsed()) return cmd_eval(opts, gt_dir, det_dir, out_dir);
    if (em->parsed()) return cmd_errmap(opts, gt_dir, det_dir, out_path, bin_width, match_iou);
    if (chk->parsed()) return cmd_check(opts, cases);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
