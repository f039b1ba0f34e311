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

// Hand-built KITTI label corpus: every default class, DontCare sentinels,
// both 15-field (ground truth) and 16-field (scored) lines, all canonical
// 2-decimal formatting.

namespace fixture {

inline constexpr const char* kLabels =
    "Car 0.00 0 1.85 387.63 181.54 423.81 203.12 1.67 1.87 3.69 -16.53 2.39 58.49 1.57\n"
    "Van 0.02 0 -0.75 600.00 150.00 700.00 250.00 2.18 1.91 5.08 4.41 1.85 20.40 -0.55\n"
    "Truck 0.00 0 -1.57 520.10 120.88 700.25 260.00 3.44 2.63 10.18 2.30 1.59 35.20 -1.55\n"
    "Pedestrian 0.00 0 0.29 423.17 173.67 433.17 224.03 1.89 0.48 1.20 -5.45 1.66 22.10 0.07\n"
    "Person_sitting 0.00 1 1.12 100.00 160.00 140.00 220.00 1.30 0.65 0.80 -8.20 1.40 12.30 1.05\n"
    "Cyclist 0.00 3 -1.65 676.60 163.95 688.98 193.93 1.86 0.60 2.02 4.59 1.32 45.84 -1.55\n"
    "Tram 0.10 0 2.55 300.00 140.00 500.00 240.00 3.61 2.60 14.66 -7.61 2.26 28.91 2.37\n"
    "Misc 0.00 2 -0.30 700.00 170.00 760.00 210.00 1.50 1.40 2.50 9.10 1.72 40.00 -0.25\n"
    "DontCare -1.00 -1 -10.00 559.62 175.83 575.40 183.15 -1.00 -1.00 -1.00 -1000.00 -1000.00 "
    "-1000.00 -10.00\n"
    "Car 0.50 1 -2.10 0.00 190.00 85.00 250.00 1.44 1.62 3.23 -12.54 2.21 15.02 -2.46\n"
    "Car 0.00 0 1.99 505.25 168.37 575.92 209.18 1.52 1.61 3.85 2.39 1.65 28.52 2.07 0.97\n"
    "Pedestrian 0.15 2 -0.81 111.11 140.00 150.55 270.70 1.75 0.55 0.90 -6.30 1.55 9.80 -0.70 "
    "0.42\n"
    "Cyclist 0.00 0 0.88 430.00 150.00 470.00 210.00 1.70 0.58 1.90 -1.20 1.48 18.60 0.95 0.88\n"
    "Van 0.00 1 -1.20 650.00 160.00 720.00 230.00 2.25 1.95 5.50 7.80 1.90 33.40 -1.10 0.55\n"
    "Truck 0.30 2 2.20 200.00 100.00 380.00 230.00 3.20 2.55 9.75 -10.20 1.80 50.10 2.10 0.33\n"
    "Misc 0.00 0 0.00 640.00 175.00 680.00 205.00 1.60 1.30 2.40 3.30 1.68 26.70 0.05 0.61\n"
    "Tram 0.00 0 -2.90 310.00 130.00 620.00 250.00 3.50 2.58 16.09 -2.50 2.20 60.00 -2.80 0.74\n"
    "Person_sitting 0.05 0 0.95 220.00 165.00 260.00 215.00 1.25 0.60 0.85 -9.10 1.38 14.70 "
    "0.90 0.28\n"
    "Car 0.00 0 -0.20 851.00 180.00 950.00 230.00 1.47 1.59 3.69 18.00 1.70 47.00 -0.15\n"
    "DontCare -1.00 -1 -10.00 100.00 155.00 180.00 190.00 -1.00 -1.00 -1.00 -1000.00 -1000.00 "
    "-1000.00 -10.00\n"
    "Cyclist 0.20 1 1.30 560.00 150.00 600.00 215.00 1.80 0.62 1.95 6.10 1.50 24.20 1.25\n";

inline constexpr int kLabelCount = 21;

}  // namespace fixture
