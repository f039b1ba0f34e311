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

#include "cubify3d/augment.hpp"
#include "cubify3d/config.hpp"
#include "cubify3d/cubify.hpp"
#include "cubify3d/dataset_io.hpp"
#include "cubify3d/errors.hpp"
#include "cubify3d/eval.hpp"
#include "cubify3d/geometry.hpp"
#include "cubify3d/grid.hpp"
#include "cubify3d/iou.hpp"
#include "cubify3d/losses.hpp"
#include "cubify3d/matching.hpp"
#include "cubify3d/parallel.hpp"
#include "cubify3d/selfcheck.hpp"
#include "cubify3d/tensor_io.hpp"
