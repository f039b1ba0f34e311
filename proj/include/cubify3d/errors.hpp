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

#include <stdexcept>
#include <string>

namespace cubify3d {

// A box corner lies at or behind the image plane (z <= 0).
class BehindCameraError : public std::runtime_error {
 public:
  explicit BehindCameraError(const std::string& what) : std::runtime_error(what) {}
};

// An object center falls outside the configured region of interest.
class OutOfRoiError : public std::runtime_error {
 public:
  explicit OutOfRoiError(const std::string& what) : std::runtime_error(what) {}
};

class ShapeMismatchError : public std::runtime_error {
 public:
  explicit ShapeMismatchError(const std::string& what) : std::runtime_error(what) {}
};

class NegativeDimensionError : public std::runtime_error {
 public:
  explicit NegativeDimensionError(const std::string& what) : std::runtime_error(what) {}
};

// A gradient check was requested at a point where some clamp, sign switch,
// or log floor is active, so central differences are meaningless there.
class BoundaryPointError : public std::runtime_error {
 public:
  explicit BoundaryPointError(const std::string& what) : std::runtime_error(what) {}
};

// Strict label parsing failure; carries the 1-based line number.
class MalformedLineError : public std::runtime_error {
 public:
  MalformedLineError(int line, const std::string& reason)
      : std::runtime_error("line " + std::to_string(line) + ": " + reason),
        line_number(line),
        reason(reason) {}
  int line_number;
  std::string reason;
};

class MissingP2Error : public std::runtime_error {
 public:
  explicit MissingP2Error(const std::string& what) : std::runtime_error(what) {}
};

// Corrupt or truncated tensor file.
class TensorFormatError : public std::runtime_error {
 public:
  explicit TensorFormatError(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cubify3d
