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

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cubify3d/cubify.hpp"
#include "cubify3d/errors.hpp"

namespace cubify3d {

// Tensor file layout: 16-byte header (magic "CUB3", u32 M, u32 N, u32
// reserved = 0), then 4*M*N*8 little-endian float32 values row-major over
// (quadrant, cuboid, slot, field).
inline constexpr char kTensorMagic[4] = {'C', 'U', 'B', '3'};
inline constexpr std::size_t kTensorHeaderBytes = 16;

static_assert(std::endian::native == std::endian::little,
              "tensor files are little-endian; big-endian hosts are unsupported");

inline std::vector<std::byte> tensor_to_bytes(const LabelTensor& t) {
  const std::uint32_t m = static_cast<std::uint32_t>(t.cuboids());
  const std::uint32_t n = static_cast<std::uint32_t>(t.slots());
  const std::uint32_t reserved = 0;
  std::vector<std::byte> buf(kTensorHeaderBytes + t.size() * sizeof(float));
  std::memcpy(buf.data(), kTensorMagic, 4);
  std::memcpy(buf.data() + 4, &m, 4);
  std::memcpy(buf.data() + 8, &n, 4);
  std::memcpy(buf.data() + 12, &reserved, 4);
  float* out = reinterpret_cast<float*>(buf.data() + kTensorHeaderBytes);
  for (double v : t.values()) *out++ = static_cast<float>(v);
  return buf;
}

inline LabelTensor tensor_from_bytes(const std::byte* data, std::size_t size,
                                     const std::string& origin = "<memory>") {
  if (size < kTensorHeaderBytes) {
    throw TensorFormatError(origin + ": truncated header (" + std::to_string(size) + " bytes)");
  }
  if (std::memcmp(data, kTensorMagic, 4) != 0) {
    throw TensorFormatError(origin + ": bad magic, not a CUB3 tensor");
  }
  std::uint32_t m = 0, n = 0;
  std::memcpy(&m, data + 4, 4);
  std::memcpy(&n, data + 8, 4);
  if (m == 0 || n == 0 || m > 1u << 16 || n > 1u << 16) {
    throw TensorFormatError(origin + ": implausible shape M=" + std::to_string(m) +
                            " N=" + std::to_string(n));
  }
  LabelTensor t(static_cast<int>(m), static_cast<int>(n));
  const std::size_t expected = kTensorHeaderBytes + t.size() * sizeof(float);
  if (size != expected) {
    throw TensorFormatError(origin + ": payload size " + std::to_string(size) + ", expected " +
                            std::to_string(expected));
  }
  const float* in = reinterpret_cast<const float*>(data + kTensorHeaderBytes);
  for (double& v : t.values()) v = static_cast<double>(*in++);
  return t;
}

// Writes through a temp file and renames, so readers never see partial files.
inline void save_tensor(const std::filesystem::path& path, const LabelTensor& t) {
  const auto buf = tensor_to_bytes(t);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw TensorFormatError("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw TensorFormatError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline LabelTensor load_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TensorFormatError("cannot open " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return tensor_from_bytes(reinterpret_cast<const std::byte*>(buf.data()), buf.size(),
                           path.filename().string());
}

// JSON mirror of the binary format, for debugging and diffing.
inline nlohmann::json tensor_to_json(const LabelTensor& t) {
  nlohmann::json j;
  j["magic"] = "CUB3";
  j["cuboids"] = t.cuboids();
  j["slots"] = t.slots();
  j["values"] = std::vector<double>(t.values().begin(), t.values().end());
  return j;
}

inline LabelTensor tensor_from_json(const nlohmann::json& j) {
  if (j.value("magic", "") != std::string("CUB3")) {
    throw TensorFormatError("tensor JSON: bad or missing magic");
  }
  LabelTensor t(j.at("cuboids").get<int>(), j.at("slots").get<int>());
  const auto values = j.at("values").get<std::vector<double>>();
  if (values.size() != t.size()) {
    throw TensorFormatError("tensor JSON: value count " + std::to_string(values.size()) +
                            ", expected " + std::to_string(t.size()));
  }
  std::copy(values.begin(), values.end(), t.values().begin());
  return t;
}

}  // namespace cubify3d
