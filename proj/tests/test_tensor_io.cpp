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

#include <cstring>
#include <filesystem>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "cubify3d/selfcheck.hpp"
#include "cubify3d/tensor_io.hpp"

using namespace cubify3d;

namespace {

LabelTensor random_tensor(std::mt19937_64& rng, int m, int n) {
  LabelTensor t(m, n);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : t.values()) v = u(rng);
  return t;
}

}  // namespace

TEST_CASE("header is 16 bytes with magic, M, N") {
  const LabelTensor t(5, 10);
  const auto buf = tensor_to_bytes(t);
  REQUIRE(buf.size() == 16 + 4ull * 5 * 10 * 8 * sizeof(float));
  CHECK(std::memcmp(buf.data(), "CUB3", 4) == 0);
  std::uint32_t m = 0, n = 0, reserved = 1;
  std::memcpy(&m, buf.data() + 4, 4);
  std::memcpy(&n, buf.data() + 8, 4);
  std::memcpy(&reserved, buf.data() + 12, 4);
  CHECK(m == 5);
  CHECK(n == 10);
  CHECK(reserved == 0);
}

TEST_CASE("bytes roundtrip through parse and re-serialize identically") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const LabelTensor t = random_tensor(rng, 1 + i % 6, 1 + (i * 7) % 12);
    const auto bytes = tensor_to_bytes(t);
    const LabelTensor back = tensor_from_bytes(bytes.data(), bytes.size());
    CHECK(tensor_to_bytes(back) == bytes);
  }
}

TEST_CASE("file save/load preserves values at float32 precision") {
  std::mt19937_64 rng(5);
  const LabelTensor t = random_tensor(rng, 5, 10);
  const auto path = std::filesystem::temp_directory_path() / "cubify3d_test_tensor.cub3";
  save_tensor(path, t);
  const LabelTensor back = load_tensor(path);
  REQUIRE(back.cuboids() == 5);
  REQUIRE(back.slots() == 10);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(std::fabs(back.values()[i] - t.values()[i]) <= 1e-7);
  }
  std::filesystem::remove(path);
}

TEST_CASE("corrupt tensors are rejected with a reason") {
  const LabelTensor t(2, 3);
  auto bytes = tensor_to_bytes(t);

  SECTION("bad magic") {
    bytes[0] = std::byte{'X'};
    CHECK_THROWS_AS(tensor_from_bytes(bytes.data(), bytes.size()), TensorFormatError);
  }
  SECTION("truncated header") {
    CHECK_THROWS_AS(tensor_from_bytes(bytes.data(), 7), TensorFormatError);
  }
  SECTION("short payload") {
    CHECK_THROWS_AS(tensor_from_bytes(bytes.data(), bytes.size() - 5), TensorFormatError);
  }
  SECTION("zero shape") {
    std::uint32_t zero = 0;
    std::memcpy(bytes.data() + 4, &zero, 4);
    CHECK_THROWS_AS(tensor_from_bytes(bytes.data(), bytes.size()), TensorFormatError);
  }
}

TEST_CASE("JSON mirror roundtrips exactly") {
  std::mt19937_64 rng(7);
  const LabelTensor t = random_tensor(rng, 3, 4);
  const LabelTensor back = tensor_from_json(tensor_to_json(t));
  REQUIRE(back.size() == t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(back.values()[i] == t.values()[i]);
  }
  CHECK_THROWS_AS(tensor_from_json(nlohmann::json{{"cuboids", 1}}), TensorFormatError);
}
