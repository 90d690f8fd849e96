// Copyright 2026 The tprnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <sstream>

#include "gtest/gtest.h"
#include "oracles.h"
#include "tprnn/checkpoint.h"
#include "tprnn/errors.h"

namespace tprnn {
namespace {

std::string Serialize(const ParamSet& theta) {
  std::ostringstream out(std::ios::binary);
  WriteCheckpoint(theta, out);
  return out.str();
}

TEST(CheckpointTest, RoundTripIsBitExact) {
  for (CellKind cell : {CellKind::kElman, CellKind::kGru}) {
    for (bool bias : {true, false}) {
      ParamSet theta = testing::RandomParams(cell, {11, 5, 7}, 3, 1.0, bias);
      theta.tensor(0)[0] = std::numeric_limits<double>::denorm_min();
      theta.tensor(0)[1] = -0.0;
      std::istringstream in(Serialize(theta), std::ios::binary);
      const ParamSet back = ReadCheckpoint(in);
      EXPECT_EQ(back, theta);
      EXPECT_TRUE(std::signbit(back.tensor(0)[1]));
      EXPECT_EQ(Serialize(back), Serialize(theta));
    }
  }
}

TEST(CheckpointTest, HeaderLayout) {
  const ParamSet theta(CellKind::kGru, {3, 2, 4});
  const std::string bytes = Serialize(theta);
  ASSERT_GT(bytes.size(), 41u);
  EXPECT_EQ(bytes.substr(0, 8), "TPRNNCKP");
  std::uint32_t version = 0, cell = 0;
  std::uint64_t v = 0, din = 0, dh = 0;
  std::memcpy(&version, bytes.data() + 8, 4);
  std::memcpy(&cell, bytes.data() + 12, 4);
  std::memcpy(&v, bytes.data() + 16, 8);
  std::memcpy(&din, bytes.data() + 24, 8);
  std::memcpy(&dh, bytes.data() + 32, 8);
  EXPECT_EQ(version, kCheckpointVersion);
  EXPECT_EQ(cell, 1u);
  EXPECT_EQ(v, 3u);
  EXPECT_EQ(din, 2u);
  EXPECT_EQ(dh, 4u);
  EXPECT_EQ(bytes[40], 1);  // use_bias
}

TEST(CheckpointTest, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "tprnn_ckpt_test.bin";
  const ParamSet theta = testing::RandomParams(CellKind::kElman, {4, 3, 2}, 8);
  SaveCheckpoint(theta, path);
  EXPECT_EQ(LoadCheckpoint(path), theta);
  std::filesystem::remove(path);
  EXPECT_THROW(LoadCheckpoint(path), FormatError);
}

TEST(CheckpointTest, CorruptInputsAreRejected) {
  const std::string good = Serialize(ParamSet(CellKind::kElman, {3, 2, 2}));
  {
    std::string bad = good;
    bad[0] = 'X';
    std::istringstream in(bad, std::ios::binary);
    EXPECT_THROW(ReadCheckpoint(in), FormatError);
  }
  {
    std::istringstream in(good.substr(0, good.size() - 3), std::ios::binary);
    EXPECT_THROW(ReadCheckpoint(in), FormatError);
  }
  {
    std::string bad = good;
    bad[8] = 9;  // version
    std::istringstream in(bad, std::ios::binary);
    EXPECT_THROW(ReadCheckpoint(in), FormatError);
  }
}

}  // namespace
}  // namespace tprnn
