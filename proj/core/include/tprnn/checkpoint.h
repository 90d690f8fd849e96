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

// Versioned named-tensor checkpoint container. All integers and floats are
// little-endian.
//
//   magic      8 bytes  "TPRNNCKP"
//   version    u32      (currently 1)
//   cell       u32      0 = elman, 1 = gru
//   vocab      u64
//   input      u64
//   hidden     u64
//   use_bias   u8
//   count      u32      number of tensors that follow
//   per tensor:
//     name_len u32, name bytes,
//     rank u32, rank x u64 dims,
//     prod(dims) x f64 values

#ifndef TPRNN_CHECKPOINT_H_
#define TPRNN_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "tprnn/model.h"

namespace tprnn {

inline constexpr char kCheckpointMagic[8] = {'T', 'P', 'R', 'N', 'N', 'C', 'K', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void WriteCheckpoint(const ParamSet& theta, std::ostream& out);
ParamSet ReadCheckpoint(std::istream& in);

void SaveCheckpoint(const ParamSet& theta, const std::filesystem::path& path);
ParamSet LoadCheckpoint(const std::filesystem::path& path);

}  // namespace tprnn

#endif  // TPRNN_CHECKPOINT_H_
