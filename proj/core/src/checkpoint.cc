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

#include "tprnn/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "tprnn/errors.h"

namespace tprnn {
namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <typename T>
T ToLittle(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <typename T>
void Put(std::ostream& out, T v) {
  v = ToLittle(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T Get(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FormatError("checkpoint: unexpected end of data");
  return ToLittle(v);
}

void PutDouble(std::ostream& out, double d) { Put(out, std::bit_cast<std::uint64_t>(d)); }
double GetDouble(std::istream& in) { return std::bit_cast<double>(Get<std::uint64_t>(in)); }

}  // namespace

void WriteCheckpoint(const ParamSet& theta, std::ostream& out) {
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  Put<std::uint32_t>(out, kCheckpointVersion);
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(theta.cell()));
  Put<std::uint64_t>(out, theta.dims().vocab);
  Put<std::uint64_t>(out, theta.dims().input);
  Put<std::uint64_t>(out, theta.dims().hidden);
  Put<std::uint8_t>(out, theta.use_bias() ? 1 : 0);
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(theta.num_tensors()));
  for (std::size_t i = 0; i < theta.num_tensors(); ++i) {
    const std::string& name = theta.name(i);
    const Tensor& t = theta.tensor(i);
    Put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    Put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    Put<std::uint64_t>(out, t.rows());
    if (t.rank() == 2) Put<std::uint64_t>(out, t.cols());
    for (std::size_t k = 0; k < t.size(); ++k) PutDouble(out, t[k]);
  }
  if (!out) throw FormatError("checkpoint: write failed");
}

ParamSet ReadCheckpoint(std::istream& in) {
  char magic[sizeof(kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw FormatError("checkpoint: bad magic");
  }
  const auto version = Get<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto cell_raw = Get<std::uint32_t>(in);
  if (cell_raw > 1) throw FormatError("checkpoint: unknown cell kind");
  ModelDims dims;
  dims.vocab = Get<std::uint64_t>(in);
  dims.input = Get<std::uint64_t>(in);
  dims.hidden = Get<std::uint64_t>(in);
  const bool use_bias = Get<std::uint8_t>(in) != 0;
  ParamSet theta(static_cast<CellKind>(cell_raw), dims, use_bias);

  const auto count = Get<std::uint32_t>(in);
  if (count != theta.num_tensors()) {
    throw FormatError("checkpoint: expected " + std::to_string(theta.num_tensors()) +
                      " tensors, found " + std::to_string(count));
  }
  for (std::uint32_t n = 0; n < count; ++n) {
    const auto len = Get<std::uint32_t>(in);
    if (len > 4096) throw FormatError("checkpoint: implausible tensor name length");
    std::string name(len, '\0');
    in.read(name.data(), len);
    if (!in) throw FormatError("checkpoint: truncated tensor name");
    const std::size_t idx = theta.Find(name);
    if (idx == theta.num_tensors()) {
      throw FormatError("checkpoint: unexpected tensor '" + name + "'");
    }
    Tensor& t = theta.tensor(idx);
    const auto rank = Get<std::uint32_t>(in);
    const auto rows = Get<std::uint64_t>(in);
    const std::uint64_t cols = rank == 2 ? Get<std::uint64_t>(in) : 1;
    if (static_cast<int>(rank) != t.rank() || rows != t.rows() || cols != t.cols()) {
      throw FormatError("checkpoint: tensor '" + name + "' has shape inconsistent with header");
    }
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = GetDouble(in);
  }
  return theta;
}

void SaveCheckpoint(const ParamSet& theta, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  WriteCheckpoint(theta, out);
}

ParamSet LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  return ReadCheckpoint(in);
}

}  // namespace tprnn
