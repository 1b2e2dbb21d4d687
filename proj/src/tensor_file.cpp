/* Copyright 2026 The CIMLeak Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "cimleak/tensor_file.hpp"

#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "cimleak/detail/little_endian.hpp"
#include "cimleak/errors.hpp"

namespace cimleak::io {

namespace {

constexpr char kMagic[4] = {'C', 'I', 'M', 'T'};
constexpr std::size_t kFixedHeader = 8;

std::uint64_t product(const std::vector<std::uint64_t>& dims) {
  std::uint64_t n = 1;
  for (std::uint64_t d : dims) {
    if (d != 0 && n > std::numeric_limits<std::uint64_t>::max() / d)
      throw FormatError("tensor: element count overflows");
    n *= d;
  }
  return n;
}

void check_size(const std::vector<std::uint64_t>& dims, std::size_t n) {
  if (dims.size() > kMaxTensorRank) throw ShapeError("tensor: rank above 8");
  if (product(dims) != n) throw ShapeError("tensor: value count does not match dims");
}

}  // namespace

Tensor::Tensor(std::vector<std::uint64_t> dims, std::vector<std::uint8_t> values)
    : dims_(std::move(dims)), data_(std::move(values)) {
  check_size(dims_, std::get<0>(data_).size());
}

Tensor::Tensor(std::vector<std::uint64_t> dims, std::vector<float> values)
    : dims_(std::move(dims)), data_(std::move(values)) {
  check_size(dims_, std::get<1>(data_).size());
}

std::uint64_t Tensor::element_count() const { return product(dims_); }

std::span<const std::uint8_t> Tensor::u8() const {
  if (dtype() != DType::kU8) throw FormatError("tensor: expected dtype u8");
  return std::get<0>(data_);
}

std::span<const float> Tensor::f32() const {
  if (dtype() != DType::kF32) throw FormatError("tensor: expected dtype f32");
  return std::get<1>(data_);
}

std::vector<char> encode_tensor(const Tensor& t) {
  const std::size_t elem = t.dtype() == DType::kU8 ? 1 : 4;
  std::vector<char> out;
  out.reserve(kFixedHeader + 8 * t.rank() + elem * t.element_count());
  out.insert(out.end(), kMagic, kMagic + 4);
  auto append = [&out](const auto& bytes) { out.insert(out.end(), bytes.begin(), bytes.end()); };
  append(detail::to_le_bytes<std::uint16_t>(kTensorVersion));
  out.push_back(static_cast<char>(t.dtype()));
  out.push_back(static_cast<char>(t.rank()));
  for (std::uint64_t d : t.dims()) append(detail::to_le_bytes(d));
  if (t.dtype() == DType::kU8) {
    const auto v = t.u8();
    out.insert(out.end(), v.begin(), v.end());
  } else {
    for (float f : t.f32()) append(detail::to_le_bytes(f));
  }
  return out;
}

Tensor decode_tensor(std::span<const char> bytes) {
  if (bytes.size() < kFixedHeader || !std::equal(kMagic, kMagic + 4, bytes.begin()))
    throw FormatError("tensor: bad magic");
  const auto version = detail::from_le_bytes<std::uint16_t>(bytes.data() + 4);
  if (version != kTensorVersion)
    throw FormatError("tensor: unsupported version " + std::to_string(version));
  const auto dtype_byte = static_cast<std::uint8_t>(bytes[6]);
  if (dtype_byte > 1) throw FormatError("tensor: unknown dtype " + std::to_string(dtype_byte));
  const auto dtype = static_cast<DType>(dtype_byte);
  const std::size_t rank = static_cast<std::uint8_t>(bytes[7]);
  if (rank > kMaxTensorRank) throw FormatError("tensor: rank above 8");
  if (bytes.size() < kFixedHeader + 8 * rank) throw FormatError("tensor: truncated dims");

  std::vector<std::uint64_t> dims(rank);
  for (std::size_t i = 0; i < rank; ++i)
    dims[i] = detail::from_le_bytes<std::uint64_t>(bytes.data() + kFixedHeader + 8 * i);
  const std::uint64_t count = product(dims);
  const std::size_t elem = dtype == DType::kU8 ? 1 : 4;
  const std::size_t offset = kFixedHeader + 8 * rank;
  const std::uint64_t payload = bytes.size() - offset;
  if (count > std::numeric_limits<std::uint64_t>::max() / elem || payload != count * elem)
    throw FormatError("tensor: payload length " + std::to_string(payload) +
                      " does not match dims");

  const char* p = bytes.data() + offset;
  if (dtype == DType::kU8)
    return Tensor(std::move(dims), std::vector<std::uint8_t>(p, p + count));
  std::vector<float> values(count);
  for (std::uint64_t i = 0; i < count; ++i)
    values[i] = detail::from_le_bytes<float>(p + 4 * i);
  return Tensor(std::move(dims), std::move(values));
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  const std::vector<char> bytes = encode_tensor(t);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError(path.string(), "cannot open for writing");
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError(path.string(), "write failed");
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(path.string(), "cannot open for reading");
  const std::vector<char> bytes((std::istreambuf_iterator<char>(is)),
                                std::istreambuf_iterator<char>());
  try {
    return decode_tensor(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

Tensor to_tensor(const Matrix<double>& m) {
  std::vector<float> v(m.data().begin(), m.data().end());
  return Tensor({m.rows(), m.cols()}, std::move(v));
}

Tensor to_tensor(const Matrix<std::uint8_t>& m) {
  return Tensor({m.rows(), m.cols()},
                std::vector<std::uint8_t>(m.data().begin(), m.data().end()));
}

Matrix<double> matrix_from_tensor(const Tensor& t) {
  if (t.rank() != 2) throw FormatError("tensor: expected rank 2");
  const auto v = t.f32();
  Matrix<double> m(t.dims()[0], t.dims()[1]);
  std::copy(v.begin(), v.end(), m.data().begin());
  return m;
}

Matrix<std::uint8_t> u8_matrix_from_tensor(const Tensor& t) {
  if (t.rank() != 2) throw FormatError("tensor: expected rank 2");
  const auto v = t.u8();
  Matrix<std::uint8_t> m(t.dims()[0], t.dims()[1]);
  std::copy(v.begin(), v.end(), m.data().begin());
  return m;
}

Tensor phases_to_tensor(const sim::RecordGrid& grid) {
  constexpr std::size_t kBits = sim::kInputBits;
  std::vector<float> v;
  v.reserve(grid.records.size() * 2 * kBits);
  for (const auto& rec : grid.records) {
    for (double p : rec.phases.array_power) v.push_back(static_cast<float>(p));
    for (double e : rec.phases.adc_energy) v.push_back(static_cast<float>(e));
  }
  return Tensor({grid.rows, grid.cols, 2, kBits}, std::move(v));
}

sim::PhaseGrid phases_from_tensor(const Tensor& t) {
  constexpr std::size_t kBits = sim::kInputBits;
  if (t.rank() != 4 || t.dims()[2] != 2 || t.dims()[3] != kBits)
    throw FormatError("tensor: record grid must have shape [H, W, 2, 8]");
  const auto v = t.f32();
  sim::PhaseGrid grid{t.dims()[0], t.dims()[1], {}};
  grid.cells.resize(grid.rows * grid.cols);
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    for (std::size_t b = 0; b < kBits; ++b) {
      grid.cells[i].array_power[b] = v[i * 2 * kBits + b];
      grid.cells[i].adc_energy[b] = v[i * 2 * kBits + kBits + b];
    }
  }
  return grid;
}

device::RealWeights weights_from_tensor(const Tensor& t) {
  if (t.rank() != 4 || t.dims()[2] != t.dims()[3])
    throw FormatError("tensor: weights must have shape [C_out, C_in, K, K]");
  const auto v = t.f32();
  device::RealWeights w;
  w.shape = {t.dims()[0], t.dims()[1], t.dims()[2]};
  w.values.assign(v.begin(), v.end());
  return w;
}

}  // namespace cimleak::io
