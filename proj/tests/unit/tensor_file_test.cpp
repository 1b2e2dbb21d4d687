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

#include <cstring>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "cimleak/errors.hpp"
#include "oracles/temp_dir.hpp"

namespace cimleak::io {
namespace {

std::vector<std::uint64_t> dims_of_rank(std::size_t rank) {
  std::vector<std::uint64_t> d;
  for (std::size_t i = 0; i < rank; ++i) d.push_back(2 + i);
  return d;
}

std::uint64_t count(const std::vector<std::uint64_t>& d) {
  std::uint64_t n = 1;
  for (auto x : d) n *= x;
  return n;
}

TEST(Tensor, ByteLayoutMatchesHandAssembledHeader) {
  const Tensor t({2, 3}, std::vector<std::uint8_t>{1, 2, 3, 4, 5, 6});
  const auto bytes = encode_tensor(t);
  const std::vector<unsigned char> expect{
      'C', 'I', 'M', 'T', 1, 0, 0, 2,   // magic, version 1, u8, rank 2
      2, 0, 0, 0, 0, 0, 0, 0,           // dim 0
      3, 0, 0, 0, 0, 0, 0, 0,           // dim 1
      1, 2, 3, 4, 5, 6};
  ASSERT_EQ(bytes.size(), expect.size());
  for (std::size_t i = 0; i < expect.size(); ++i)
    EXPECT_EQ(static_cast<unsigned char>(bytes[i]), expect[i]) << "byte " << i;
}

TEST(Tensor, Float32PayloadIsLittleEndianIeee) {
  const Tensor t({1}, std::vector<float>{1.0f});
  const auto bytes = encode_tensor(t);
  ASSERT_EQ(bytes.size(), 8u + 8u + 4u);
  EXPECT_EQ(bytes[6], 1);
  // 1.0f = 0x3F800000
  EXPECT_EQ(static_cast<unsigned char>(bytes[16]), 0x00);
  EXPECT_EQ(static_cast<unsigned char>(bytes[17]), 0x00);
  EXPECT_EQ(static_cast<unsigned char>(bytes[18]), 0x80);
  EXPECT_EQ(static_cast<unsigned char>(bytes[19]), 0x3F);
}

TEST(Tensor, RoundtripAllRanksBothDtypes) {
  testing_support::TempDir dir;
  std::mt19937 rng(1);
  for (std::size_t rank = 0; rank <= 4; ++rank) {
    const auto dims = dims_of_rank(rank);
    std::vector<std::uint8_t> u(count(dims));
    for (auto& x : u) x = static_cast<std::uint8_t>(rng());
    std::vector<float> f(count(dims));
    for (auto& x : f) {
      const auto bits = static_cast<std::uint32_t>(rng());
      std::memcpy(&x, &bits, 4);
      if (x != x) x = -0.0f;  // keep NaN payloads out of operator==
    }
    for (const Tensor& t : {Tensor(dims, u), Tensor(dims, f)}) {
      const auto path = dir / ("r" + std::to_string(rank) + ".cimt");
      write_tensor(path, t);
      const Tensor back = read_tensor(path);
      EXPECT_EQ(back, t) << "rank " << rank;
      // bit-identical file bytes
      std::ifstream is(path, std::ios::binary);
      const std::vector<char> on_disk((std::istreambuf_iterator<char>(is)), {});
      EXPECT_EQ(on_disk, encode_tensor(t));
    }
  }
}

TEST(Tensor, RejectsMalformedBytes) {
  const auto good = encode_tensor(Tensor({2, 2}, std::vector<float>{1, 2, 3, 4}));
  auto bad_magic = good;
  bad_magic[1] = 'X';
  EXPECT_THROW(decode_tensor(bad_magic), FormatError);
  auto short_payload = good;
  short_payload.pop_back();
  EXPECT_THROW(decode_tensor(short_payload), FormatError);
  auto long_payload = good;
  long_payload.push_back(0);
  EXPECT_THROW(decode_tensor(long_payload), FormatError);
  auto bad_version = good;
  bad_version[4] = 2;
  EXPECT_THROW(decode_tensor(bad_version), FormatError);
  auto bad_dtype = good;
  bad_dtype[6] = 7;
  EXPECT_THROW(decode_tensor(bad_dtype), FormatError);
  auto bad_rank = good;
  bad_rank[7] = 9;
  EXPECT_THROW(decode_tensor(bad_rank), FormatError);
  EXPECT_THROW(decode_tensor(std::vector<char>(good.begin(), good.begin() + 12)), FormatError);
  EXPECT_THROW(decode_tensor(std::vector<char>{}), FormatError);
}

TEST(Tensor, IoErrorsCarryPath) {
  testing_support::TempDir dir;
  const auto missing = dir / "nope.cimt";
  try {
    read_tensor(missing);
    FAIL();
  } catch (const IoError& e) {
    EXPECT_EQ(e.path(), missing.string());
  }
  EXPECT_THROW(write_tensor(dir / "no/such/dir/x.cimt", Tensor({1}, std::vector<std::uint8_t>{1})),
               IoError);
}

TEST(Tensor, ConstructorChecksCount) {
  EXPECT_THROW(Tensor({2, 2}, std::vector<std::uint8_t>{1, 2, 3}), ShapeError);
  EXPECT_THROW(Tensor(std::vector<std::uint64_t>(9, 1), std::vector<std::uint8_t>{1}), ShapeError);
  const Tensor t({3}, std::vector<std::uint8_t>{1, 2, 3});
  EXPECT_THROW(t.f32(), FormatError);
}

TEST(Tensor, MatrixConversions) {
  Matrix<double> m(3, 2);
  for (std::size_t i = 0; i < 6; ++i) m.data()[i] = 0.25 * static_cast<double>(i);
  const auto t = to_tensor(m);
  EXPECT_EQ(t.dtype(), DType::kF32);
  EXPECT_EQ(t.dims(), (std::vector<std::uint64_t>{3, 2}));
  EXPECT_EQ(matrix_from_tensor(t), m);

  Matrix<std::uint8_t> u(2, 4, 9);
  EXPECT_EQ(u8_matrix_from_tensor(to_tensor(u)), u);
  EXPECT_THROW(matrix_from_tensor(to_tensor(u)), FormatError);
}

TEST(Tensor, RecordGridPhases) {
  sim::RecordGrid grid;
  grid.rows = 2;
  grid.cols = 3;
  for (std::size_t i = 0; i < 6; ++i) {
    sim::ExecRecord rec;
    rec.row = i / 3;
    rec.col = i % 3;
    for (int b = 0; b < 8; ++b) {
      rec.phases.array_power[b] = 1.5 * static_cast<double>(i + 1) + b;  // exact in float
      rec.phases.adc_energy[b] = -0.5 * static_cast<double>(i + 1) - b;
    }
    grid.records.push_back(rec);
  }
  const auto t = phases_to_tensor(grid);
  EXPECT_EQ(t.dims(), (std::vector<std::uint64_t>{2, 3, 2, 8}));
  const auto back = phases_from_tensor(decode_tensor(encode_tensor(t)));
  ASSERT_EQ(back.cells.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(back.cells[i], grid.records[i].phases);
  EXPECT_THROW(phases_from_tensor(Tensor({2, 3, 2, 7}, std::vector<float>(84))), FormatError);
}

TEST(Tensor, WeightFiles) {
  const Tensor t({4, 1, 3, 3}, std::vector<float>(36, 0.5f));
  const auto w = weights_from_tensor(t);
  EXPECT_EQ(w.shape, (device::KernelShape{4, 1, 3}));
  EXPECT_EQ(w.values.size(), 36u);
  EXPECT_THROW(weights_from_tensor(Tensor({4, 1, 3, 2}, std::vector<float>(24))), FormatError);
}

}  // namespace
}  // namespace cimleak::io
