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

// CIMT interchange tensors.
//
//   offset  size       field
//   0       4          magic "CIMT"
//   4       2          version (u16, currently 1)
//   6       1          dtype   (0 = u8, 1 = f32)
//   7       1          rank    (0..8)
//   8       8 * rank   dims    (u64 each)
//   ...                payload, row-major, product(dims) elements
//
// All integers and floats are little-endian.

#ifndef CIMLEAK_TENSOR_FILE_HPP_
#define CIMLEAK_TENSOR_FILE_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "cimleak/device_model.hpp"
#include "cimleak/matrix.hpp"
#include "cimleak/power_trace.hpp"

namespace cimleak::io {

enum class DType : std::uint8_t { kU8 = 0, kF32 = 1 };

inline constexpr std::uint16_t kTensorVersion = 1;
inline constexpr std::size_t kMaxTensorRank = 8;

class Tensor {
 public:
  Tensor() = default;
  Tensor(std::vector<std::uint64_t> dims, std::vector<std::uint8_t> values);
  Tensor(std::vector<std::uint64_t> dims, std::vector<float> values);

  DType dtype() const {
    return std::holds_alternative<std::vector<std::uint8_t>>(data_) ? DType::kU8
                                                                    : DType::kF32;
  }
  const std::vector<std::uint64_t>& dims() const { return dims_; }
  std::size_t rank() const { return dims_.size(); }
  std::uint64_t element_count() const;

  // Throw FormatError on dtype mismatch.
  std::span<const std::uint8_t> u8() const;
  std::span<const float> f32() const;

  bool operator==(const Tensor&) const = default;

 private:
  std::vector<std::uint64_t> dims_;
  std::variant<std::vector<std::uint8_t>, std::vector<float>> data_;
};

std::vector<char> encode_tensor(const Tensor& t);
Tensor decode_tensor(std::span<const char> bytes);

void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

// Conversions for the tensors the pipeline exchanges.
Tensor to_tensor(const Matrix<double>& m);         // f32 [H, W]
Tensor to_tensor(const Matrix<std::uint8_t>& m);   // u8 [H, W]
Matrix<double> matrix_from_tensor(const Tensor& t);        // rank-2 f32
Matrix<std::uint8_t> u8_matrix_from_tensor(const Tensor& t);  // rank-2 u8

// Record grids as f32 [H, W, 2, 8]: plane 0 the per-bit array power, plane 1
// the per-bit ADC energy.
Tensor phases_to_tensor(const sim::RecordGrid& grid);
sim::PhaseGrid phases_from_tensor(const Tensor& t);

// Weight files: f32 [C_out, C_in, K, K].
device::RealWeights weights_from_tensor(const Tensor& t);

}  // namespace cimleak::io

#endif  // CIMLEAK_TENSOR_FILE_HPP_
