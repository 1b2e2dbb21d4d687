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

// GAN-ready dataset export: per-sample tensors plus a JSON manifest with a
// seeded train/val/test split. The split is drawn over source images, so every
// noise variant of one image lands in the same split.

#ifndef CIMLEAK_DATASET_HPP_
#define CIMLEAK_DATASET_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cimleak/matrix.hpp"
#include "cimleak/trace_pipeline.hpp"

namespace cimleak::io {

enum class Split : std::uint8_t { kTrain, kVal, kTest };

const char* split_name(Split s);
Split parse_split(const std::string& name);

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;

  // ConfigError unless all ratios are >= 0 and sum to 1 (within 1e-9).
  void validate() const;
  bool operator==(const SplitRatios&) const = default;
};

// Floor each ratio times n, then hand the remaining items to the splits with
// the largest fractional parts (ties go train, val, test).
std::array<std::size_t, 3> split_counts(std::size_t n, const SplitRatios& ratios);

// Split tag per item: a seeded Fisher-Yates permutation is cut into
// consecutive train/val/test runs of the split_counts sizes.
std::vector<Split> assign_splits(std::size_t n, const SplitRatios& ratios,
                                 std::uint64_t seed);

struct ProcessedSample {
  std::string image_id;
  double noise_level = 0.0;
  pipeline::PowerFeatureMatrices features;
  Matrix<std::uint8_t> ground_truth;
};

struct AttackSample {
  std::string id;
  std::string image_id;
  std::string array_pf;      // paths relative to the manifest directory
  std::string adc_pf;
  std::string ground_truth;
  double noise_level = 0.0;
  Split split = Split::kTrain;
  bool operator==(const AttackSample&) const = default;
};

struct Manifest {
  static constexpr int kVersion = 1;
  std::uint64_t seed = 0;
  SplitRatios ratios;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<AttackSample> samples;
  bool operator==(const Manifest&) const = default;
};

nlohmann::json manifest_to_json(const Manifest& m);
Manifest manifest_from_json(const nlohmann::json& j);
void write_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& path);

// Sample id for one noise variant, e.g. "scan_017_n0.05".
std::string sample_id(const std::string& image_id, double noise_level);

// Writes tensors/<id>.array_pf.cimt, tensors/<id>.adc_pf.cimt,
// tensors/<image_id>.truth.cimt and manifest.json under out_dir.
Manifest export_pairs(const std::vector<ProcessedSample>& samples,
                      const SplitRatios& ratios, std::uint64_t seed,
                      const std::filesystem::path& out_dir,
                      std::size_t workers = 1);

}  // namespace cimleak::io

#endif  // CIMLEAK_DATASET_HPP_
