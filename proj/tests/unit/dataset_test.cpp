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

#include "cimleak/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "cimleak/errors.hpp"
#include "cimleak/tensor_file.hpp"
#include "oracles/temp_dir.hpp"

namespace cimleak::io {
namespace {

std::vector<ProcessedSample> make_samples(std::size_t images, std::vector<double> levels,
                                          std::size_t h = 4, std::size_t w = 5) {
  std::vector<ProcessedSample> out;
  for (std::size_t i = 0; i < images; ++i)
    for (double l : levels) {
      ProcessedSample s;
      s.image_id = "img_" + std::to_string(i);
      s.noise_level = l;
      s.features.array_pf = Matrix<double>(h, w, 1.0 + static_cast<double>(i) + l);
      s.features.adc_pf = Matrix<double>(h, w, 2.0 + static_cast<double>(i) - l);
      s.ground_truth = Matrix<std::uint8_t>(h, w, static_cast<std::uint8_t>(i));
      out.push_back(std::move(s));
    }
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

TEST(SplitCounts, FloorThenLargestRemainder) {
  EXPECT_EQ(split_counts(10, {}), (std::array<std::size_t, 3>{8, 1, 1}));
  EXPECT_EQ(split_counts(3143, {}), (std::array<std::size_t, 3>{2515, 314, 314}));
  EXPECT_EQ(split_counts(7, {0.5, 0.25, 0.25}), (std::array<std::size_t, 3>{3, 2, 2}));
  EXPECT_EQ(split_counts(10, {0.7, 0.2, 0.1}), (std::array<std::size_t, 3>{7, 2, 1}));
  EXPECT_EQ(split_counts(1, {}), (std::array<std::size_t, 3>{1, 0, 0}));
  EXPECT_EQ(split_counts(0, {}), (std::array<std::size_t, 3>{0, 0, 0}));
  for (std::size_t n = 0; n < 200; ++n) {
    const auto c = split_counts(n, {0.6, 0.3, 0.1});
    EXPECT_EQ(c[0] + c[1] + c[2], n);
  }
}

TEST(SplitRatios, MustSumToOne) {
  EXPECT_THROW(split_counts(10, {0.8, 0.1, 0.2}), ConfigError);
  EXPECT_THROW(split_counts(10, {1.1, -0.05, -0.05}), ConfigError);
  EXPECT_THROW(export_pairs(make_samples(2, {0.0}), {0.5, 0.5, 0.5}, 7,
                            std::filesystem::temp_directory_path()),
               ConfigError);
}

TEST(AssignSplits, SeededPartition) {
  const auto a = assign_splits(100, {}, 7);
  EXPECT_EQ(a, assign_splits(100, {}, 7));
  EXPECT_NE(a, assign_splits(100, {}, 8));
  std::array<int, 3> n{};
  for (auto s : a) ++n[static_cast<int>(s)];
  EXPECT_EQ(n, (std::array<int, 3>{80, 10, 10}));
}

TEST(SplitNames, Roundtrip) {
  for (auto s : {Split::kTrain, Split::kVal, Split::kTest}) EXPECT_EQ(parse_split(split_name(s)), s);
  EXPECT_THROW(parse_split("holdout"), FormatError);
}

TEST(SampleId, Format) {
  EXPECT_EQ(sample_id("scan_017", 0.05), "scan_017_n0.05");
  EXPECT_EQ(sample_id("a", 0.0), "a_n0");
  EXPECT_EQ(sample_id("a", 0.2), "a_n0.2");
}

TEST(ExportPairs, TenImagesEightOneOne) {
  testing_support::TempDir dir;
  const auto m = export_pairs(make_samples(10, {0.0}), {}, 7, dir.path());
  std::array<int, 3> n{};
  for (const auto& s : m.samples) ++n[static_cast<int>(s.split)];
  EXPECT_EQ(n, (std::array<int, 3>{8, 1, 1}));
}

TEST(ExportPairs, WritesTensorsAndManifest) {
  testing_support::TempDir dir;
  const auto samples = make_samples(3, {0.0, 0.1});
  const auto m = export_pairs(samples, {}, 7, dir.path(), 4);
  ASSERT_EQ(m.samples.size(), 6u);
  EXPECT_EQ(m.rows, 4u);
  EXPECT_EQ(m.cols, 5u);
  // tensors hold float32
  auto as_f32 = [](Matrix<double> x) {
    for (auto& v : x.data()) v = static_cast<float>(v);
    return x;
  };
  for (const auto& s : samples) {
    const auto it = std::find_if(m.samples.begin(), m.samples.end(), [&](const AttackSample& a) {
      return a.id == sample_id(s.image_id, s.noise_level);
    });
    ASSERT_NE(it, m.samples.end());
    EXPECT_EQ(matrix_from_tensor(read_tensor(dir.path() / it->array_pf)),
              as_f32(s.features.array_pf));
    EXPECT_EQ(matrix_from_tensor(read_tensor(dir.path() / it->adc_pf)),
              as_f32(s.features.adc_pf));
    EXPECT_EQ(u8_matrix_from_tensor(read_tensor(dir.path() / it->ground_truth)),
              s.ground_truth);
  }
  EXPECT_EQ(read_manifest(dir / "manifest.json"), m);
}

TEST(ExportPairs, NoiseVariantsShareTheirImageSplit) {
  testing_support::TempDir dir;
  const auto m = export_pairs(make_samples(40, {0.0, 0.05, 0.1, 0.15, 0.2}), {}, 3, dir.path());
  std::map<std::string, Split> by_image;
  std::set<std::string> ids;
  for (const auto& s : m.samples) {
    EXPECT_TRUE(ids.insert(s.id).second);
    auto [it, fresh] = by_image.emplace(s.image_id, s.split);
    if (!fresh) { EXPECT_EQ(it->second, s.split) << s.id; }
  }
  EXPECT_EQ(by_image.size(), 40u);
}

TEST(ExportPairs, ReproducibleManifestBytes) {
  testing_support::TempDir a, b;
  const auto samples = make_samples(12, {0.0, 0.2});
  export_pairs(samples, {}, 7, a.path(), 1);
  export_pairs(samples, {}, 7, b.path(), 8);
  EXPECT_EQ(slurp(a / "manifest.json"), slurp(b / "manifest.json"));
  for (const auto& e : std::filesystem::directory_iterator(a / "tensors"))
    EXPECT_EQ(slurp(e.path()), slurp(b.path() / "tensors" / e.path().filename()));
}

TEST(ExportPairs, ShapeMismatchAndDuplicates) {
  testing_support::TempDir dir;
  auto samples = make_samples(2, {0.0});
  samples[1].features.adc_pf = Matrix<double>(3, 3);
  EXPECT_THROW(export_pairs(samples, {}, 7, dir.path()), ShapeError);
  auto dup = make_samples(1, {0.1});
  dup.push_back(dup[0]);
  EXPECT_THROW(export_pairs(dup, {}, 7, dir.path()), ConfigError);
  EXPECT_THROW(export_pairs({}, {}, 7, dir.path()), ConfigError);
}

TEST(ExportPairs, IoFailureNamesPath) {
  testing_support::TempDir dir;
  std::ofstream(dir / "blocker") << "x";
  try {
    export_pairs(make_samples(1, {0.0}), {}, 7, dir / "blocker");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("blocker"), std::string::npos);
  }
}

TEST(Manifest, JsonSchema) {
  Manifest m;
  m.seed = 42;
  m.rows = 256;
  m.cols = 256;
  m.samples.push_back({"a_n0", "a", "tensors/a_n0.array_pf.cimt", "tensors/a_n0.adc_pf.cimt",
                       "tensors/a.truth.cimt", 0.0, Split::kVal});
  const auto j = manifest_to_json(m);
  EXPECT_EQ(j.at("format"), "cimleak-manifest");
  EXPECT_EQ(j.at("version"), 1);
  EXPECT_EQ(j.at("shape"), nlohmann::json::array({256, 256}));
  EXPECT_EQ(j.at("samples").at(0).at("split"), "val");
  EXPECT_EQ(manifest_from_json(j), m);

  auto bad = j;
  bad["format"] = "other";
  EXPECT_THROW(manifest_from_json(bad), FormatError);
  auto missing = j;
  missing["samples"][0].erase("adc_pf");
  EXPECT_THROW(manifest_from_json(missing), FormatError);
  auto bad_split = j;
  bad_split["samples"][0]["split"] = "dev";
  EXPECT_THROW(manifest_from_json(bad_split), FormatError);
}

}  // namespace
}  // namespace cimleak::io
