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
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

#include "cimleak/detail/parallel.hpp"
#include "cimleak/errors.hpp"
#include "cimleak/tensor_file.hpp"

namespace cimleak::io {

namespace fs = std::filesystem;

const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw FormatError("unknown split tag '" + name + "'");
}

void SplitRatios::validate() const {
  if (!(train >= 0.0) || !(val >= 0.0) || !(test >= 0.0))
    throw ConfigError("split ratios must be >= 0");
  if (std::abs(train + val + test - 1.0) > 1e-9)
    throw ConfigError("split ratios must sum to 1");
}

std::array<std::size_t, 3> split_counts(std::size_t n, const SplitRatios& ratios) {
  ratios.validate();
  const std::array<double, 3> r{ratios.train, ratios.val, ratios.test};
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> frac{};
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    // The slack absorbs products such as 0.7 * 10 landing just under 7.
    const double exact = r[k] * static_cast<double>(n);
    const double whole = std::floor(exact + 1e-9);
    counts[k] = static_cast<std::size_t>(whole);
    frac[k] = std::max(0.0, exact - whole);
    assigned += counts[k];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t i = 0; assigned < n; i = (i + 1) % 3, ++assigned) ++counts[order[i]];
  return counts;
}

std::vector<Split> assign_splits(std::size_t n, const SplitRatios& ratios,
                                 std::uint64_t seed) {
  const auto counts = split_counts(n, ratios);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng() % i]);

  std::vector<Split> splits(n, Split::kTrain);
  std::size_t k = 0;
  for (std::size_t i = 0; i < counts[0]; ++i) splits[perm[k++]] = Split::kTrain;
  for (std::size_t i = 0; i < counts[1]; ++i) splits[perm[k++]] = Split::kVal;
  for (std::size_t i = 0; i < counts[2]; ++i) splits[perm[k++]] = Split::kTest;
  return splits;
}

nlohmann::json manifest_to_json(const Manifest& m) {
  nlohmann::json j;
  j["format"] = "cimleak-manifest";
  j["version"] = Manifest::kVersion;
  j["seed"] = m.seed;
  j["ratios"] = {{"train", m.ratios.train}, {"val", m.ratios.val}, {"test", m.ratios.test}};
  j["shape"] = {m.rows, m.cols};
  auto samples = nlohmann::json::array();
  for (const auto& s : m.samples) {
    samples.push_back({{"id", s.id},
                       {"image_id", s.image_id},
                       {"array_pf", s.array_pf},
                       {"adc_pf", s.adc_pf},
                       {"ground_truth", s.ground_truth},
                       {"noise_level", s.noise_level},
                       {"split", split_name(s.split)}});
  }
  j["samples"] = std::move(samples);
  return j;
}

Manifest manifest_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "cimleak-manifest" || j.at("version") != Manifest::kVersion)
      throw FormatError("manifest: unsupported format or version");
    Manifest m;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.ratios = {j.at("ratios").at("train").get<double>(), j.at("ratios").at("val").get<double>(),
                j.at("ratios").at("test").get<double>()};
    m.rows = j.at("shape").at(0).get<std::size_t>();
    m.cols = j.at("shape").at(1).get<std::size_t>();
    for (const auto& s : j.at("samples")) {
      m.samples.push_back({s.at("id").get<std::string>(), s.at("image_id").get<std::string>(),
                           s.at("array_pf").get<std::string>(), s.at("adc_pf").get<std::string>(),
                           s.at("ground_truth").get<std::string>(),
                           s.at("noise_level").get<double>(),
                           parse_split(s.at("split").get<std::string>())});
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
}

void write_manifest(const fs::path& path, const Manifest& m) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError(path.string(), "cannot open for writing");
  os << manifest_to_json(m).dump(2) << '\n';
  if (!os) throw IoError(path.string(), "write failed");
}

Manifest read_manifest(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError(path.string(), "cannot open for reading");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return manifest_from_json(j);
}

std::string sample_id(const std::string& image_id, double noise_level) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "_n%.4g", noise_level);
  return image_id + buf;
}

Manifest export_pairs(const std::vector<ProcessedSample>& samples,
                      const SplitRatios& ratios, std::uint64_t seed,
                      const fs::path& out_dir, std::size_t workers) {
  ratios.validate();
  if (samples.empty()) throw ConfigError("export: no samples");
  const std::size_t rows = samples.front().ground_truth.rows();
  const std::size_t cols = samples.front().ground_truth.cols();
  for (const auto& s : samples) {
    if (s.ground_truth.rows() != rows || s.ground_truth.cols() != cols ||
        s.features.array_pf.rows() != rows || s.features.array_pf.cols() != cols ||
        s.features.adc_pf.rows() != rows || s.features.adc_pf.cols() != cols)
      throw ShapeError("export: sample '" + s.image_id + "' does not share the H x W shape");
  }

  // Unique images in first-appearance order.
  std::map<std::string, std::size_t> image_index;
  std::vector<std::size_t> first_of_image;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (image_index.emplace(samples[i].image_id, first_of_image.size()).second)
      first_of_image.push_back(i);
  }
  const std::vector<Split> splits = assign_splits(first_of_image.size(), ratios, seed);

  const fs::path tensor_dir = out_dir / "tensors";
  std::error_code ec;
  fs::create_directories(tensor_dir, ec);
  if (ec) throw IoError(tensor_dir.string(), ec.message());

  Manifest m;
  m.seed = seed;
  m.ratios = ratios;
  m.rows = rows;
  m.cols = cols;
  m.samples.resize(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    AttackSample& a = m.samples[i];
    a.id = sample_id(s.image_id, s.noise_level);
    a.image_id = s.image_id;
    a.array_pf = "tensors/" + a.id + ".array_pf.cimt";
    a.adc_pf = "tensors/" + a.id + ".adc_pf.cimt";
    a.ground_truth = "tensors/" + s.image_id + ".truth.cimt";
    a.noise_level = s.noise_level;
    a.split = splits[image_index.at(s.image_id)];
  }
  {
    std::map<std::string, int> ids;
    for (const auto& a : m.samples)
      if (++ids[a.id] > 1) throw ConfigError("export: duplicate sample id '" + a.id + "'");
  }

  detail::parallel_for(samples.size(), workers, [&] {
    return [&](std::size_t i) {
      const auto& s = samples[i];
      const auto& a = m.samples[i];
      write_tensor(out_dir / a.array_pf, to_tensor(s.features.array_pf));
      write_tensor(out_dir / a.adc_pf, to_tensor(s.features.adc_pf));
      if (first_of_image[image_index.at(s.image_id)] == i)
        write_tensor(out_dir / a.ground_truth, to_tensor(s.ground_truth));
    };
  });
  write_manifest(out_dir / "manifest.json", m);
  return m;
}

}  // namespace cimleak::io
