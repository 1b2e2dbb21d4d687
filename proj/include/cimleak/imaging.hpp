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

// Image ingestion and PNG output.
//
// Inputs are decoded, reduced to one luminance plane (plain mean of R, G, B;
// alpha ignored), resized bilinearly when the size differs from the target
// and quantized to [0, 255] by floor. 16-bit samples scale by 255/65535,
// floating-point samples are taken on [0, 1].

#ifndef CIMLEAK_IMAGING_HPP_
#define CIMLEAK_IMAGING_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cimleak/cim_sim.hpp"
#include "cimleak/matrix.hpp"

namespace cimleak::io {

struct IngestedImage {
  std::string id;  // file stem
  std::filesystem::path source;
  Matrix<std::uint8_t> pixels;
};

struct IngestResult {
  std::vector<IngestedImage> images;  // lexicographic by file name
  std::vector<std::filesystem::path> skipped;
};

bool is_image_file(const std::filesystem::path& p);

// Decodes one file; FormatError when it cannot be decoded.
Matrix<std::uint8_t> load_image(const std::filesystem::path& path,
                                std::size_t rows, std::size_t cols);

// Every .png/.tif/.tiff in `dir` (not recursive). Undecodable files are skipped
// with a warning on `log`. IoError when the directory is missing or holds no
// usable image.
IngestResult ingest_images(const std::filesystem::path& dir, std::size_t rows,
                           std::size_t cols, std::size_t workers,
                           std::ostream& log);

// Replicates the luminance plane into `channels` identical input channels.
sim::Image to_sim_image(const Matrix<std::uint8_t>& gray, std::size_t channels);

void write_png(const std::filesystem::path& path, const Matrix<std::uint8_t>& m);

// Line chart of `values` against their index, dark curve on white.
Matrix<std::uint8_t> render_curve(std::span<const double> values,
                                  std::size_t width, std::size_t height);

}  // namespace cimleak::io

#endif  // CIMLEAK_IMAGING_HPP_
