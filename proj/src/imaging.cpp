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

#include "cimleak/imaging.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "cimleak/detail/parallel.hpp"
#include "cimleak/errors.hpp"

namespace cimleak::io {

namespace fs = std::filesystem;

namespace {

// Full-scale value of one sample for the decoded depth.
double depth_full_scale(int depth) {
  switch (depth) {
    case CV_8U: return 255.0;
    case CV_8S: return 127.0;
    case CV_16U: return 65535.0;
    case CV_16S: return 32767.0;
    case CV_32S: return 2147483647.0;
    default: return 1.0;  // float images are taken on [0, 1]
  }
}

// Mean of the colour channels as CV_64F on the depth's native scale.
cv::Mat luminance(const cv::Mat& img) {
  cv::Mat as_double;
  img.convertTo(as_double, CV_64F);
  const int ch = img.channels();
  if (ch == 1) return as_double;
  std::vector<cv::Mat> planes;
  cv::split(as_double, planes);
  const int colour = ch >= 3 ? 3 : 1;
  cv::Mat sum = cv::Mat::zeros(img.rows, img.cols, CV_64F);
  for (int i = 0; i < colour; ++i) sum += planes[i];
  return sum / colour;
}

}  // namespace

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".tif" || ext == ".tiff";
}

Matrix<std::uint8_t> load_image(const fs::path& path, std::size_t rows,
                                std::size_t cols) {
  cv::Mat img;
  try {
    img = cv::imread(path.string(), cv::IMREAD_UNCHANGED | cv::IMREAD_ANYDEPTH);
  } catch (const cv::Exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (img.empty()) throw FormatError(path.string() + ": cannot decode image");

  const double full = depth_full_scale(img.depth());
  Matrix<std::uint8_t> out(rows, cols);

  // 8-bit grayscale at the target size passes through untouched.
  if (img.depth() == CV_8U && img.channels() == 1 &&
      static_cast<std::size_t>(img.rows) == rows &&
      static_cast<std::size_t>(img.cols) == cols) {
    for (std::size_t r = 0; r < rows; ++r)
      std::copy_n(img.ptr<std::uint8_t>(static_cast<int>(r)), cols, out.row(r).data());
    return out;
  }

  cv::Mat gray = luminance(img);
  if (static_cast<std::size_t>(gray.rows) != rows ||
      static_cast<std::size_t>(gray.cols) != cols) {
    cv::Mat resized;
    cv::resize(gray, resized, cv::Size(static_cast<int>(cols), static_cast<int>(rows)), 0, 0,
               cv::INTER_LINEAR);
    gray = resized;
  }
  for (std::size_t r = 0; r < rows; ++r) {
    const double* src = gray.ptr<double>(static_cast<int>(r));
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = std::floor(src[c] * 255.0 / full);
      out(r, c) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
  }
  return out;
}

IngestResult ingest_images(const fs::path& dir, std::size_t rows, std::size_t cols,
                           std::size_t workers, std::ostream& log) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError(dir.string(), "not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
  }
  if (ec) throw IoError(dir.string(), ec.message());
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  if (files.empty()) throw IoError(dir.string(), "no PNG or TIFF images found");

  std::vector<std::optional<Matrix<std::uint8_t>>> decoded(files.size());
  std::vector<std::string> errors(files.size());
  detail::parallel_for(files.size(), workers, [&] {
    return [&](std::size_t i) {
      try {
        decoded[i] = load_image(files[i], rows, cols);
      } catch (const FormatError& e) {
        errors[i] = e.what();
      }
    };
  });

  IngestResult result;
  std::map<std::string, int> taken;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (!decoded[i]) {
      log << "warning: skipping " << errors[i] << '\n';
      result.skipped.push_back(files[i]);
      continue;
    }
    // a.png and a.tif would collide on the stem
    std::string id = files[i].stem().string();
    if (taken[id]++ > 0) id = files[i].filename().string();
    std::replace(id.begin(), id.end(), '.', '_');
    result.images.push_back({id, files[i], std::move(*decoded[i])});
  }
  if (result.images.empty()) throw IoError(dir.string(), "no decodable images");
  return result;
}

sim::Image to_sim_image(const Matrix<std::uint8_t>& gray, std::size_t channels) {
  if (channels == 0) throw ConfigError("image needs at least one channel");
  sim::Image img(channels, gray.rows(), gray.cols());
  const auto src = gray.data();
  for (std::size_t ch = 0; ch < channels; ++ch)
    std::copy(src.begin(), src.end(), img.pixels.begin() + ch * src.size());
  return img;
}

void write_png(const fs::path& path, const Matrix<std::uint8_t>& m) {
  if (m.empty()) throw ShapeError("cannot write an empty image");
  cv::Mat img(static_cast<int>(m.rows()), static_cast<int>(m.cols()), CV_8UC1,
              const_cast<std::uint8_t*>(m.data().data()));
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), img);
  } catch (const cv::Exception& e) {
    throw IoError(path.string(), e.what());
  }
  if (!ok) throw IoError(path.string(), "PNG encoding failed");
}

Matrix<std::uint8_t> render_curve(std::span<const double> values, std::size_t width,
                                  std::size_t height) {
  if (values.size() < 2) throw ShapeError("curve needs at least two points");
  if (width < 32 || height < 32) throw ConfigError("plot is too small");
  cv::Mat canvas(static_cast<int>(height), static_cast<int>(width), CV_8UC1, cv::Scalar(255));
  const int margin = 16;
  const int w = static_cast<int>(width) - 2 * margin;
  const int h = static_cast<int>(height) - 2 * margin;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double span = *hi_it > lo ? *hi_it - lo : 1.0;

  cv::line(canvas, {margin, margin}, {margin, margin + h}, cv::Scalar(160));
  cv::line(canvas, {margin, margin + h}, {margin + w, margin + h}, cv::Scalar(160));
  std::vector<cv::Point> pts;
  pts.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(values.size() - 1);
    const double y = (values[i] - lo) / span;
    pts.emplace_back(margin + static_cast<int>(std::lround(x * w)),
                     margin + h - static_cast<int>(std::lround(y * h)));
  }
  cv::polylines(canvas, pts, false, cv::Scalar(0), 1, cv::LINE_AA);

  Matrix<std::uint8_t> out(height, width);
  for (std::size_t r = 0; r < height; ++r)
    std::copy_n(canvas.ptr<std::uint8_t>(static_cast<int>(r)), width, out.row(r).data());
  return out;
}

}  // namespace cimleak::io
