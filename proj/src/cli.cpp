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

#include "cimleak/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cimleak/dataset.hpp"
#include "cimleak/errors.hpp"
#include "cimleak/imaging.hpp"
#include "cimleak/pipeline_config.hpp"
#include "cimleak/power_trace.hpp"
#include "cimleak/tensor_file.hpp"
#include "cimleak/trace_pipeline.hpp"

namespace cimleak {

namespace {

namespace fs = std::filesystem;
using io::PipelineConfig;

struct CommonFlags {
  std::string config;
  std::string input;
  std::string out;
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> seed;
  std::vector<double> levels;
  std::string noise_target;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool needs_input) {
  cmd->add_option("--config", f.config, "JSON pipeline config")->check(CLI::ExistingFile);
  auto* in = cmd->add_option("--input", f.input, "input directory");
  if (needs_input) in->check(CLI::ExistingDirectory);
  cmd->add_option("--out", f.out, "output directory")->required();
  cmd->add_option("--workers", f.workers, "worker threads (0 = all cores)");
  cmd->add_option("--seed", f.seed, "base seed for splits and noise");
}

PipelineConfig resolve_config(const CommonFlags& f) {
  PipelineConfig cfg = f.config.empty() ? PipelineConfig{} : io::load_config(f.config);
  if (!f.input.empty()) cfg.input_dir = f.input;
  cfg.output_dir = f.out;
  if (f.workers) cfg.workers = *f.workers;
  if (f.seed) cfg.seed = *f.seed;
  if (!f.levels.empty()) cfg.noise_levels = f.levels;
  if (f.noise_target == "feature_matrices")
    cfg.noise_target = pipeline::NoiseTarget::kFeatureMatrices;
  else if (f.noise_target == "trace_samples")
    cfg.noise_target = pipeline::NoiseTarget::kTraceSamples;
  cfg.validate();
  return cfg;
}

fs::path make_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError(p.string(), ec.message());
  return p;
}

// Files in `dir` ending in `suffix`, sorted; the returned keys drop the suffix.
std::map<std::string, fs::path> files_with_suffix(const fs::path& dir,
                                                  const std::string& suffix) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError(dir.string(), "not a directory");
  std::map<std::string, fs::path> found;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.size() > suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
      found.emplace(name.substr(0, name.size() - suffix.size()), e.path());
  }
  return found;
}

// Stable per-sample stream so noise does not depend on processing order.
std::uint64_t sample_seed(std::uint64_t base, const std::string& id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : id) h = (h ^ c) * 0x100000001b3ULL;
  std::uint64_t z = base ^ h;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

io::IngestResult ingest(const PipelineConfig& cfg, std::ostream& err) {
  if (cfg.input_dir.empty()) throw ConfigError("no input directory (--input or dataset.input_dir)");
  return io::ingest_images(cfg.input_dir, cfg.image_rows, cfg.image_cols, cfg.workers, err);
}

pipeline::PowerFeatureMatrices noisy_features(const sim::RecordGrid& grid,
                                              const pipeline::PowerFeatureMatrices& clean,
                                              const PipelineConfig& cfg, double level,
                                              std::uint64_t seed) {
  if (level == 0.0) return clean;
  if (cfg.noise_target == pipeline::NoiseTarget::kFeatureMatrices)
    return pipeline::inject_noise(clean, {level, seed, cfg.noise_target});
  const sim::PowerTrace trace =
      sim::emit_trace(grid, cfg.timing, cfg.sample_rate, sim::SampleNoise{level, seed});
  return pipeline::assemble_features(pipeline::segment_trace(trace));
}

int cmd_simulate(const CommonFlags& f, bool write_traces, double trace_noise,
                 std::ostream& out, std::ostream& err) {
  const PipelineConfig cfg = resolve_config(f);
  const fs::path root = make_dir(cfg.output_dir);
  io::save_config(root, cfg);
  const sim::CimLayer layer = io::build_layer(cfg);
  const auto images = ingest(cfg, err);
  const fs::path grids = make_dir(root / "grids");
  const fs::path truth = make_dir(root / "truth");
  const fs::path traces = write_traces ? make_dir(root / "traces") : fs::path{};
  for (const auto& img : images.images) {
    const sim::RecordGrid grid =
        sim::run_layer(io::to_sim_image(img.pixels, cfg.layer.in_channels), layer, cfg.workers);
    io::write_tensor(grids / (img.id + ".phases.cimt"), io::phases_to_tensor(grid));
    io::write_tensor(truth / (img.id + ".truth.cimt"), io::to_tensor(img.pixels));
    if (write_traces) {
      std::optional<sim::SampleNoise> noise;
      if (trace_noise > 0.0) noise = sim::SampleNoise{trace_noise, sample_seed(cfg.seed, img.id)};
      sim::write_trace(traces / (img.id + ".trace"),
                       sim::emit_trace(grid, cfg.timing, cfg.sample_rate, noise));
    }
  }
  out << "simulated " << images.images.size() << " image(s), skipped "
      << images.skipped.size() << " -> " << root.string() << '\n';
  return 0;
}

int cmd_features(const CommonFlags& f, std::ostream& out) {
  const PipelineConfig cfg = resolve_config(f);
  if (cfg.input_dir.empty()) throw ConfigError("features needs --input <simulate output>");
  const fs::path root = make_dir(cfg.output_dir);
  io::save_config(root, cfg);
  const fs::path in = cfg.input_dir;
  const fs::path dst = make_dir(root / "features");
  const auto grids = files_with_suffix(in / "grids", ".phases.cimt");
  if (grids.empty()) throw IoError((in / "grids").string(), "no *.phases.cimt grids");
  for (const auto& [id, path] : grids) {
    const auto pf = pipeline::assemble_features(io::phases_from_tensor(io::read_tensor(path)));
    io::write_tensor(dst / (id + ".array_pf.cimt"), io::to_tensor(pf.array_pf));
    io::write_tensor(dst / (id + ".adc_pf.cimt"), io::to_tensor(pf.adc_pf));
    const fs::path t = in / "truth" / (id + ".truth.cimt");
    if (fs::exists(t))
      fs::copy_file(t, dst / (id + ".truth.cimt"), fs::copy_options::overwrite_existing);
  }
  out << "assembled features for " << grids.size() << " image(s) -> " << dst.string() << '\n';
  return 0;
}

int cmd_noise(const CommonFlags& f, std::ostream& out) {
  const PipelineConfig cfg = resolve_config(f);
  if (cfg.input_dir.empty()) throw ConfigError("noise needs --input <features output>");
  if (cfg.noise_target != pipeline::NoiseTarget::kFeatureMatrices)
    throw ConfigError("noise works on feature matrices; trace-sample noise is applied by export");
  const fs::path root = make_dir(cfg.output_dir);
  io::save_config(root, cfg);
  fs::path in = cfg.input_dir;
  if (fs::is_directory(in / "features")) in /= "features";
  const auto arrays = files_with_suffix(in, ".array_pf.cimt");
  if (arrays.empty()) throw IoError(in.string(), "no *.array_pf.cimt matrices");
  const fs::path dst = make_dir(root / "noisy");
  std::size_t written = 0;
  for (const auto& [id, path] : arrays) {
    pipeline::PowerFeatureMatrices pf{
        io::matrix_from_tensor(io::read_tensor(path)),
        io::matrix_from_tensor(io::read_tensor(in / (id + ".adc_pf.cimt")))};
    for (double level : cfg.noise_levels) {
      const std::string sid = io::sample_id(id, level);
      const auto noisy = pipeline::inject_noise(
          pf, {level, sample_seed(cfg.seed, sid), pipeline::NoiseTarget::kFeatureMatrices});
      io::write_tensor(dst / (sid + ".array_pf.cimt"), io::to_tensor(noisy.array_pf));
      io::write_tensor(dst / (sid + ".adc_pf.cimt"), io::to_tensor(noisy.adc_pf));
      ++written;
    }
  }
  out << "wrote " << written << " noisy variant(s) -> " << dst.string() << '\n';
  return 0;
}

int cmd_export(const CommonFlags& f, std::ostream& out, std::ostream& err) {
  const PipelineConfig cfg = resolve_config(f);
  const fs::path root = make_dir(cfg.output_dir);
  io::save_config(root, cfg);
  const sim::CimLayer layer = io::build_layer(cfg);
  const auto images = ingest(cfg, err);
  std::vector<io::ProcessedSample> samples;
  for (const auto& img : images.images) {
    const sim::RecordGrid grid =
        sim::run_layer(io::to_sim_image(img.pixels, cfg.layer.in_channels), layer, cfg.workers);
    const auto clean = pipeline::assemble_features(grid);
    for (double level : cfg.noise_levels) {
      const std::uint64_t seed = sample_seed(cfg.seed, io::sample_id(img.id, level));
      samples.push_back({img.id, level, noisy_features(grid, clean, cfg, level, seed), img.pixels});
    }
  }
  const io::Manifest m = io::export_pairs(samples, cfg.split, cfg.seed, root, cfg.workers);
  out << "exported " << m.samples.size() << " sample(s) from " << images.images.size()
      << " image(s) -> " << (root / "manifest.json").string() << '\n';
  return 0;
}

void write_lut_csv(const fs::path& path, const adc::AdcEnergyLut& lut) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError(path.string(), "cannot open for writing");
  const double peak = lut.max();
  os << "code,energy_joules,energy_normalized\n";
  char line[96];
  for (std::uint32_t d = 0; d < lut.size(); ++d) {
    std::snprintf(line, sizeof(line), "%u,%.17g,%.17g\n", d, lut[d], lut[d] / peak);
    os << line;
  }
  if (!os) throw IoError(path.string(), "write failed");
}

int cmd_lut(const CommonFlags& f, std::ostream& out) {
  const PipelineConfig cfg = resolve_config(f);
  const fs::path root = make_dir(cfg.output_dir);
  io::save_config(root, cfg);
  const auto lut = adc::build_energy_lut(cfg.adc);
  write_lut_csv(root / "lut.csv", lut);
  out << "wrote " << lut.size() << "-entry LUT -> " << (root / "lut.csv").string() << '\n';
  return 0;
}

int cmd_plot(const CommonFlags& f, bool plot_lut, std::ostream& out) {
  const PipelineConfig cfg = resolve_config(f);
  if (!plot_lut && cfg.input_dir.empty())
    throw ConfigError("plot needs --lut and/or --input <features directory>");
  const fs::path root = make_dir(cfg.output_dir);
  io::save_config(root, cfg);
  if (plot_lut) {
    const auto lut = adc::build_energy_lut(cfg.adc);
    write_lut_csv(root / "lut.csv", lut);
    io::write_png(root / "lut.png", io::render_curve(lut.energies(), 640, 360));
    out << "wrote " << (root / "lut.png").string() << '\n';
  }
  if (!cfg.input_dir.empty()) {
    fs::path in = cfg.input_dir;
    if (fs::is_directory(in / "features")) in /= "features";
    else if (fs::is_directory(in / "noisy")) in /= "noisy";
    std::size_t n = 0;
    for (const auto& [stem, path] : files_with_suffix(in, ".cimt")) {
      const io::Tensor t = io::read_tensor(path);
      if (t.rank() != 2) continue;
      const Matrix<std::uint8_t> img = t.dtype() == io::DType::kU8
                                           ? io::u8_matrix_from_tensor(t)
                                           : pipeline::normalize_8bit(io::matrix_from_tensor(t)).values;
      io::write_png(root / (stem + ".png"), img);
      ++n;
    }
    out << "wrote " << n << " feature plot(s) -> " << root.string() << '\n';
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"CIM power side-channel simulator and dataset builder", "cimleak"};
  app.require_subcommand(1);

  CommonFlags sim_f, feat_f, noise_f, export_f, plot_f, lut_f;
  bool write_traces = false;
  double trace_noise = 0.0;
  bool plot_lut = false;

  auto* simulate = app.add_subcommand("simulate", "per-image record grids");
  add_common(simulate, sim_f, true);
  simulate->add_flag("--trace", write_traces, "also write sampled power traces");
  simulate->add_option("--trace-noise", trace_noise, "sample noise level on written traces")
      ->check(CLI::NonNegativeNumber);

  auto* features = app.add_subcommand("features", "power feature matrices from record grids");
  add_common(features, feat_f, true);

  auto* noise = app.add_subcommand("noise", "noisy variants of feature matrices");
  add_common(noise, noise_f, true);
  noise->add_option("--levels", noise_f.levels, "comma separated noise levels")->delimiter(',');

  auto* exp = app.add_subcommand("export", "GAN-ready dataset from an image directory");
  add_common(exp, export_f, true);
  exp->add_option("--levels", export_f.levels, "comma separated noise levels")->delimiter(',');
  exp->add_option("--noise-target", export_f.noise_target, "where noise is injected")
      ->check(CLI::IsMember({"feature_matrices", "trace_samples"}));

  auto* plot = app.add_subcommand("plot", "PNG renderings of feature matrices and the LUT");
  add_common(plot, plot_f, true);
  plot->add_flag("--lut", plot_lut, "plot the ADC energy LUT");

  auto* lut = app.add_subcommand("lut", "CSV of the ADC code energy table");
  add_common(lut, lut_f, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* sub = nullptr;
    for (const auto* s : app.get_subcommands()) sub = s;
    err << (sub ? sub->help() : app.help());
    return 2;
  }

  try {
    if (*simulate) return cmd_simulate(sim_f, write_traces, trace_noise, out, err);
    if (*features) return cmd_features(feat_f, out);
    if (*noise) return cmd_noise(noise_f, out);
    if (*exp) return cmd_export(export_f, out, err);
    if (*plot) return cmd_plot(plot_f, plot_lut, out);
    if (*lut) return cmd_lut(lut_f, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace cimleak
