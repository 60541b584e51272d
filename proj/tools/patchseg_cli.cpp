// patchseg command-line harness.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "patchseg/basis_io.hpp"
#include "patchseg/error.hpp"
#include "patchseg/experiments.hpp"
#include "patchseg/image_io.hpp"
#include "patchseg/metrics.hpp"
#include "patchseg/mosaic.hpp"
#include "patchseg/segmenter.hpp"
#include "patchseg/simd/kernels.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace patchseg;

namespace {

// ---------------------------------------------------------------- parsing

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) throw InvalidArgument("bad number for " + what + ": '" + text + "'");
  return v;
}

// "kind:key=value,key=value" or "file:path". Angles are in degrees.
TextureSource parse_texture(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "file") {
    if (rest.empty()) throw InvalidArgument("file texture needs a path");
    return TextureSource{std::nullopt, rest};
  }
  TextureDescriptor t;
  t.kind = parse_texture_kind(head);
  for (const std::string& kv : split(rest, ',')) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InvalidArgument("texture parameter without '=': " + kv);
    const std::string key = kv.substr(0, eq);
    const double v = parse_number(kv.substr(eq + 1), key);
    if (key == "orientation") t.orientation = v * std::numbers::pi / 180.0;
    else if (key == "frequency") t.frequency = v;
    else if (key == "period") t.period = v;
    else if (key == "bandwidth") t.bandwidth = v;
    else if (key == "seed") t.seed = static_cast<std::uint64_t>(v);
    else if (key == "level") t.level = v;
    else if (key == "contrast") t.contrast = v;
    else throw InvalidArgument("unknown texture parameter: " + key);
  }
  t.validate();
  return TextureSource{t, {}};
}

BoundaryPolicy parse_boundary(const std::string& name) {
  if (name == "reflect") return BoundaryPolicy::reflect;
  if (name == "replicate") return BoundaryPolicy::replicate;
  throw InvalidArgument("unknown boundary policy: " + name);
}

// ---------------------------------------------------------------- options

struct SegOptions {
  std::string config_path;
  std::string preset = "texture";
  std::optional<std::size_t> patch_side, bases;
  std::optional<double> alpha, nu, sigma, eps, intensity_scale;
  std::optional<int> max_steps, refresh_every, gd_iters, reinit_every;
  std::optional<std::uint64_t> seed;
  std::string boundary;
};

void add_seg_options(CLI::App* app, SegOptions& o) {
  app->add_option("--config", o.config_path, "JSON file with segmentation parameters");
  app->add_option("--preset", o.preset, "texture (nu=100, sigma=5) or smooth (nu=1, sigma=side/2)")
      ->check(CLI::IsMember({"texture", "smooth"}));
  app->add_option("--patch-side", o.patch_side, "odd patch side m");
  app->add_option("--bases", o.bases, "bases per region K");
  app->add_option("--alpha", o.alpha, "weight of the smooth term in [0,1]");
  app->add_option("--nu", o.nu, "length penalty");
  app->add_option("--sigma", o.sigma, "smooth-fit Gaussian scale (px)");
  app->add_option("--eps", o.eps, "Heaviside width (px)");
  app->add_option("--intensity-scale", o.intensity_scale, "error-field scale before evolution");
  app->add_option("--max-steps", o.max_steps, "evolution step cap");
  app->add_option("--refresh-every", o.refresh_every, "steps between model refits");
  app->add_option("--gd-iters", o.gd_iters, "GD sweeps per basis per refit");
  app->add_option("--reinit-every", o.reinit_every, "steps between reinitializations");
  app->add_option("--seed", o.seed, "random seed");
  app->add_option("--boundary", o.boundary, "reflect or replicate");
}

SegmentationConfig build_config(const SegOptions& o, std::size_t width, std::size_t height) {
  SegmentationConfig cfg = o.preset == "smooth" ? smooth_image_config(width, height) : SegmentationConfig{};
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw IoError("cannot read config " + o.config_path);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
    }
    for (const auto& [key, v] : j.items()) {
      if (key == "patch_side") cfg.patch_side = v.get<std::size_t>();
      else if (key == "bases") cfg.bases = v.get<std::size_t>();
      else if (key == "alpha") cfg.alpha = v.get<double>();
      else if (key == "nu") cfg.nu = v.get<double>();
      else if (key == "sigma") cfg.sigma = v.get<double>();
      else if (key == "eps") cfg.eps = v.get<double>();
      else if (key == "intensity_scale") cfg.intensity_scale = v.get<double>();
      else if (key == "max_steps") cfg.max_steps = v.get<int>();
      else if (key == "refresh_every") cfg.refresh_every = v.get<int>();
      else if (key == "gd_iters") cfg.gd_iters = v.get<int>();
      else if (key == "reinit_every") cfg.reinit_every = v.get<int>();
      else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (key == "stable_fraction") cfg.stable_fraction = v.get<double>();
      else if (key == "stable_steps") cfg.stable_steps = v.get<int>();
      else if (key == "boundary") cfg.boundary = parse_boundary(v.get<std::string>());
      else throw InvalidArgument("unknown config key: " + key);
    }
  }
  if (o.patch_side) cfg.patch_side = *o.patch_side;
  if (o.bases) cfg.bases = *o.bases;
  if (o.alpha) cfg.alpha = *o.alpha;
  if (o.nu) cfg.nu = *o.nu;
  if (o.sigma) cfg.sigma = *o.sigma;
  if (o.eps) cfg.eps = *o.eps;
  if (o.intensity_scale) cfg.intensity_scale = *o.intensity_scale;
  if (o.max_steps) cfg.max_steps = *o.max_steps;
  if (o.refresh_every) cfg.refresh_every = *o.refresh_every;
  if (o.gd_iters) cfg.gd_iters = *o.gd_iters;
  if (o.reinit_every) cfg.reinit_every = *o.reinit_every;
  if (o.seed) cfg.seed = *o.seed;
  if (!o.boundary.empty()) cfg.boundary = parse_boundary(o.boundary);
  cfg.validate();
  return cfg;
}

struct MosaicOptions {
  std::vector<std::string> textures;
  std::string template_name;
  bool zero_mean = false;
  std::size_t size = 128;
  double noise = 0.0;
  std::uint64_t seed = 1;
};

void add_mosaic_options(CLI::App* app, MosaicOptions& o) {
  app->add_option("--texture", o.textures,
                  "texture per template region: kind:key=value,... or file:path (repeatable)");
  app->add_option("--template", o.template_name, "right-half, cross, or a mask image path");
  app->add_flag("--zero-mean", o.zero_mean, "subtract each region's mean");
  app->add_option("--size", o.size, "mosaic side (px)");
  app->add_option("--noise", o.noise, "Gaussian pixel noise sd");
  app->add_option("--noise-seed", o.seed, "pixel noise seed");
}

// Returns nullopt when no textures were given (callers then use a built-in spec).
std::optional<MosaicSpec> mosaic_spec(const MosaicOptions& o, std::size_t patch_side) {
  if (o.textures.empty()) return std::nullopt;
  MosaicSpec s;
  for (const std::string& t : o.textures) s.textures.push_back(parse_texture(t));
  if (!o.template_name.empty()) s.template_name = o.template_name;
  s.zero_mean = o.zero_mean;
  s.size = o.size;
  s.noise_sd = o.noise;
  s.seed = o.seed;
  s.patch_side = patch_side;
  return s;
}

// ---------------------------------------------------------------- outputs

// Label ids stored as 8-bit gray levels (id = value); exact round trip.
void write_label_ids(const fs::path& path, const LabelMap& labels) {
  ImageGrid g(labels.width(), labels.height(), 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) g.values()[i] = labels.labels()[i] / 255.0;
  write_image(path, g);
}

LabelMap read_label_ids(const fs::path& path) {
  const ImageGrid g = read_image(path);
  LabelMap out(g.width(), g.height());
  for (std::size_t i = 0; i < g.size(); ++i) out.labels()[i] = static_cast<int>(std::lround(g.values()[i] * 255.0));
  return out;
}

// Two-valued masks written as 0/255 images are read back as {0,1}.
LabelMap normalize_binary(LabelMap m) {
  if (m.max_label() == 255) {
    bool binary = true;
    for (int v : m.labels()) binary = binary && (v == 0 || v == 255);
    if (binary)
      for (int& v : m.labels()) v = v == 255 ? 1 : 0;
  }
  return m;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

json metrics_json(const SegmentationResult& r, const std::optional<SegmentationMetrics>& m) {
  json j;
  j["steps"] = r.steps_used;
  j["wall_time_per_iteration"] = r.wall_time_per_iteration;
  j["warnings"] = r.warnings;
  if (m) {
    j["error_rate_per_region"] = m->error_rate_per_region;
    j["total_error"] = m->total_error;
  } else {
    j["error_rate_per_region"] = nullptr;
    j["total_error"] = nullptr;
  }
  return j;
}

void write_trace(const fs::path& path, const SegmentationResult& r) {
  std::ostringstream out;
  out.precision(12);
  out << "refresh,step,energy_before,energy_after\n";
  for (std::size_t i = 0; i < r.refreshes.size(); ++i)
    out << i << ',' << r.refreshes[i].step << ',' << r.refreshes[i].energy_before << ','
        << r.refreshes[i].energy_after << '\n';
  write_text(path, out.str());
}

// File suffixes follow label ids; two-phase models are {inside (id 1), outside (id 0)}.
void write_models(const fs::path& dir, const SegmentationResult& r, const ImageGrid& img, bool dump_errors,
                  BoundaryPolicy bp, bool two_phase) {
  for (std::size_t j = 0; j < r.models.size(); ++j) {
    const RegionModel& model = r.models[j];
    const std::size_t i = two_phase ? 1 - j : j;
    if (model.basis) {
      write_image(dir / ("bases_region" + std::to_string(i) + ".png"), basis_tiles(*model.basis));
      write_basis(dir / ("bases_region" + std::to_string(i) + ".txt"), *model.basis);
    }
    if (dump_errors)
      write_image(dir / ("error_region" + std::to_string(i) + ".png"),
                  normalize_range(coupled_error(img, model, bp)));
  }
}

void print_json_line(const json& j) { std::cout << j.dump() << std::endl; }

// ---------------------------------------------------------------- commands

struct Common {
  std::string out_dir = "run";
  std::string simd;
};

void prepare(const Common& c) {
  if (!c.simd.empty()) simd::set_active_isa(simd::parse_isa(c.simd));
  fs::create_directories(c.out_dir);
}

int cmd_mosaic(const Common& c, const MosaicOptions& mo) {
  prepare(c);
  std::optional<MosaicSpec> spec = mosaic_spec(mo, 13);
  if (!spec) spec = structure_only_pairs(mo.size).front();
  const Mosaic m = make_mosaic(*spec);
  const fs::path dir = c.out_dir;
  write_image(dir / "image.png", spec->zero_mean ? normalize_range(m.image) : m.image);
  write_label_ids(dir / "truth.pgm", m.truth);
  write_png_rgb(dir / "truth.png", colorize(m.truth));
  print_json_line({{"image", (dir / "image.png").string()}, {"truth", (dir / "truth.pgm").string()},
                   {"regions", m.truth.max_label() + 1}});
  return 0;
}

struct SegmentInputs {
  std::string image;
  std::string truth;
  std::vector<std::string> init_masks;
  int dump_every = 0;
  bool dump_errors = false;
};

void add_segment_inputs(CLI::App* app, SegmentInputs& in, bool multi) {
  app->add_option("--image", in.image, "input image (PGM/PNG); a mosaic is generated when omitted");
  app->add_option("--truth", in.truth, "ground-truth label ids (gray level = id, or 0/255 mask)");
  app->add_option("--init", in.init_masks,
                  multi ? "initial mask per region (repeatable)" : "initial mask image (default: circle grid)");
  app->add_option("--dump-every", in.dump_every, "write a contour overlay every N steps");
  app->add_flag("--dump-errors", in.dump_errors, "write per-region coupled error heatmaps");
}

RegionMask read_mask(const std::string& path) {
  const ImageGrid g = read_image(path);
  ImageGrid b(g.width(), g.height(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) b.values()[i] = g.values()[i] >= 0.5 ? 1.0 : 0.0;
  return RegionMask(std::move(b));
}

int cmd_segment(const Common& c, const SegOptions& so, const MosaicOptions& mo, const SegmentInputs& in) {
  prepare(c);
  const fs::path dir = c.out_dir;
  std::optional<ImageGrid> img;
  std::optional<LabelMap> truth;
  if (!in.image.empty()) {
    img = read_image(in.image);
  } else {
    std::optional<MosaicSpec> spec = mosaic_spec(mo, so.patch_side.value_or(13));
    if (!spec) spec = structure_only_pairs(mo.size).front();
    Mosaic m = make_mosaic(*spec);
    img = std::move(m.image);
    truth = std::move(m.truth);
  }
  if (!in.truth.empty()) truth = normalize_binary(read_label_ids(in.truth));
  const SegmentationConfig cfg = build_config(so, img->width(), img->height());
  if (in.init_masks.size() > 1) throw InvalidArgument("segment takes at most one --init mask");
  const RegionMask init = in.init_masks.empty() ? circle_grid_mask(img->width(), img->height())
                                                : read_mask(in.init_masks.front());

  SegmentationHooks hooks;
  if (in.dump_every > 0)
    hooks.on_step = [&](int step, const LevelSetState& s) {
      if (step % in.dump_every == 0)
        write_png_rgb(dir / ("contour_" + std::to_string(step) + ".png"), contour_overlay(normalize_range(*img), s.phi));
    };
  const SegmentationResult r = segment_two_phase(*img, init, cfg, hooks);

  std::optional<SegmentationMetrics> metrics;
  if (truth) metrics = evaluate(r.labels, *truth);
  write_png_rgb(dir / "labels.png", colorize(r.labels));
  write_label_ids(dir / "labels.pgm", r.labels);
  write_models(dir, r, *img, in.dump_errors, cfg.boundary, true);
  write_trace(dir / "trace.csv", r);
  const json mj = metrics_json(r, metrics);
  write_text(dir / "metrics.json", mj.dump(2) + "\n");
  print_json_line(mj);
  return 0;
}

int cmd_one_vs_all(const Common& c, const SegOptions& so, const MosaicOptions& mo, const SegmentInputs& in) {
  prepare(c);
  const fs::path dir = c.out_dir;
  std::optional<ImageGrid> img;
  std::optional<LabelMap> truth;
  if (!in.image.empty()) {
    img = read_image(in.image);
  } else {
    std::optional<MosaicSpec> spec = mosaic_spec(mo, so.patch_side.value_or(13));
    if (!spec) spec = cross_mosaic_spec(mo.size);
    Mosaic m = make_mosaic(*spec);
    img = std::move(m.image);
    truth = std::move(m.truth);
  }
  if (!in.truth.empty()) truth = normalize_binary(read_label_ids(in.truth));
  const SegmentationConfig cfg = build_config(so, img->width(), img->height());

  std::vector<RegionMask> init;
  if (!in.init_masks.empty()) {
    for (const std::string& p : in.init_masks) init.push_back(read_mask(p));
  } else if (truth) {
    init = seed_masks(*truth, static_cast<double>(std::min(img->width(), img->height())) / 12.8);
  } else {
    throw InvalidArgument("one-vs-all on a user image needs --init masks or --truth");
  }
  const SegmentationResult r = segment_one_vs_all(*img, init, cfg);

  std::optional<SegmentationMetrics> metrics;
  if (truth) metrics = evaluate(r.labels, *truth);
  write_png_rgb(dir / "labels.png", colorize(r.labels));
  write_label_ids(dir / "labels.pgm", r.labels);
  write_models(dir, r, *img, in.dump_errors, cfg.boundary, false);
  write_trace(dir / "trace.csv", r);
  const json mj = metrics_json(r, metrics);
  write_text(dir / "metrics.json", mj.dump(2) + "\n");
  print_json_line(mj);
  return 0;
}

struct BenchOptions {
  std::vector<std::string> images;
  std::size_t random = 10;
  std::size_t size = 64;
  std::size_t m = 7;
  std::string ks = "1,2,4,8";
  std::uint64_t seed = 1;
};

int cmd_bench(const Common& c, const BenchOptions& o) {
  prepare(c);
  std::vector<ImageGrid> images;
  for (const std::string& p : o.images) images.push_back(read_image(p));
  if (images.empty()) {
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < o.random; ++i) {
      ImageGrid g(o.size, o.size, 0.0);
      for (double& v : g.values()) v = u(rng);
      images.push_back(std::move(g));
    }
  }
  std::vector<std::size_t> ks;
  for (const std::string& k : split(o.ks, ',')) ks.push_back(static_cast<std::size_t>(parse_number(k, "k")));
  GdConfig gd;
  gd.seed = o.seed;
  const BenchmarkReport report = run_benchmark_gd_vs_svd(images, o.m, ks, gd);
  write_benchmark_csv(fs::path(c.out_dir) / "report.csv", report);
  double slowest = 0.0;
  for (double s : report.seconds_per_image) slowest = std::max(slowest, s);
  print_json_line({{"images", images.size()}, {"max_normalized_gap", report.max_normalized_gap()},
                   {"max_seconds_per_image", slowest}});
  return 0;
}

int cmd_alpha_sweep(const Common& c, const SegOptions& so, const std::string& alphas, std::size_t size,
                    std::size_t pairs) {
  prepare(c);
  std::vector<double> as;
  for (const std::string& a : split(alphas, ',')) as.push_back(parse_number(a, "alpha"));
  std::vector<MosaicSpec> specs = structure_only_pairs(size);
  if (pairs < specs.size()) specs.resize(pairs);
  const SegmentationConfig cfg = build_config(so, size, size);
  const std::vector<SweepRow> rows = run_alpha_sweep(specs, as, cfg);
  write_sweep_csv(fs::path(c.out_dir) / "report.csv", rows);
  json summary = json::object();
  for (double a : as) {
    double sum = 0.0;
    int n = 0;
    for (const SweepRow& r : rows)
      if (r.alpha == a) {
        sum += r.error;
        ++n;
      }
    std::ostringstream key;
    key << a;
    summary[key.str()] = n ? sum / n : 0.0;
  }
  print_json_line({{"mean_error_by_alpha", summary}});
  return 0;
}

int cmd_eval(const Common& c, const std::string& labels_path, const std::string& truth_path) {
  prepare(c);
  const LabelMap labels = normalize_binary(read_label_ids(labels_path));
  const LabelMap truth = normalize_binary(read_label_ids(truth_path));
  const SegmentationMetrics m = evaluate(labels, truth);
  const json j = {{"error_rate_per_region", m.error_rate_per_region}, {"total_error", m.total_error},
                  {"permuted", m.permuted}};
  write_text(fs::path(c.out_dir) / "metrics.json", j.dump(2) + "\n");
  print_json_line(j);
  return 0;
}

// ---------------------------------------------------------------- errors

int fail(const std::string& kind, const std::string& message, int code, std::optional<int> region = {}) {
  json j = {{"error", kind}, {"message", message}};
  if (region) j["region"] = *region;
  std::cerr << j.dump() << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Segmentation by piecewise linear patch reconstruction"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--out", common.out_dir, "run directory")->capture_default_str();
  app.add_option("--simd", common.simd, "kernel set: scalar or avx2 (default: best available)");

  MosaicOptions mosaic_opts;
  SegOptions seg_opts;
  SegmentInputs seg_in;
  BenchOptions bench;
  std::string alphas = "0,0.1,0.3,0.5,0.7,0.9,1";
  std::size_t sweep_size = 128, sweep_pairs = 10;
  std::string eval_labels, eval_truth;

  CLI::App* mosaic = app.add_subcommand("mosaic", "generate a texture mosaic and its ground truth");
  add_mosaic_options(mosaic, mosaic_opts);

  CLI::App* segment = app.add_subcommand("segment", "two-phase segmentation");
  add_seg_options(segment, seg_opts);
  add_mosaic_options(segment, mosaic_opts);
  add_segment_inputs(segment, seg_in, false);

  CLI::App* ova = app.add_subcommand("one-vs-all", "multi-region segmentation by one-against-all");
  add_seg_options(ova, seg_opts);
  add_mosaic_options(ova, mosaic_opts);
  add_segment_inputs(ova, seg_in, true);

  CLI::App* bench_cmd = app.add_subcommand("bench-basis", "GD versus dense-eigensolver bases");
  bench_cmd->add_option("--images", bench.images, "input images (default: seeded random images)");
  bench_cmd->add_option("--random", bench.random, "number of random images");
  bench_cmd->add_option("--size", bench.size, "random image side");
  bench_cmd->add_option("-m,--patch-side", bench.m, "patch side");
  bench_cmd->add_option("-k,--ks", bench.ks, "comma-separated basis counts");
  bench_cmd->add_option("--seed", bench.seed, "seed for images and GD");

  CLI::App* sweep = app.add_subcommand("alpha-sweep", "segmentation error versus alpha on structure-only pairs");
  add_seg_options(sweep, seg_opts);
  sweep->add_option("--alphas", alphas, "comma-separated alpha values");
  sweep->add_option("--size", sweep_size, "mosaic side");
  sweep->add_option("--pairs", sweep_pairs, "number of built-in pairs to use (max 10)");

  CLI::App* eval = app.add_subcommand("eval", "error rates of a label map against ground truth");
  eval->add_option("--labels", eval_labels, "label ids image")->required();
  eval->add_option("--truth", eval_truth, "ground-truth ids image")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (*mosaic) return cmd_mosaic(common, mosaic_opts);
    if (*segment) return cmd_segment(common, seg_opts, mosaic_opts, seg_in);
    if (*ova) return cmd_one_vs_all(common, seg_opts, mosaic_opts, seg_in);
    if (*bench_cmd) return cmd_bench(common, bench);
    if (*sweep) return cmd_alpha_sweep(common, seg_opts, alphas, sweep_size, sweep_pairs);
    if (*eval) return cmd_eval(common, eval_labels, eval_truth);
  } catch (const RegionFailure& e) {
    return fail("region_failure", e.what(), 5, e.region);
  } catch (const IoError& e) {
    return fail("io", e.what(), 3);
  } catch (const DimensionMismatch& e) {
    return fail("dimension_mismatch", e.what(), 2);
  } catch (const DegenerateRegion& e) {
    return fail("degenerate_region", e.what(), 4);
  } catch (const std::invalid_argument& e) {
    return fail("invalid_argument", e.what(), 2);
  } catch (const json::exception& e) {
    return fail("invalid_argument", e.what(), 2);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 4);
  }
  return fail("usage", "no subcommand", 2);
}
