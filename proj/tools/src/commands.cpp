#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "ride/image_io.hpp"
#include "ride/metrics.hpp"
#include "ride/model_io.hpp"
#include "ride/patches.hpp"
#include "ride/recover.hpp"
#include "ride/sensing.hpp"
#include "ride/train.hpp"

namespace ride::cli {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_file(const std::string& path, const char* what) {
  if (!std::filesystem::is_regular_file(path)) throw std::runtime_error(std::string(what) + " not found: " + path);
}

std::pair<int, int> parse_size(const std::string& s) {
  int rows = 0, cols = 0;
  char x = 0, extra = 0;
  if (std::sscanf(s.c_str(), "%d%c%d%c", &rows, &x, &cols, &extra) != 3 || (x != 'x' && x != 'X') || rows < 1 ||
      cols < 1) {
    throw std::invalid_argument("--size must look like HxW, got '" + s + "'");
  }
  return {rows, cols};
}

void write_trace(const RecoveryTrace& trace, const std::string& path, RunManifest& m) {
  if (path.empty()) return;
  trace.write_csv(path);
  m.output("trace", path);
}

RideModel load_checked(const std::string& path, RunManifest& m) {
  require_file(path, "model file");
  m.input("model", path);
  m.model_hash(path);
  return load_model(path);
}

}  // namespace

void run_train(const TrainOptions& o, RunManifest& m) {
  const auto files = list_images(o.data);
  if (files.empty()) throw std::runtime_error("no .pgm images in " + o.data);
  std::vector<Grid2D> images;
  for (const auto& f : files) {
    images.push_back(read_image(f));
    m.input("image", f);
  }

  RideConfig rc;
  rc.hidden = o.hidden;
  rc.components = o.components;
  rc.scales = o.scales;
  const std::uint64_t init_seed = derive_seed(o.seed, "train/init");
  m.seed("init", init_seed);
  m.seed("patches", derive_seed(o.seed, "train/patches"));
  SeededRng rng(init_seed);
  const RideModel model = RideModel::create(rc, rng);

  TrainConfig tc;
  tc.epochs = o.epochs;
  tc.patch_start = o.patch_start;
  tc.patch_end = o.patch_end;
  tc.patch_step = o.patch_step;
  tc.learning_rate = o.lr;
  tc.lr_decay = o.lr_decay;
  tc.batch_size = o.batch;
  tc.patches_per_epoch = o.patches;
  tc.seed = o.seed;
  tc.validate();

  const TrainResult result = train(model, images, tc, [](const EpochReport& r) {
    std::fprintf(stderr, "epoch %d  patch %dx%d  lr %.3g  avg log-lik %.4f nats/pixel\n", r.epoch, r.patch_size,
                 r.patch_size, r.learning_rate, r.avg_log_likelihood);
  });
  save_model(result.model, o.out);
  m.output("model", o.out);
  m.model_hash(o.out);
}

void run_sample(const SampleOptions& o, RunManifest& m) {
  const auto [rows, cols] = parse_size(o.size);
  const RideModel model = load_checked(o.model, m);
  const std::uint64_t s = derive_seed(o.seed, "sample");
  m.seed("sample", s);
  SeededRng rng(s);
  write_image(sample(model, rows, cols, rng), o.out);
  m.output("image", o.out);
}

void run_mask(const MaskOptions& o, RunManifest& m) {
  require_file(o.in, "input image");
  const Grid2D image = read_image(o.in);
  m.input("image", o.in);
  const std::uint64_t s = derive_seed(o.seed, "mask");
  m.seed("mask", s);
  SeededRng rng(s);
  const PixelMask mask = random_mask(image.rows(), image.cols(), o.fraction, rng);
  Grid2D masked = image;
  for (std::size_t k = 0; k < masked.size(); ++k) {
    if (!mask.observed(k)) masked[k] = 0.0;
  }
  write_image(masked, o.out_masked);
  m.output("masked", o.out_masked);
  write_image(mask.to_grid(), o.out_mask);
  m.output("mask", o.out_mask);
  m.resolved("missing_pixels", std::to_string(mask.missing_count()));
}

void run_inpaint(const InpaintOptions& o, RunManifest& m) {
  const RideModel model = load_checked(o.model, m);
  require_file(o.in, "input image");
  require_file(o.mask, "mask");
  const Grid2D image = read_image(o.in);
  const PixelMask mask = PixelMask::from_grid(read_image(o.mask));
  m.input("image", o.in);
  m.input("mask", o.mask);
  if (!mask.matches(image)) throw std::invalid_argument("mask and image sizes differ");
  if (o.directions != 1 && o.directions != 4) throw std::invalid_argument("--directions must be 1 or 4");

  RecoveryConfig cfg;
  cfg.iterations = o.iters;
  cfg.step_size = o.eta;
  cfg.momentum = o.momentum;
  cfg.entropy_threshold = o.tau;
  cfg.four_directions = o.directions == 4;
  cfg.seed = derive_seed(o.seed, "inpaint");
  m.seed("inpaint", cfg.seed);
  const RecoveryResult r = inpaint(model, image, mask, cfg);
  write_image(r.image, o.out);
  m.output("image", o.out);
  write_trace(r.trace, o.trace, m);
}

void run_sense(const SenseOptions& o, RunManifest& m) {
  require_file(o.in, "input image");
  const Grid2D image = read_image(o.in);
  m.input("image", o.in);
  const int n = static_cast<int>(image.size());
  if (!(o.mr > 0.0 && o.mr <= 1.0)) throw std::invalid_argument("--mr must be in (0, 1]");
  if (o.sigma < 0.0) throw std::invalid_argument("--sigma must be >= 0");
  const int rows = std::max(1, static_cast<int>(std::lround(o.mr * n)));
  m.resolved("pixels", std::to_string(n));
  m.resolved("measurements", std::to_string(rows));

  const std::uint64_t op_seed = derive_seed(o.seed, "sense/operator");
  const std::uint64_t noise_seed = derive_seed(o.seed, "sense/noise");
  m.seed("operator", op_seed);
  m.seed("noise", noise_seed);
  MeasurementOperator op;
  if (o.op == "gaussian") {
    if (n > kMaxDensePixels) {
      throw std::invalid_argument("dense Gaussian operator refused for " + std::to_string(n) + " pixels (limit " +
                                  std::to_string(kMaxDensePixels) + "); use --op fwht");
    }
    op = make_gaussian_operator(n, rows, op_seed);
  } else if (o.op == "fwht") {
    if ((n & (n - 1)) != 0) {
      throw std::invalid_argument("--op fwht needs a power-of-two pixel count, image has " + std::to_string(n));
    }
    op = make_fwht_operator(n, rows, op_seed);
  } else {
    throw std::invalid_argument("--op must be gaussian or fwht, got '" + o.op + "'");
  }
  SeededRng noise(noise_seed);
  save_measurements(measure(op, image, o.sigma, noise), o.out_y);
  m.output("measurements", o.out_y);
  save_operator(op, o.out_op);
  m.output("operator", o.out_op);
}

void run_recover(const RecoverOptions& o, RunManifest& m) {
  const RideModel model = load_checked(o.model, m);
  require_file(o.y, "measurement file");
  require_file(o.op, "operator file");
  const Measurements y = load_measurements(o.y);
  const MeasurementOperator op = load_operator(o.op);
  m.input("measurements", o.y);
  m.input("operator", o.op);
  if (o.directions != 1 && o.directions != 4) throw std::invalid_argument("--directions must be 1 or 4");

  std::string mode = o.mode;
  if (mode == "auto") mode = o.lambda ? "noisy" : "project";
  if (mode == "project" && o.lambda) {
    throw std::invalid_argument("--lambda has no meaning in projection mode (measurements are enforced exactly)");
  }
  if (mode == "noisy" && !o.lambda) throw std::invalid_argument("--mode noisy needs --lambda");
  if (mode != "project" && mode != "noisy") throw std::invalid_argument("--mode must be auto, project or noisy");
  if (mode == "project" && y.sigma > 0.0) {
    std::fprintf(stderr, "warning: measurements carry noise (sigma %g) but projection mode fits them exactly\n",
                 y.sigma);
  }

  const double mr = static_cast<double>(op.m()) / op.n();
  RecoveryConfig cfg;
  cfg.iterations = o.iters > 0 ? o.iters : RecoveryConfig::default_iterations(mr);
  cfg.step_size = o.eta;
  cfg.momentum = o.momentum;
  cfg.entropy_threshold = o.tau;
  cfg.four_directions = o.directions == 4;
  cfg.lambda = o.lambda.value_or(0.0);
  cfg.sigma = y.sigma;
  cfg.seed = derive_seed(o.seed, "recover");
  m.seed("recover", cfg.seed);
  m.resolved("mode", mode);
  m.resolved("iterations", std::to_string(cfg.iterations));
  m.resolved("measurement_rate", fmt(mr));

  const RecoveryResult r = mode == "project" ? cs_recover(model, op, y, cfg) : cs_recover_noisy(model, op, y, cfg);
  write_image(r.image, o.out);
  m.output("image", o.out);
  write_trace(r.trace, o.trace, m);
  if (!o.out_baseline.empty()) {
    write_image(Grid2D(y.rows, y.cols, op.adjoint(y.values)), o.out_baseline);
    m.output("baseline", o.out_baseline);
  }
}

void run_eval(const EvalOptions& o, RunManifest& m) {
  require_file(o.ref, "reference image");
  require_file(o.test, "test image");
  const Grid2D ref = read_image(o.ref);
  const Grid2D test = read_image(o.test);
  m.input("reference", o.ref);
  m.input("test", o.test);
  MetricConfig cfg;
  cfg.trim = o.trim;
  const MetricRow row{o.id.empty() ? std::filesystem::path(o.test).stem().string() : o.id, o.mr, o.method,
                      psnr(ref, test, cfg), ssim(ref, test, cfg)};
  write_metrics_csv({row}, o.out);
  m.output("metrics", o.out);
  std::printf("psnr %s dB  ssim %.6f\n", format_psnr(row.psnr_db).c_str(), row.ssim);
}

}  // namespace ride::cli
