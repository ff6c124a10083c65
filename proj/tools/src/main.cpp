#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "commands.hpp"
#include "manifest.hpp"
#include "ride/errors.hpp"

namespace ride::cli {
namespace {

// Every flag of the chosen subcommand with its effective value, so that the
// manifest can be replayed through the same parser.
void record_args(const CLI::App& sub, RunManifest& m) {
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty() || opt->get_lnames().front() == "help") continue;
    const std::string& name = opt->get_lnames().front();
    if (opt->count() > 0) {
      m.arg(name, opt->results().front());
    } else if (!opt->get_default_str().empty()) {
      m.arg(name, opt->get_default_str());
    }
  }
}

int run(std::vector<std::string> argv);

int rerun(const std::string& manifest_path) {
  const RunManifest previous = RunManifest::read(manifest_path);
  std::vector<std::string> argv = {"ride", previous.command()};
  for (const auto& [flag, value] : previous.args()) {
    argv.push_back("--" + flag);
    argv.push_back(value);
  }
  return run(argv);
}

int run(std::vector<std::string> argv) {
  CLI::App app{"RIDE image prior: training, sampling, inpainting and compressive recovery"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  TrainOptions train;
  auto* t = app.add_subcommand("train", "Fit a model to a directory of PGM images");
  t->add_option("--data", train.data, "Directory of training images")->required();
  t->add_option("--out", train.out, "Output model file")->required();
  t->add_option("--epochs", train.epochs)->check(CLI::NonNegativeNumber);
  t->add_option("--patch-start", train.patch_start);
  t->add_option("--patch-end", train.patch_end);
  t->add_option("--patch-step", train.patch_step);
  t->add_option("--lr", train.lr);
  t->add_option("--lr-decay", train.lr_decay);
  t->add_option("--batch", train.batch);
  t->add_option("--patches", train.patches, "Patches per epoch");
  t->add_option("--hidden", train.hidden);
  t->add_option("--components", train.components);
  t->add_option("--scales", train.scales);
  t->add_option("--seed", train.seed);

  SampleOptions smp;
  auto* s = app.add_subcommand("sample", "Draw an image from a model");
  s->add_option("--model", smp.model)->required();
  s->add_option("--size", smp.size, "HxW")->required();
  s->add_option("--seed", smp.seed);
  s->add_option("--out", smp.out)->required();

  MaskOptions msk;
  auto* k = app.add_subcommand("mask", "Remove a random fraction of pixels");
  k->add_option("--in", msk.in)->required();
  k->add_option("--fraction", msk.fraction, "Fraction of pixels removed");
  k->add_option("--seed", msk.seed);
  k->add_option("--out-masked", msk.out_masked)->required();
  k->add_option("--out-mask", msk.out_mask, "Mask image (255 observed, 0 missing)")->required();

  InpaintOptions inp;
  auto* i = app.add_subcommand("inpaint", "Fill missing pixels by ascent on the prior");
  i->add_option("--model", inp.model)->required();
  i->add_option("--in", inp.in)->required();
  i->add_option("--mask", inp.mask)->required();
  i->add_option("--out", inp.out)->required();
  i->add_option("--iters", inp.iters)->check(CLI::NonNegativeNumber);
  i->add_option("--eta", inp.eta);
  i->add_option("--momentum", inp.momentum);
  i->add_option("--tau", inp.tau, "Entropy threshold in nats");
  i->add_option("--directions", inp.directions, "1 or 4 raster orientations");
  i->add_option("--seed", inp.seed);
  i->add_option("--trace", inp.trace, "Per-iteration CSV");

  SenseOptions sen;
  auto* e = app.add_subcommand("sense", "Synthesize compressive measurements of an image");
  e->add_option("--in", sen.in)->required();
  e->add_option("--op", sen.op, "gaussian or fwht");
  e->add_option("--mr", sen.mr, "Measurement rate M/N");
  e->add_option("--sigma", sen.sigma, "Measurement noise standard deviation");
  e->add_option("--seed", sen.seed);
  e->add_option("--out-y", sen.out_y)->required();
  e->add_option("--out-op", sen.out_op)->required();

  RecoverOptions rec;
  auto* r = app.add_subcommand("recover", "Recover an image from measurements");
  r->add_option("--model", rec.model)->required();
  r->add_option("--y", rec.y)->required();
  r->add_option("--op", rec.op)->required();
  r->add_option("--out", rec.out)->required();
  r->add_option("--mode", rec.mode, "auto, project or noisy");
  r->add_option("--iters", rec.iters, "0 picks 300 (mr >= 0.25) or 400");
  r->add_option("--eta", rec.eta);
  r->add_option("--momentum", rec.momentum);
  r->add_option("--tau", rec.tau, "Entropy threshold in nats");
  r->add_option("--lambda", rec.lambda, "Soft-constraint weight (noisy mode)");
  r->add_option("--directions", rec.directions, "1 or 4 raster orientations");
  r->add_option("--seed", rec.seed);
  r->add_option("--trace", rec.trace, "Per-iteration CSV");
  r->add_option("--out-baseline", rec.out_baseline, "Also write the Phi^T y image");

  EvalOptions ev;
  auto* v = app.add_subcommand("eval", "PSNR and SSIM of a test image against a reference");
  v->add_option("--ref", ev.ref)->required();
  v->add_option("--test", ev.test)->required();
  v->add_option("--trim", ev.trim)->check(CLI::NonNegativeNumber);
  v->add_option("--out", ev.out)->required();
  v->add_option("--method", ev.method);
  v->add_option("--id", ev.id, "Image id (default: test file stem)");
  v->add_option("--mr", ev.mr);

  std::string manifest_in;
  auto* re = app.add_subcommand("rerun", "Repeat the run recorded in a manifest");
  re->add_option("manifest", manifest_in)->required();

  std::reverse(argv.begin(), argv.end());
  argv.pop_back();
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err);
  }

  if (re->parsed()) return rerun(manifest_in);

  CLI::App* sub = app.get_subcommands().front();
  RunManifest manifest(sub->get_name());
  record_args(*sub, manifest);
  if (t->parsed()) run_train(train, manifest);
  if (s->parsed()) run_sample(smp, manifest);
  if (k->parsed()) run_mask(msk, manifest);
  if (i->parsed()) run_inpaint(inp, manifest);
  if (e->parsed()) run_sense(sen, manifest);
  if (r->parsed()) run_recover(rec, manifest);
  if (v->parsed()) run_eval(ev, manifest);
  manifest.write(manifest.default_path());
  return 0;
}

}  // namespace
}  // namespace ride::cli

int main(int argc, char** argv) {
  try {
    return ride::cli::run(std::vector<std::string>(argv, argv + argc));
  } catch (const ride::VersionError& e) {
    std::fprintf(stderr, "ride: unsupported file version: %s\n", e.what());
  } catch (const ride::FormatError& e) {
    std::fprintf(stderr, "ride: malformed input: %s\n", e.what());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ride: error: %s\n", e.what());
  }
  return 1;
}
