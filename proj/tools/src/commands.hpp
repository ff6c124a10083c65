#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "manifest.hpp"

namespace ride::cli {

inline constexpr int kMaxDensePixels = 16384;

struct TrainOptions {
  std::string data;
  std::string out;
  int epochs = 8;
  int patch_start = 8;
  int patch_end = 22;
  int patch_step = 2;
  double lr = 1e-4;
  double lr_decay = 0.5;
  int batch = 16;
  int patches = 1024;
  int hidden = 64;
  int components = 12;
  int scales = 4;
  std::uint64_t seed = 0;
};

struct SampleOptions {
  std::string model;
  std::string size;
  std::string out;
  std::uint64_t seed = 0;
};

struct MaskOptions {
  std::string in;
  double fraction = 0.7;
  std::uint64_t seed = 0;
  std::string out_masked;
  std::string out_mask;
};

struct InpaintOptions {
  std::string model;
  std::string in;
  std::string mask;
  std::string out;
  int iters = 300;
  double eta = 1e-4;
  double momentum = 0.9;
  double tau = 3.5;
  int directions = 4;
  std::uint64_t seed = 0;
  std::string trace;
};

struct SenseOptions {
  std::string in;
  std::string op = "gaussian";
  double mr = 0.4;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::string out_y;
  std::string out_op;
};

struct RecoverOptions {
  std::string model;
  std::string y;
  std::string op;
  std::string out;
  std::string mode = "auto";
  int iters = 0;  // 0: 300 at mr >= 0.25, else 400
  double eta = 1e-4;
  double momentum = 0.9;
  double tau = 3.5;
  std::optional<double> lambda;
  int directions = 4;
  std::uint64_t seed = 0;
  std::string trace;
  std::string out_baseline;
};

struct EvalOptions {
  std::string ref;
  std::string test;
  int trim = 2;
  std::string out;
  std::string method = "ride";
  std::string id;
  double mr = 1.0;
};

void run_train(const TrainOptions& o, RunManifest& m);
void run_sample(const SampleOptions& o, RunManifest& m);
void run_mask(const MaskOptions& o, RunManifest& m);
void run_inpaint(const InpaintOptions& o, RunManifest& m);
void run_sense(const SenseOptions& o, RunManifest& m);
void run_recover(const RecoverOptions& o, RunManifest& m);
void run_eval(const EvalOptions& o, RunManifest& m);

}  // namespace ride::cli
