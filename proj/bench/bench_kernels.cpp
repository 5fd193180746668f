// Parallel kernels against their single-threaded references.

#include <benchmark/benchmark.h>

#include <random>

#include "dfst/correlation.hpp"
#include "dfst/imaging.hpp"
#include "dfst/scale.hpp"

using namespace dfst;

namespace {

imaging::FeatureMap random_map(int h, int w, int c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  imaging::FeatureMap m(h, w, c);
  for (auto& ch : m.channels)
    for (Eigen::Index i = 0; i < ch.size(); ++i) ch.data()[i] = n(rng);
  return m;
}

imaging::Image random_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> u(0, 255);
  imaging::Image img(w, h);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(u(rng));
  return img;
}

const imaging::CnTable& table() {
  static const imaging::CnTable t = imaging::synthetic_cn_table();
  return t;
}

void BM_KernelParallel(benchmark::State& st) {
  const auto x = random_map(95, 95, 11, 1), z = random_map(95, 95, 11, 2);
  for (auto _ : st) benchmark::DoNotOptimize(cft::gaussian_kernel_correlation(x, z, 0.2));
}

void BM_KernelSerial(benchmark::State& st) {
  const auto x = random_map(95, 95, 11, 1), z = random_map(95, 95, 11, 2);
  for (auto _ : st) benchmark::DoNotOptimize(cft::serial::gaussian_kernel_correlation(x, z, 0.2));
}

void BM_FeatureMapParallel(benchmark::State& st) {
  const auto patch = random_image(95, 95, 3);
  for (auto _ : st) benchmark::DoNotOptimize(imaging::build_feature_map(patch, table()));
}

void BM_FeatureMapSerial(benchmark::State& st) {
  const auto patch = random_image(95, 95, 3);
  for (auto _ : st) benchmark::DoNotOptimize(imaging::serial::build_feature_map(patch, table()));
}

struct SelectFixture {
  imaging::Image frame = random_image(320, 240, 4);
  scale::Dictionary dict;
  scale::CandidateSet cands;

  SelectFixture() {
    const imaging::BoundingBox box{160, 120, 40, 40};
    std::vector<Eigen::VectorXd> seeds{scale::patch_vector(frame, box, 16)};
    dict = scale::init_dictionary(seeds, 250, 0.05, 200, 1);
    const std::vector<double> scales{0.95, 1.0, 1.05}, shifts{-2, 0, 2};
    cands = scale::generate_candidates(box, scales, shifts);
  }
};

void BM_SelectBoxParallel(benchmark::State& st) {
  const SelectFixture f;
  for (auto _ : st) benchmark::DoNotOptimize(scale::select_box(f.frame, f.cands, f.dict, 16));
}

void BM_SelectBoxSerial(benchmark::State& st) {
  const SelectFixture f;
  for (auto _ : st) benchmark::DoNotOptimize(scale::serial::select_box(f.frame, f.cands, f.dict, 16));
}

}  // namespace

BENCHMARK(BM_KernelParallel)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_KernelSerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_FeatureMapParallel)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_FeatureMapSerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SelectBoxParallel)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SelectBoxSerial)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
