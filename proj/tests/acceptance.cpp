// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit when a
// blocking criterion fails. Criterion 11 (throughput) is informational.

#include <chrono>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "dfst/correlation.hpp"
#include "dfst/featselect.hpp"
#include "dfst/harness.hpp"
#include "dfst/scale.hpp"
#include "oracles.hpp"

using namespace dfst;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  bool blocking;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::shared_ptr<const imaging::CnTable> cn_table() {
  static const auto t = std::make_shared<const imaging::CnTable>(imaging::synthetic_cn_table());
  return t;
}

double inf_norm(const Eigen::MatrixXd& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

// 1 ------------------------------------------------------------------------
Outcome inffs_closed_form() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  std::uniform_int_distribution<int> dim(1, 10);
  double worst60 = 0, worst400 = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int f = dim(rng);
    Eigen::MatrixXd a(f, f);
    for (auto& v : a.reshaped()) v = u(rng);
    const double r = 0.9 / featselect::spectral_radius(a);
    const Eigen::MatrixXd s = featselect::inffs_path_sums(a, r);
    worst60 = std::max(worst60, inf_norm(s - oracle::truncated_path_series(a, r, 60)));
    worst400 = std::max(worst400, inf_norm(s - oracle::truncated_path_series(a, r, 400)));
  }
  const double elapsed = seconds_since(start);
  // With r * rho = 0.9 the omitted tail after 60 terms is about 0.9^61 / 0.1 times the
  // Perron projector, i.e. ~1e-2, so the 1e-9 bound cannot hold for the 60-term sum.
  Outcome o;
  o.pass = worst60 <= 1e-9 && elapsed < 5.0;
  o.detail = fmt("max ||closed - series60||_inf = %.3e (tol 1e-9); vs 400 terms = %.3e; %.2f s", worst60, worst400,
                 elapsed);
  return o;
}

// 2 ------------------------------------------------------------------------
Outcome rank_one_ordering() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(1e-3, 1);
  std::uniform_int_distribution<int> dim(2, 10);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::VectorXd s(dim(rng));
    for (auto& v : s) v = u(rng);
    const Eigen::VectorXd e = featselect::inffs_energies(featselect::build_adjacency(s));
    const auto by_energy = featselect::select_top_k(e, static_cast<int>(s.size()));
    const auto by_relevance = featselect::select_top_k(s, static_cast<int>(s.size()));
    if (by_energy != by_relevance) ++mismatches;
  }
  return {mismatches == 0, fmt("%d / 1000 orderings differ", mismatches)};
}

// 3 ------------------------------------------------------------------------
Outcome metric_oracles() {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> count(2, 200);
  std::normal_distribution<double> n(0, 1);
  std::uniform_real_distribution<double> shift(-2, 2);
  double worst_f = 0, worst_p = 0, worst_c = 0;
  for (int trial = 0; trial < 200; ++trial) {
    featselect::ClassSamples s;
    s.positives.resize(count(rng), 10);
    s.negatives.resize(count(rng), 10);
    for (int c = 0; c < 10; ++c) {
      const double mu = shift(rng), sd = 0.1 + std::abs(shift(rng));
      for (Eigen::Index r = 0; r < s.positives.rows(); ++r) s.positives(r, c) = mu + sd * n(rng);
      for (Eigen::Index r = 0; r < s.negatives.rows(); ++r) s.negatives(r, c) = n(rng);
    }
    const featselect::MetricScores m = featselect::compute_metrics(s);
    for (int c = 0; c < 10; ++c) {
      const auto pos = oracle::column(s.positives, c), neg = oracle::column(s.negatives, c);
      const double f = oracle::fisher(pos, neg);
      worst_f = std::max(worst_f, std::abs(m.fisher(c) - f) / std::max(1.0, f));
      worst_p = std::max(worst_p, std::abs(m.ttest_p(c) - oracle::ttest_p(pos, neg)));
      worst_c = std::max(worst_c, std::abs(m.pearson(c) - oracle::pearson(pos, neg)));
    }
  }
  const bool ok = worst_f <= 1e-6 && worst_p <= 1e-6 && worst_c <= 1e-6;
  return {ok, fmt("max deviation fisher %.2e (rel), p %.2e, pearson %.2e (tol 1e-6)", worst_f, worst_p, worst_c)};
}

// 4 ------------------------------------------------------------------------
imaging::FeatureMap circular_shift(const imaging::FeatureMap& m, int dy, int dx) {
  imaging::FeatureMap out(m.height, m.width, m.num_channels());
  for (int c = 0; c < m.num_channels(); ++c)
    for (int y = 0; y < m.height; ++y)
      for (int x = 0; x < m.width; ++x)
        out.channel(c)((y + dy + m.height) % m.height, (x + dx + m.width) % m.width) = m.channel(c)(y, x);
  return out;
}

imaging::FeatureMap random_map(int h, int w, int c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0, 1);
  imaging::FeatureMap m(h, w, c);
  for (auto& ch : m.channels)
    for (Eigen::Index i = 0; i < ch.size(); ++i) ch.data()[i] = n(rng);
  return m;
}

Outcome filter_self_consistency() {
  int failures = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto x = random_map(32, 32, 3, seed);
    const RealPlane y = cft::gaussian_label(32, 32, 10, 10, 0.1);
    const ComplexPlane alpha = cft::train(x, y, 0.2, 1e-2);
    const auto same = cft::detect(x, alpha, x, 0.2);
    const auto moved = cft::detect(x, alpha, circular_shift(x, 2, 3), 0.2);
    if (same.shift_row != 0 || same.shift_col != 0 || moved.shift_row != 2 || moved.shift_col != 3) ++failures;
  }
  return {failures == 0, fmt("%d / 100 seeds wrong (expect (0,0) and (2,3))", failures)};
}

// 5 ------------------------------------------------------------------------
Outcome kernel_oracle() {
  double worst = 0;
  int maps = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    for (int h = 1; h <= 8; ++h)
      for (int w = 1; w <= 8; ++w)
        for (int c = 1; c <= 3; ++c) {
          const auto x = random_map(h, w, c, seed * 1000 + static_cast<std::uint64_t>(h * 100 + w * 10 + c));
          const auto z = random_map(h, w, c, seed * 7777 + static_cast<std::uint64_t>(h * 100 + w * 10 + c));
          const RealPlane k = cft::gaussian_kernel_correlation(x, z, 1.0);
          worst = std::max(worst, (k - oracle::brute_kernel_correlation(x, z, 1.0)).cwiseAbs().maxCoeff());
          ++maps;
        }
  }
  return {worst <= 1e-9, fmt("%d map pairs, max |fft - brute| = %.2e (tol 1e-9)", maps, worst)};
}

// 6 ------------------------------------------------------------------------
harness::SynthSpec translation_spec() {
  harness::SynthSpec spec;
  spec.name = "translation";
  spec.width = 320;
  spec.height = 240;
  spec.frames = 60;
  spec.target_w = 40;
  spec.target_h = 40;
  spec.start_cx = 50;
  spec.start_cy = 120;
  spec.velocity_x = 3;
  spec.textured_background = true;
  return spec;
}

Outcome projection_contract() {
  harness::SynthSpec spec = translation_spec();
  spec.frames = 100;
  spec.velocity_x = 1.5;
  spec.velocity_y = 0.4;
  spec.start_cx = 60;
  spec.start_cy = 100;
  const harness::Sequence seq = harness::synth_sequence(spec);
  const harness::RunResult run = harness::run_tracker(seq, cft::TrackerConfig{}, cn_table(), {true});
  double worst = 0, min_weight = 1e300;
  for (const auto& p : run.projections) {
    const Eigen::MatrixXd g = p.basis.transpose() * p.basis;
    worst = std::max(worst, (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff());
    min_weight = std::min(min_weight, p.weights.minCoeff());
  }
  const bool ok = run.projections.size() == 100 && worst <= 1e-8 && min_weight >= 0;
  return {ok, fmt("%zu updates, max |B^T B - I| = %.2e, min eigenvalue %.3e", run.projections.size(), worst,
                  min_weight)};
}

// 7 ------------------------------------------------------------------------
Outcome dictionary_learning() {
  const auto start = Clock::now();
  constexpr int m = 256;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0, 1);
  std::uniform_int_distribution<int> atom(0, 9), active(1, 3);
  std::vector<Eigen::VectorXd> truth;
  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXd v(m);
    for (auto& x : v) x = g(rng);
    truth.push_back(v.normalized());
  }
  std::vector<Eigen::VectorXd> patches;
  for (int i = 0; i < 500; ++i) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
    const int k = active(rng);
    for (int j = 0; j < k; ++j) x += (1.0 + std::abs(g(rng))) * (g(rng) < 0 ? -1 : 1) * truth[static_cast<std::size_t>(atom(rng))];
    for (auto& v : x) v += 0.01 * g(rng);
    patches.push_back(x.normalized());
  }

  Eigen::VectorXd random_seed(m);
  for (auto& x : random_seed) x = g(rng);
  const std::vector<Eigen::VectorXd> seeds{random_seed};
  scale::Dictionary dict = scale::init_dictionary(seeds, 50, 0.05, 200, 77);

  auto mean_error = [&](const scale::Dictionary& d) {
    double s = 0;
    for (const auto& x : patches) s += scale::reconstruction_error(x, d);
    return s / static_cast<double>(patches.size());
  };
  const double initial = mean_error(dict);

  double worst_rise = 0;
  for (const auto& x : patches) {
    double last = 0;
    scale::dict_update(dict, x, [&](const scale::Dictionary& d, int sweep) {
      const double obj = scale::surrogate_objective(d);
      if (sweep > 0) worst_rise = std::max(worst_rise, obj - last);
      last = obj;
    });
  }
  const double final_error = mean_error(dict);
  const double elapsed = seconds_since(start);
  const bool ok = worst_rise <= 1e-8 && final_error <= 0.5 * initial && elapsed < 30.0;
  return {ok, fmt("largest surrogate rise %.2e (tol 1e-8); error %.4f -> %.4f (ratio %.3f, need <= 0.5); %.1f s",
                  worst_rise, initial, final_error, final_error / initial, elapsed)};
}

// 8 ------------------------------------------------------------------------
Outcome translation_tracking() {
  const harness::Sequence seq = harness::synth_sequence(translation_spec());
  const harness::RunResult a = harness::run_tracker(seq, cft::TrackerConfig{}, cn_table());
  const harness::RunResult b = harness::run_tracker(seq, cft::TrackerConfig{}, cn_table());
  const harness::MetricsReport r = harness::evaluate(a, seq);
  double min_iou = 1;
  for (std::size_t i = 1; i < a.per_frame_iou.size(); ++i) min_iou = std::min(min_iou, a.per_frame_iou[i]);
  const bool deterministic = a.boxes == b.boxes;
  const bool ok = r.mean_iou >= 0.70 && r.failures == 0 && min_iou > 0 && deterministic;
  return {ok, fmt("mean IoU %.4f (need >= 0.70), min IoU %.4f, failures %d, deterministic %s", r.mean_iou, min_iou,
                  r.failures, deterministic ? "yes" : "no")};
}

// 9 ------------------------------------------------------------------------
Outcome scale_tracking() {
  harness::SynthSpec spec = translation_spec();
  spec.name = "scale";
  spec.frames = 50;
  spec.velocity_x = 0;
  spec.start_cx = 160;
  spec.scale_rate = 0.01;
  const harness::Sequence seq = harness::synth_sequence(spec);

  const harness::RunResult on = harness::run_tracker(seq, cft::TrackerConfig{}, cn_table());
  cft::TrackerConfig fixed;
  fixed.scale_adapt = false;
  const harness::RunResult off = harness::run_tracker(seq, fixed, cn_table());

  const double gt_area = seq.groundtruth.back().area();
  const double on_ratio = on.boxes.back().area() / gt_area;
  const double off_ratio = gt_area / off.boxes.back().area();
  const double expected_off = std::pow(1.01, 2 * (spec.frames - 1));
  const bool off_fixed = off.boxes.back().w == seq.groundtruth.front().w && off.boxes.back().h == seq.groundtruth.front().h;
  const bool ok = std::abs(on_ratio - 1.0) <= 0.25 && off_fixed && std::abs(off_ratio / expected_off - 1.0) < 1e-9;
  return {ok, fmt("scale on: final pred/gt area %.3f (need 0.75..1.25); scale off: gt/pred area %.3f = 1.01^%d "
                  "(fixed size %s); mean IoU on %.3f / off %.3f",
                  on_ratio, off_ratio, 2 * (spec.frames - 1), off_fixed ? "yes" : "no",
                  harness::evaluate(on, seq).mean_iou, harness::evaluate(off, seq).mean_iou)};
}

// 10 -----------------------------------------------------------------------
harness::SynthSpec distractor_spec(std::uint64_t seed) {
  harness::SynthSpec spec;
  spec.name = "distractor";
  spec.frames = 60;
  spec.start_cx = 140;
  spec.start_cy = 50;
  spec.velocity_y = 2.2;
  spec.target_color = {200, 40, 40};  // luminance ~87.8
  harness::Distractor d;
  d.offset_x = 42;  // edge to edge gap of 2 px
  d.offset_y = 60;
  d.w = 40;
  d.h = 40;
  d.color = {40, 120, 40};  // luminance ~87.0, different hue
  d.textured = true;
  spec.distractor = d;
  spec.seed = seed;
  return spec;
}

Outcome selection_ablation() {
  std::printf("     seed | IoU k=8 | IoU all 10 | fail k=8 | fail all\n");
  double sum_sel = 0, sum_all = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const harness::Sequence seq = harness::synth_sequence(distractor_spec(seed));
    cft::TrackerConfig sel;
    sel.num_selected = 8;
    cft::TrackerConfig all;
    all.num_selected = 10;
    const auto rs = harness::evaluate(harness::run_tracker(seq, sel, cn_table()), seq);
    const auto ra = harness::evaluate(harness::run_tracker(seq, all, cn_table()), seq);
    sum_sel += rs.mean_iou;
    sum_all += ra.mean_iou;
    std::printf("     %4d | %7.4f | %10.4f | %8d | %8d\n", static_cast<int>(seed), rs.mean_iou, ra.mean_iou,
                rs.failures, ra.failures);
  }
  const double ms = sum_sel / 10, ma = sum_all / 10;
  return {ms >= ma, fmt("mean over 10 scenes: selected %.4f vs all features %.4f", ms, ma)};
}

// 11 -----------------------------------------------------------------------
Outcome throughput() {
  const harness::Sequence seq = harness::synth_sequence(translation_spec());
  const harness::RunResult r = harness::run_tracker(seq, cft::TrackerConfig{}, cn_table());
  return {r.fps >= 10.0, fmt("%.1f tracker-only fps, %.1f end-to-end (target >= 10; original environment 16.53)",
                             r.fps, r.fps_end_to_end)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "path-sum closed form vs 60-term series", true, inffs_closed_form},
      {2, "rank-one energy ordering", true, rank_one_ordering},
      {3, "Fisher / t-test / Pearson vs direct formulas", true, metric_oracles},
      {4, "correlation filter self-consistency", true, filter_self_consistency},
      {5, "Gaussian kernel vs brute-force correlation", true, kernel_oracle},
      {6, "projection orthonormality over 100 frames", true, projection_contract},
      {7, "online dictionary learning", true, dictionary_learning},
      {8, "synthetic translation tracking", true, translation_tracking},
      {9, "synthetic scale tracking", true, scale_tracking},
      {10, "feature-selection ablation with distractor", true, selection_ablation},
      {11, "throughput (informational)", false, throughput},
  };

  int blocking_failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const char* tag = o.pass ? "PASS" : (c.blocking ? "FAIL" : "FAIL (non-blocking)");
    std::printf("[%s] %2d %s: %s\n", tag, c.id, c.title.c_str(), o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass && c.blocking) ++blocking_failures;
  }
  std::printf("%d blocking criterion failure(s)\n", blocking_failures);
  return blocking_failures == 0 ? 0 : 1;
}
