#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "dfst/errors.hpp"
#include "dfst/harness.hpp"
#include "test_support.hpp"

using namespace dfst;
using namespace dfst::harness;

namespace {

std::shared_ptr<const imaging::CnTable> cn() {
  static const auto table = std::make_shared<const imaging::CnTable>(imaging::synthetic_cn_table());
  return table;
}

BoundingBox random_box(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(0, 100), ext(1, 40);
  return {pos(rng), pos(rng), ext(rng), ext(rng)};
}

}  // namespace

TEST(Iou, SymmetricBoundedAndExactOnEquality) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 500; ++i) {
    const BoundingBox a = random_box(rng), b = random_box(rng);
    const double o = iou(a, b);
    ASSERT_EQ(o, iou(b, a));
    ASSERT_GE(o, 0.0);
    ASSERT_LE(o, 1.0);
    ASSERT_EQ(iou(a, a), 1.0);
    if (!(a == b)) ASSERT_LT(o, 1.0);
  }
  EXPECT_EQ(iou({0, 0, 2, 2}, {10, 10, 2, 2}), 0.0);
  EXPECT_NEAR(iou(BoundingBox::from_top_left(0, 0, 2, 2), BoundingBox::from_top_left(1, 0, 2, 2)), 1.0 / 3, 1e-15);
}

TEST(Metrics, PerfectPrediction) {
  std::vector<BoundingBox> gt{{10, 10, 4, 4}, {12, 10, 4, 4}, {14, 11, 5, 4}};
  const MetricsReport r = evaluate(gt, gt);
  EXPECT_EQ(r.mean_iou, 1.0);
  EXPECT_EQ(r.precision_20, 1.0);
  EXPECT_EQ(r.failures, 0);
  EXPECT_EQ(r.frames_evaluated, 2);
}

TEST(Metrics, InvalidAnnotationsAreExcluded) {
  const double nan = std::nan("");
  std::vector<BoundingBox> gt{{10, 10, 4, 4}, {nan, nan, nan, nan}, {14, 11, 0, 0}, {20, 20, 4, 4}};
  std::vector<BoundingBox> pred{{10, 10, 4, 4}, {0, 0, 1, 1}, {0, 0, 1, 1}, {100, 100, 4, 4}};
  const MetricsReport r = evaluate(pred, gt);
  EXPECT_EQ(r.frames_evaluated, 1);
  EXPECT_EQ(r.failures, 1);
  EXPECT_EQ(r.mean_iou, 0.0);
  EXPECT_THROW(evaluate(pred, std::vector<BoundingBox>(2)), DataError);
}

TEST(BoxParsing, RectanglesPolygonsAndSpecialValues) {
  EXPECT_EQ(parse_box_line("10,20,30,40"), BoundingBox::from_top_left(10, 20, 30, 40));
  EXPECT_EQ(parse_box_line("1,1, 5,1, 5,4, 1,4"), (BoundingBox{3, 2.5, 4, 3}));
  EXPECT_FALSE(parse_box_line("NaN,NaN,NaN,NaN").valid());
  EXPECT_FALSE(parse_box_line("0,0,0,0").valid());
  EXPECT_THROW(parse_box_line("1,2,3"), DataError);
  EXPECT_THROW(parse_box_line("1,2,x,4"), DataError);
}

TEST(BoxParsing, ErrorNamesLine) {
  const auto dir = fixtures::scratch_dir("boxes");
  std::ofstream(dir / "gt.txt") << "1,2,3,4\n1,2,3,4\nbad\n";
  try {
    read_boxes(dir / "gt.txt");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Results, RoundTripPreservesBoxesToQuantization) {
  const auto dir = fixtures::scratch_dir("results");
  std::mt19937_64 rng(3);
  std::vector<BoundingBox> boxes;
  for (int i = 0; i < 50; ++i) boxes.push_back(random_box(rng));
  write_results(boxes, dir / "r.txt");
  const auto back = read_boxes(dir / "r.txt");
  ASSERT_EQ(back.size(), boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    ASSERT_NEAR(back[i].left(), boxes[i].left(), 0.005 + 1e-9);
    ASSERT_NEAR(back[i].w, boxes[i].w, 0.005 + 1e-9);
  }
  std::ifstream in(dir / "r.txt");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(std::count(line.begin(), line.end(), ','), 3);
  EXPECT_EQ(line.size() - line.rfind('.'), 3u);
}

TEST(Sequence, WriteAndLoadRoundTrip) {
  SynthSpec spec;
  spec.frames = 4;
  spec.width = 64;
  spec.height = 48;
  spec.target_w = 10;
  spec.target_h = 12;
  spec.velocity_x = 1.25;
  const Sequence seq = synth_sequence(spec);
  const auto dir = fixtures::scratch_dir("seq");
  write_sequence(seq, dir);
  const Sequence back = load_sequence(dir);
  ASSERT_EQ(back.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    ASSERT_EQ(back.frame(i), seq.frame(i));
    ASSERT_NEAR(back.groundtruth[i].cx, seq.groundtruth[i].cx, 0.01);
  }
}

TEST(Sequence, LoadErrors) {
  const auto dir = fixtures::scratch_dir("seq_err");
  EXPECT_THROW(load_sequence(dir / "nope"), DataError);
  EXPECT_THROW(load_sequence(dir), DataError);  // missing groundtruth
  imaging::save_image(imaging::Image(8, 8), dir / "00000001.png");
  imaging::save_image(imaging::Image(8, 8), dir / "00000002.png");
  std::ofstream(dir / "groundtruth.txt") << "1,1,3,3\n";
  try {
    load_sequence(dir);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("count mismatch"), std::string::npos);
  }
  std::ofstream(dir / "00000002.png") << "not a png";
  std::ofstream(dir / "groundtruth.txt") << "1,1,3,3\n1,1,3,3\n";
  const Sequence seq = load_sequence(dir);
  try {
    seq.frame(1);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("frame 2"), std::string::npos);
  }
}

TEST(Synth, GroundTruthFollowsSpec) {
  SynthSpec spec;
  spec.frames = 10;
  spec.velocity_x = 3;
  spec.scale_rate = 0.01;
  const Sequence seq = synth_sequence(spec);
  EXPECT_EQ(seq.groundtruth[0], (BoundingBox{160, 120, 40, 40}));
  EXPECT_NEAR(seq.groundtruth[9].cx, 160 + 27, 1e-12);
  EXPECT_NEAR(seq.groundtruth[9].w, 40 * std::pow(1.01, 9), 1e-12);
  // Target color dominates the center of the box.
  const auto* p = seq.frame(0).at(160, 120);
  EXPECT_GT(p[0], p[1]);
}

TEST(Synth, DeterministicAndSeedSensitive) {
  SynthSpec spec;
  spec.frames = 3;
  const Sequence a = synth_sequence(spec);
  const Sequence b = synth_sequence(spec);
  EXPECT_EQ(a.frame(2), b.frame(2));
  spec.seed = 2;
  EXPECT_FALSE(synth_sequence(spec).frame(0) == a.frame(0));
}

TEST(Synth, TargetLeavingFrameIsRejected) {
  SynthSpec spec;
  spec.frames = 100;
  spec.velocity_x = 5;
  EXPECT_THROW(synth_sequence(spec), DataError);
}

TEST(Synth, SpecJsonRoundTrip) {
  SynthSpec spec;
  spec.velocity_y = -1.5;
  spec.distractor = Distractor{30, 0, 0.5, 0, 20, 20, {10, 200, 10}, false};
  const SynthSpec back = synth_spec_from_json(to_json(spec));
  EXPECT_EQ(back.velocity_y, -1.5);
  ASSERT_TRUE(back.distractor.has_value());
  EXPECT_EQ(back.distractor->velocity_x, 0.5);
  EXPECT_EQ(back.distractor->color[1], 200);
  EXPECT_FALSE(back.distractor->textured);
}

TEST(Settings, KeyValueFileAndOverrides) {
  const auto dir = fixtures::scratch_dir("settings");
  std::ofstream(dir / "cfg.toml") << "# tracker\nnum_selected = 6\npadding = 2.0\n[scale]\natoms = 50\nscales = [0.9, 1.0, 1.1]\n";
  cft::TrackerConfig cfg;
  Settings s = load_settings(dir / "cfg.toml");
  const auto [k, v] = parse_assignment("scale_adapt=false");
  s[k] = v;
  apply_settings(cfg, s);
  EXPECT_EQ(cfg.num_selected, 6);
  EXPECT_EQ(cfg.padding, 2.0);
  EXPECT_EQ(cfg.scale.atoms, 50);
  EXPECT_EQ(cfg.scale.scales, (std::vector<double>{0.9, 1.0, 1.1}));
  EXPECT_FALSE(cfg.scale_adapt);
  EXPECT_THROW(apply_settings(cfg, {{"bogus", "1"}}), UsageError);
  EXPECT_THROW(apply_settings(cfg, {{"num_selected", "x"}}), UsageError);
}

TEST(Settings, JsonFile) {
  const auto dir = fixtures::scratch_dir("settings_json");
  std::ofstream(dir / "cfg.json") << R"({"lr_dim": 0.2, "inffs_decay": null, "scale": {"damping": 0.5}})";
  cft::TrackerConfig cfg;
  apply_settings(cfg, load_settings(dir / "cfg.json"));
  EXPECT_EQ(cfg.lr_dim, 0.2);
  EXPECT_FALSE(cfg.inffs_decay.has_value());
  EXPECT_EQ(cfg.scale.damping, 0.5);
  const nlohmann::json j = to_json(cfg);
  EXPECT_EQ(j["scale"]["damping"], 0.5);
}

TEST(Report, JsonHasRequiredFields) {
  MetricsReport r{0.75, 0.9, 2, 40};
  RunResult run;
  run.fps = 30;
  run.config_snapshot = to_json(cft::TrackerConfig{});
  const nlohmann::json j = nlohmann::json::parse(report_json(r, &run).dump());
  for (const char* key : {"mean_iou", "precision_20", "failures", "fps", "config"}) EXPECT_TRUE(j.contains(key)) << key;
}

TEST(Runner, ShortSyntheticRun) {
  SynthSpec spec;
  spec.frames = 12;
  spec.velocity_x = 2;
  const Sequence seq = synth_sequence(spec);
  const RunResult run = run_tracker(seq, cft::TrackerConfig{}, cn(), {true});
  ASSERT_EQ(run.boxes.size(), 12u);
  ASSERT_EQ(run.rankings.size(), 12u);
  EXPECT_EQ(run.boxes[0], seq.groundtruth[0]);
  EXPECT_GT(evaluate(run, seq).mean_iou, 0.5);
  const std::string line = ranking_csv_line(3, run.rankings[2]);
  EXPECT_EQ(std::count(line.begin(), line.end(), ','), 4 * 11 + 8);
}

TEST(Render, DrawsOutlineInsideFrame) {
  imaging::Image img(20, 20);
  draw_box(img, BoundingBox::from_top_left(5, 5, 10, 10), {255, 0, 0});
  EXPECT_EQ(img.at(5, 5)[0], 255);
  EXPECT_EQ(img.at(14, 14)[0], 255);
  EXPECT_EQ(img.at(10, 10)[0], 0);
  draw_box(img, BoundingBox::from_top_left(-5, -5, 50, 50), {0, 255, 0});  // clipped, no crash
}
