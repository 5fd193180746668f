#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dfst/errors.hpp"
#include "dfst/harness.hpp"

namespace fs = std::filesystem;
using namespace dfst;

namespace {

struct RunArgs {
  std::string sequence;
  std::string synthetic;
  std::string cn_table;
  std::string config;
  std::string output = "dfst_out";
  std::vector<std::string> overrides;
  bool render = false;
  bool dump_ranking = false;
};

int cmd_run(const RunArgs& a) {
  if (a.sequence.empty() == a.synthetic.empty()) throw UsageError("give exactly one of --sequence or --synthetic");

  cft::TrackerConfig cfg;
  harness::Settings settings;
  if (!a.config.empty()) settings = harness::load_settings(a.config);
  for (const auto& text : a.overrides) {
    auto [key, value] = harness::parse_assignment(text);
    settings[key] = value;
  }
  harness::apply_settings(cfg, settings);
  cfg.validate();

  const auto cn = std::make_shared<const imaging::CnTable>(imaging::load_cn_table(a.cn_table));
  const harness::Sequence seq = a.synthetic.empty()
                                    ? harness::load_sequence(a.sequence)
                                    : harness::synth_sequence(harness::load_synth_spec(a.synthetic));

  harness::RunOptions options;
  options.record_rankings = a.dump_ranking;
  const harness::RunResult result = harness::run_tracker(seq, cfg, cn, options);
  const harness::MetricsReport report = harness::evaluate(result, seq);

  const fs::path out(a.output);
  fs::create_directories(out);
  harness::write_results(result.boxes, out / "results.txt");
  harness::write_report(report, &result, out / "report.json");
  if (a.dump_ranking) {
    std::ofstream csv(out / "ranking.csv");
    if (!csv) throw DataError("cannot write " + (out / "ranking.csv").string());
    for (std::size_t i = 0; i < result.rankings.size(); ++i) {
      csv << harness::ranking_csv_line(static_cast<int>(i + 1), result.rankings[i]) << '\n';
    }
  }
  if (a.render) harness::render_overlay(seq, result, out / "render");

  std::printf("%s: %zu frames, mean IoU %.4f, precision@20 %.4f, failures %d, %.1f fps\n", seq.name.c_str(),
              seq.size(), report.mean_iou, report.precision_20, report.failures, result.fps);
  return 0;
}

int cmd_synth(const std::string& spec_path, const std::string& out) {
  const harness::Sequence seq = harness::synth_sequence(harness::load_synth_spec(spec_path));
  harness::write_sequence(seq, out);
  std::printf("wrote %zu frames to %s\n", seq.size(), out.c_str());
  return 0;
}

int cmd_metrics(const std::string& results, const std::string& groundtruth) {
  const auto pred = harness::read_boxes(results);
  const auto gt = harness::read_boxes(groundtruth);
  std::cout << harness::report_json(harness::evaluate(pred, gt), nullptr).dump(2) << '\n';
  return 0;
}

int cmd_cn_table(const std::string& out) {
  imaging::save_cn_table(imaging::synthetic_cn_table(), out);
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic feature selection tracker"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Track a sequence and write results, report and overlays");
  run_cmd->add_option("--sequence", run.sequence, "Directory with frames and groundtruth.txt");
  run_cmd->add_option("--synthetic", run.synthetic, "Synthetic sequence spec (JSON) instead of --sequence");
  run_cmd->add_option("--cn-table", run.cn_table, "Color-name table (.csv or .bin)")->required();
  run_cmd->add_option("--config", run.config, "Settings file (key = value lines, or JSON)");
  run_cmd->add_option("--set", run.overrides, "Override a setting, key=value (repeatable)");
  run_cmd->add_option("--output", run.output, "Output directory")->capture_default_str();
  run_cmd->add_flag("--render", run.render, "Write overlay frames");
  run_cmd->add_flag("--dump-ranking", run.dump_ranking, "Write per-frame feature ranking CSV");

  std::string spec_path, synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Render a synthetic sequence");
  synth_cmd->add_option("--spec", spec_path, "Spec file (JSON)")->required();
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();

  std::string results_path, gt_path;
  auto* metrics_cmd = app.add_subcommand("metrics", "Score a results file against annotations");
  metrics_cmd->add_option("--results", results_path)->required();
  metrics_cmd->add_option("--groundtruth", gt_path)->required();

  std::string table_out;
  auto* table_cmd = app.add_subcommand("cn-table", "Write the built-in synthetic color-name table");
  table_cmd->add_option("--out", table_out, "Output path (.csv or .bin)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*synth_cmd) return cmd_synth(spec_path, synth_out);
    if (*metrics_cmd) return cmd_metrics(results_path, gt_path);
    if (*table_cmd) return cmd_cn_table(table_out);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
