// fairscope: gender-fairness audits for expression classifiers.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fairscope/audit.hpp"
#include "fairscope/dataset.hpp"
#include "fairscope/error.hpp"
#include "fairscope/fairness.hpp"
#include "fairscope/image.hpp"
#include "fairscope/metrics.hpp"
#include "fairscope/preprocess.hpp"
#include "fairscope/random.hpp"
#include "fairscope/records.hpp"

namespace fs = std::filesystem;
using namespace fairscope;

namespace {

metrics::MetricTable LoadMetrics(const std::string& path) {
  std::istringstream in(audit::ReadFile(path));
  return metrics::ReadMetricCsv(in);
}

void WriteOrPrint(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    audit::WriteFileAtomic(path, content);
  }
}

std::string ClipId(const std::string& explicit_id, const fs::path& dir) {
  if (!explicit_id.empty()) return explicit_id;
  const fs::path clean = dir.has_filename() ? dir : dir.parent_path();
  return clean.filename().string();
}

int RunIngest(const std::string& path, bool fuse, const std::string& out) {
  std::istringstream in(audit::ReadFile(path));
  const auto set = records::Ingest(in, fuse);
  std::set<std::string> models;
  std::set<std::string> regimes;
  for (const auto& r : set.records()) {
    models.insert(r.model_id);
    regimes.insert(std::string(records::Name(r.regime)));
  }
  nlohmann::ordered_json summary{{"records", set.size()},
                                 {"taxonomy", records::Name(set.taxonomy())},
                                 {"mode", set.score_mode() ? "score" : "label"},
                                 {"models", models},
                                 {"regimes", regimes}};
  if (!out.empty()) {
    std::ostringstream csv;
    records::Emit(set, csv);
    audit::WriteFileAtomic(out, csv.str());
  }
  std::cout << summary.dump(2) << '\n';
  return audit::kExitOk;
}

int RunAudit(const std::string& path, const std::string& out, const std::string& csv_dir,
             const fairness::GapOptions& gap_options) {
  const auto report = audit::RunAudit(fs::path(path), audit::AuditOptions{gap_options});
  std::ostringstream json;
  audit::EmitJson(report, json);
  WriteOrPrint(out, json.str());
  if (!csv_dir.empty()) {
    std::ostringstream m, g, s;
    audit::EmitMetricsCsv(report, m);
    audit::EmitGapsCsv(report, g);
    audit::EmitStatsCsv(report, s);
    audit::WriteFileAtomic(fs::path(csv_dir) / "metrics.csv", m.str());
    audit::WriteFileAtomic(fs::path(csv_dir) / "gaps.csv", g.str());
    audit::WriteFileAtomic(fs::path(csv_dir) / "stats.csv", s.str());
  }
  for (const auto& e : report.errors) std::cerr << "audit: " << e << '\n';
  return report.complete() ? audit::kExitOk : audit::kExitInputError;
}

int RunGaps(const std::string& path, const std::string& definition, const std::string& regime,
            bool rank, const std::string& format, const fairness::GapOptions& options) {
  const auto table = LoadMetrics(path);
  const auto report = fairness::ComputeGaps(table, records::ParseRegime(regime),
                                            fairness::ParseDefinition(definition), options);
  if (format == "csv") {
    fairness::WriteGapCsvHeader(std::cout);
    fairness::WriteGapCsvRows(report, std::cout);
    return audit::kExitOk;
  }
  auto j = fairness::ToJson(report, fairness::Rank(report));
  if (!rank) j.erase("ranking");
  std::cout << j.dump(2) << '\n';
  return audit::kExitOk;
}

int RunSplit(const std::string& path, const dataset::SplitConfig& config, const std::string& out) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  const auto manifest = dataset::LoadManifest(in);
  for (const auto& w : manifest.warnings) std::cerr << "warning: " << w << '\n';
  const auto split = dataset::MakeSplit(manifest, config);
  WriteOrPrint(out, dataset::ToJson(split).dump(2) + "\n");
  return audit::kExitOk;
}

int RunKeyframes(const std::string& clip_dir, const preprocess::KeyframeConfig& config,
                 std::uint64_t seed, const std::string& video_id, std::size_t subsample,
                 const std::string& out) {
  const auto clip = image::ReadClip(clip_dir);
  const std::string id = ClipId(video_id, clip_dir);
  auto indices = preprocess::SelectKeyframes(clip, config, DeriveSeed(seed, id));
  if (subsample > 0) indices = preprocess::Subsample(indices, subsample);
  WriteOrPrint(out, preprocess::KeyframesToJson(id, config, indices).dump(2) + "\n");
  return audit::kExitOk;
}

int RunAugment(const std::string& clip_dir, std::uint64_t seed, const std::string& video_id,
               const std::string& out_dir) {
  const auto clip = image::ReadClip(clip_dir);
  const std::string id = ClipId(video_id, clip_dir);
  const auto plan = preprocess::PlanAugmentation(DeriveSeed(seed, id));
  image::WriteClip(out_dir, preprocess::ApplyAugmentation(plan, clip));
  const nlohmann::ordered_json j{{"video_id", id},
                                 {"seed", seed},
                                 {"flip", plan.flip},
                                 {"rotate", plan.rotate},
                                 {"angle_degrees", plan.angle_degrees},
                                 {"brighten", plan.brighten},
                                 {"factor", plan.factor},
                                 {"frames", clip.frames.size()}};
  std::cout << j.dump(2) << '\n';
  return audit::kExitOk;
}

int RunStats(const std::string& path, const std::string& regime, const std::string& set) {
  const auto table = LoadMetrics(path);
  const auto r = records::ParseRegime(regime);
  const auto g = metrics::ParseGroup(set);
  nlohmann::ordered_json j{{"regime", records::Name(r)}, {"test_set", metrics::Name(g)}};
  j.update(audit::ToJson(audit::AggregateStats(table, r, g)));
  std::cout << j.dump(2) << '\n';
  return audit::kExitOk;
}

int RunVerifyPaper(const std::string& json_out) {
  const auto v = audit::VerifyPaper();
  std::cout << "fixture " << v.fixture.origin << " sha256 " << v.fixture.sha256 << '\n';
  std::cout << "integrity " << v.integrity.consistent << "/" << v.integrity.cells.size()
            << " cells reconstruct consistently\n";
  for (const auto& c : v.claims.claims) {
    std::cout << (c.matches() ? "ok   " : "FAIL ") << c.id << ": " << fairness::Name(c.verdict)
              << " (expected " << fairness::Name(c.expected) << ")\n      " << c.evidence
              << '\n';
  }
  std::cout << v.claims.CountVerdict(fairness::ClaimStatus::kReproduced) << " reproduced, "
            << v.claims.CountVerdict(fairness::ClaimStatus::kNotReproduced)
            << " not reproduced; " << (v.passed() ? "PASS" : "FAIL") << '\n';
  if (!json_out.empty()) WriteOrPrint(json_out, audit::ToJson(v).dump(2) + "\n");
  return v.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fairscope: gender-fairness audit toolkit for facial expression classifiers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(audit::ToolVersion()));

  std::string records_path, out, metrics_path, manifest_path, clip_dir, csv_dir, json_out;
  std::string definition, regime, set_name, preset_name = "k10", video_id, format = "json";
  std::string aggregation = "mean", eqod_combine = "mean";
  bool fuse = false, rank = false;
  std::uint64_t seed = 0;
  std::size_t subsample = 0, skip = 0;
  std::vector<std::size_t> quotas;
  dataset::SplitConfig split_config;
  std::optional<double> val_fraction;

  auto* ingest = app.add_subcommand("ingest", "Validate a prediction CSV and summarize it");
  ingest->add_option("--records", records_path, "Prediction CSV")->required()->check(CLI::ExistingFile);
  ingest->add_flag("--fuse", fuse, "Collapse 6-way labels/scores into the 4-class taxonomy");
  ingest->add_option("--out", out, "Write the normalized CSV here");

  auto add_gap_options = [&](CLI::App* cmd) {
    cmd->add_option("--aggregation", aggregation, "Per-model aggregation of class gaps")
        ->check(CLI::IsMember({"mean", "max"}));
    cmd->add_option("--eqod-combine", eqod_combine, "Combination of TPR and FPR gaps")
        ->check(CLI::IsMember({"mean", "max", "sum"}));
  };

  auto* audit_cmd = app.add_subcommand("audit", "Metrics, gaps, rankings and stats for predictions");
  audit_cmd->add_option("--records", records_path, "Prediction CSV")->required()->check(CLI::ExistingFile);
  audit_cmd->add_option("--out", out, "Report JSON path")->required();
  audit_cmd->add_option("--csv-dir", csv_dir, "Also write metrics.csv, gaps.csv, stats.csv here");
  add_gap_options(audit_cmd);

  auto* gaps = app.add_subcommand("gaps", "Fairness gaps from a metric CSV");
  gaps->add_option("--metrics", metrics_path, "Metric CSV")->required()->check(CLI::ExistingFile);
  gaps->add_option("--definition", definition)->required()->check(CLI::IsMember({"dp", "eqop", "eqod"}));
  gaps->add_option("--regime", regime)->required()->check(CLI::IsMember({"regular", "female", "male"}));
  gaps->add_flag("--rank", rank, "Include the model ranking");
  gaps->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));
  add_gap_options(gaps);

  auto* split = app.add_subcommand("split", "Subject-disjoint train/val/test split");
  split->add_option("--manifest", manifest_path, "Manifest JSON")->required()->check(CLI::ExistingFile);
  split->add_option("--test-seed", split_config.test_seed)->required();
  split->add_option("--val-seed", split_config.val_seed)->required();
  split->add_option("--test-per-gender", split_config.test_per_gender)->check(CLI::PositiveNumber);
  split->add_option("--val-subjects", split_config.val_subject_count)->check(CLI::NonNegativeNumber);
  split->add_option("--val-fraction", val_fraction, "Validation share of the train pool, rounded to whole subjects");
  split->add_option("--out", out, "Split JSON path (default stdout)");

  auto* keyframes = app.add_subcommand("keyframes", "K-means keyframe selection for one clip");
  keyframes->add_option("--clip", clip_dir, "Directory of %06d.png frames")->required()->check(CLI::ExistingDirectory);
  keyframes->add_option("--preset", preset_name)->required()->check(CLI::IsMember({"k10", "k20", "k50", "custom"}));
  keyframes->add_option("--seed", seed)->required();
  keyframes->add_option("--out", out, "Keyframe JSON path")->required();
  keyframes->add_option("--video-id", video_id, "Defaults to the clip directory name");
  keyframes->add_option("--subsample", subsample, "Keep this many evenly spaced keyframes");
  keyframes->add_option("--skip", skip, "custom: leading frames to exclude");
  keyframes->add_option("--quotas", quotas, "custom: per-segment cluster counts")->delimiter(',');

  auto* augment = app.add_subcommand("augment", "Seeded flip/rotate/brightness augmentation");
  augment->add_option("--clip", clip_dir)->required()->check(CLI::ExistingDirectory);
  augment->add_option("--seed", seed)->required();
  augment->add_option("--out", out, "Output clip directory")->required();
  augment->add_option("--video-id", video_id, "Defaults to the clip directory name");

  auto* stats = app.add_subcommand("stats", "Boxplot statistics of per-class accuracy");
  stats->add_option("--metrics", metrics_path)->required()->check(CLI::ExistingFile);
  stats->add_option("--regime", regime)->required()->check(CLI::IsMember({"regular", "female", "male"}));
  stats->add_option("--set", set_name)->required()->check(CLI::IsMember({"test", "female", "male"}));

  auto* verify = app.add_subcommand("verify-paper", "Replay the bundled appendix tables and check the registered claims");
  verify->add_option("--json", json_out, "Also write the verification as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return audit::kExitInputError;
  }

  try {
    fairness::GapOptions gap_options{fairness::ParseAggregation(aggregation),
                                     fairness::ParseEqodCombine(eqod_combine)};
    if (*ingest) return RunIngest(records_path, fuse, out);
    if (*audit_cmd) return RunAudit(records_path, out, csv_dir, gap_options);
    if (*gaps) return RunGaps(metrics_path, definition, regime, rank, format, gap_options);
    if (*split) {
      split_config.val_fraction = val_fraction;
      return RunSplit(manifest_path, split_config, out);
    }
    if (*keyframes) {
      const auto preset = preprocess::ParsePreset(preset_name);
      const auto config = preset == preprocess::Preset::kCustom
                              ? preprocess::KeyframeConfig::Custom(skip, quotas)
                              : preprocess::KeyframeConfig::FromPreset(preset);
      return RunKeyframes(clip_dir, config, seed, video_id, subsample, out);
    }
    if (*augment) return RunAugment(clip_dir, seed, video_id, out);
    if (*stats) return RunStats(metrics_path, regime, set_name);
    if (*verify) return RunVerifyPaper(json_out);
  } catch (const Error& e) {
    std::cerr << "error (" << ErrorKindName(e.kind()) << "): " << e.what() << '\n';
    return audit::kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return audit::kExitInputError;
  }
  return audit::kExitInputError;
}
