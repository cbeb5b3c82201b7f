#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairscope/fairness.hpp"
#include "fairscope/metrics.hpp"
#include "json.hpp"

namespace fairscope::audit {

using metrics::Group;
using metrics::MetricTable;
using records::Regime;

// Stable process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitClaimFailure = 1;
inline constexpr int kExitInputError = 2;

std::string_view ToolVersion();
std::string Sha256Hex(std::string_view bytes);

struct BoxplotStats {
  std::size_t count = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double variance = 0.0;  // population
};

// Linear-interpolation quantile on sorted data: position p * (n - 1).
double Quantile(std::span<const double> sorted, double p);
BoxplotStats Summarize(std::vector<double> values);

// Statistics over the per-class accuracies of every model in (regime, set).
// Throws kIncompleteTable when the regime has no models or any model lacks
// the set.
BoxplotStats AggregateStats(const MetricTable& table, Regime regime, Group group);

// ---- bundled fixture -------------------------------------------------------

inline constexpr std::string_view kFixtureEnvVar = "FAIRSCOPE_FIXTURE";

std::string_view BundledFixtureCsv();
std::string_view BundledFixtureSha256();

struct FixtureSource {
  std::string csv;
  std::string origin;  // "bundled" or the override path
  bool bundled = true;
  std::string sha256;
};

// Throws kCorruptedFixture when the bytes differ from the expected digest.
void CheckFixtureChecksum(std::string_view csv, std::string_view expected_sha256);

// Bundled fixture (checksum enforced) unless FAIRSCOPE_FIXTURE names a file.
FixtureSource LoadFixture();
MetricTable ParseFixture(const FixtureSource& source);

struct CellCheck {
  metrics::MetricKey key;
  metrics::Support support;
  metrics::Reconstruction reconstruction;
};

struct IntegrityReport {
  std::vector<CellCheck> cells;
  std::size_t consistent = 0;

  double rate() const {
    return cells.empty() ? 0.0 : static_cast<double>(consistent) / cells.size();
  }
  const CellCheck* Find(const std::string& model, Regime regime, Group group,
                        records::FusedLabel cls) const;
};

inline constexpr double kMinConsistentRate = 0.95;

// Reconstructs counts for every (regime, set, model, class) using the
// published supports.
IntegrityReport CheckFixtureIntegrity(const MetricTable& table);

struct PaperVerification {
  FixtureSource fixture;
  IntegrityReport integrity;
  fairness::ClaimRegister claims;

  bool passed() const {
    return claims.AllMatch() && integrity.rate() >= kMinConsistentRate;
  }
  int exit_code() const { return passed() ? kExitOk : kExitClaimFailure; }
};

PaperVerification VerifyPaper(const FixtureSource& fixture);
PaperVerification VerifyPaper();
nlohmann::ordered_json ToJson(const PaperVerification& v);

// ---- end-to-end audit ------------------------------------------------------

struct AuditOptions {
  fairness::GapOptions gaps;
};

struct GapEntry {
  fairness::GapReport report;
  fairness::Ranking ranking;
};

struct StatsEntry {
  Regime regime = Regime::kRegular;
  Group group = Group::kTest;
  BoxplotStats stats;
};

struct Provenance {
  std::string input;
  std::string input_sha256;
  std::string tool_version;
  std::size_t record_count = 0;
  std::string taxonomy;
};

struct AuditReport {
  MetricTable metrics;
  std::vector<GapEntry> gaps;
  std::vector<StatsEntry> stats;
  std::optional<fairness::ClaimRegister> claims;
  // Stage failures that did not abort the audit (e.g. a one-gender file).
  std::vector<std::string> errors;
  AuditOptions options;
  Provenance provenance;

  bool complete() const { return errors.empty(); }
};

// ingest -> metric table -> gap reports and rankings per regime -> stats ->
// claims (when the table covers the six published models). Ingest and metric
// errors propagate; gap/stat stage errors are recorded in `errors`.
AuditReport RunAudit(std::string_view csv, std::string input_name, const AuditOptions& options);
AuditReport RunAudit(const std::filesystem::path& records_path, const AuditOptions& options);

nlohmann::ordered_json ToJson(const AuditReport& report);
nlohmann::ordered_json ToJson(const BoxplotStats& stats);
void EmitJson(const AuditReport& report, std::ostream& out);
void EmitMetricsCsv(const AuditReport& report, std::ostream& out);
void EmitGapsCsv(const AuditReport& report, std::ostream& out);
// `regime,test_set,count,min,q1,median,q3,max,mean,variance`
void EmitStatsCsv(const AuditReport& report, std::ostream& out);

std::string ReadFile(const std::filesystem::path& path);
// Writes to a temporary sibling, then renames over the target.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view content);

}  // namespace fairscope::audit
