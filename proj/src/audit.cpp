#include "fairscope/audit.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "fairscope/error.hpp"
#include "text.hpp"

#ifndef FAIRSCOPE_VERSION
#define FAIRSCOPE_VERSION "0.0.0"
#endif

namespace fairscope::audit {
namespace {

using nlohmann::ordered_json;
using records::kFusedLabels;

}  // namespace

std::string_view ToolVersion() { return FAIRSCOPE_VERSION; }

std::string Sha256Hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::kIo, "sha256 failed");
  }
  std::ostringstream out;
  for (unsigned int i = 0; i < length; ++i) {
    out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return out.str();
}

double Quantile(std::span<const double> sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - static_cast<double>(lo));
}

BoxplotStats Summarize(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorKind::kIncompleteTable, "no values to summarize");
  std::sort(values.begin(), values.end());
  BoxplotStats s;
  s.count = values.size();
  s.min = values.front();
  s.max = values.back();
  s.q1 = Quantile(values, 0.25);
  s.median = Quantile(values, 0.5);
  s.q3 = Quantile(values, 0.75);
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.variance = ss / n;
  return s;
}

BoxplotStats AggregateStats(const MetricTable& table, Regime regime, Group group) {
  const auto models = table.Models(regime);
  if (models.empty()) {
    throw Error(ErrorKind::kIncompleteTable,
                "no models for regime " + std::string(records::Name(regime)));
  }
  std::vector<double> acc;
  for (const auto& model : models) {
    if (!table.HasGroup(model, regime, group)) {
      throw Error(ErrorKind::kIncompleteTable,
                  model + "/" + std::string(records::Name(regime)) + " lacks the " +
                      std::string(metrics::Name(group)) + " set");
    }
    for (auto cls : kFusedLabels) acc.push_back(table.At(model, regime, group, cls).acc);
  }
  return Summarize(std::move(acc));
}

void CheckFixtureChecksum(std::string_view csv, std::string_view expected_sha256) {
  const std::string actual = Sha256Hex(csv);
  if (actual != expected_sha256) {
    throw Error(ErrorKind::kCorruptedFixture, "fixture checksum mismatch: expected " +
                                                  std::string(expected_sha256) + ", got " +
                                                  actual);
  }
}

FixtureSource LoadFixture() {
  FixtureSource source;
  if (const char* path = std::getenv(std::string(kFixtureEnvVar).c_str());
      path != nullptr && *path != '\0') {
    source.csv = ReadFile(path);
    source.origin = path;
    source.bundled = false;
  } else {
    source.csv = std::string(BundledFixtureCsv());
    source.origin = "bundled";
    CheckFixtureChecksum(source.csv, BundledFixtureSha256());
  }
  source.sha256 = Sha256Hex(source.csv);
  return source;
}

MetricTable ParseFixture(const FixtureSource& source) {
  std::istringstream in(source.csv);
  return metrics::ReadMetricCsv(in);
}

const CellCheck* IntegrityReport::Find(const std::string& model, Regime regime, Group group,
                                       records::FusedLabel cls) const {
  const metrics::MetricKey key{regime, group, model, cls};
  for (const auto& c : cells) {
    if (c.key == key) return &c;
  }
  return nullptr;
}

IntegrityReport CheckFixtureIntegrity(const MetricTable& table) {
  IntegrityReport report;
  for (const auto& [key, m] : table.cells()) {
    const auto support = metrics::PublishedSupport(key.group);
    CellCheck check{key, support, metrics::ReconstructCounts(m, support)};
    report.consistent += check.reconstruction.consistent ? 1 : 0;
    report.cells.push_back(std::move(check));
  }
  return report;
}

PaperVerification VerifyPaper(const FixtureSource& fixture) {
  PaperVerification v;
  v.fixture = fixture;
  const MetricTable table = ParseFixture(fixture);
  v.integrity = CheckFixtureIntegrity(table);
  v.claims = fairness::VerifyClaims(table);
  return v;
}

PaperVerification VerifyPaper() { return VerifyPaper(LoadFixture()); }

namespace {

ordered_json ClaimsJson(const fairness::ClaimRegister& reg) {
  ordered_json claims = ordered_json::array();
  for (const auto& c : reg.claims) {
    claims.push_back({{"id", c.id},
                      {"description", c.description},
                      {"expected", fairness::Name(c.expected)},
                      {"verdict", fairness::Name(c.verdict)},
                      {"matches", c.matches()},
                      {"evidence", c.evidence}});
  }
  return claims;
}

ordered_json KeyJson(const metrics::MetricKey& key) {
  return {{"regime", records::Name(key.regime)},
          {"test_set", metrics::Name(key.group)},
          {"model", key.model_id},
          {"class", records::Name(key.cls)}};
}

}  // namespace

ordered_json ToJson(const PaperVerification& v) {
  ordered_json inconsistent = ordered_json::array();
  for (const auto& c : v.integrity.cells) {
    if (c.reconstruction.consistent) continue;
    auto j = KeyJson(c.key);
    const auto& k = c.reconstruction.counts;
    j["counts"] = {{"tp", k.tp}, {"fp", k.fp}, {"tn", k.tn}, {"fn", k.fn}};
    j["acc_error"] = c.reconstruction.acc_error;
    inconsistent.push_back(std::move(j));
  }
  return {{"fixture", {{"origin", v.fixture.origin}, {"sha256", v.fixture.sha256}}},
          {"integrity",
           {{"cells", v.integrity.cells.size()},
            {"consistent", v.integrity.consistent},
            {"rate", v.integrity.rate()},
            {"threshold", kMinConsistentRate},
            {"inconsistent", inconsistent}}},
          {"claims", ClaimsJson(v.claims)},
          {"passed", v.passed()},
          {"tool_version", ToolVersion()}};
}

AuditReport RunAudit(std::string_view csv, std::string input_name, const AuditOptions& options) {
  AuditReport report;
  report.options = options;
  report.provenance.input = std::move(input_name);
  report.provenance.input_sha256 = Sha256Hex(csv);
  report.provenance.tool_version = std::string(ToolVersion());

  std::istringstream in{std::string(csv)};
  const records::RecordSet set = records::Ingest(in, /*fuse=*/true);
  report.provenance.record_count = set.size();
  report.provenance.taxonomy = std::string(records::Name(set.taxonomy()));
  report.metrics = metrics::BuildTable(set);

  for (Regime regime : report.metrics.Regimes()) {
    try {
      for (auto d : fairness::kDefinitions) {
        auto gaps = fairness::ComputeGaps(report.metrics, regime, d, options.gaps);
        auto ranking = fairness::Rank(gaps);
        report.gaps.push_back({std::move(gaps), std::move(ranking)});
      }
    } catch (const Error& e) {
      report.errors.push_back(std::string(ErrorKindName(e.kind())) + ": " + e.what());
    }
    for (Group group : metrics::kGroups) {
      bool present = false;
      for (const auto& model : report.metrics.Models(regime)) {
        present = present || report.metrics.HasGroup(model, regime, group);
      }
      if (!present) continue;
      try {
        report.stats.push_back({regime, group, AggregateStats(report.metrics, regime, group)});
      } catch (const Error& e) {
        report.errors.push_back(std::string(ErrorKindName(e.kind())) + ": " + e.what());
      }
    }
  }
  try {
    report.claims = fairness::VerifyClaims(report.metrics, options.gaps);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kIncompleteTable) throw;
  }
  return report;
}

AuditReport RunAudit(const std::filesystem::path& records_path, const AuditOptions& options) {
  return RunAudit(ReadFile(records_path), records_path.string(), options);
}

ordered_json ToJson(const BoxplotStats& s) {
  return {{"count", s.count}, {"min", s.min},   {"q1", s.q1},       {"median", s.median},
          {"q3", s.q3},       {"max", s.max},   {"mean", s.mean},   {"variance", s.variance}};
}

ordered_json ToJson(const AuditReport& report) {
  ordered_json j;
  j["provenance"] = {{"input", report.provenance.input},
                     {"input_sha256", report.provenance.input_sha256},
                     {"tool_version", report.provenance.tool_version},
                     {"record_count", report.provenance.record_count},
                     {"taxonomy", report.provenance.taxonomy}};
  j["options"] = {{"aggregation", fairness::Name(report.options.gaps.aggregation)},
                  {"eqod_combine", fairness::Name(report.options.gaps.eqod_combine)}};
  auto& cells = j["metrics"] = ordered_json::array();
  for (const auto& [key, m] : report.metrics.cells()) {
    auto cell = KeyJson(key);
    cell["acc"] = m.acc;
    cell["tpr"] = m.tpr;
    cell["fpr"] = m.fpr;
    cells.push_back(std::move(cell));
  }
  auto& gaps = j["gaps"] = ordered_json::array();
  for (const auto& g : report.gaps) gaps.push_back(fairness::ToJson(g.report, g.ranking));
  auto& stats = j["stats"] = ordered_json::array();
  for (const auto& s : report.stats) {
    ordered_json entry{{"regime", records::Name(s.regime)}, {"test_set", metrics::Name(s.group)}};
    entry.update(ToJson(s.stats));
    stats.push_back(std::move(entry));
  }
  j["claims"] = report.claims ? ClaimsJson(*report.claims) : ordered_json(nullptr);
  j["errors"] = report.errors;
  return j;
}

void EmitJson(const AuditReport& report, std::ostream& out) {
  out << ToJson(report).dump(2) << '\n';
}

void EmitMetricsCsv(const AuditReport& report, std::ostream& out) {
  metrics::WriteMetricCsv(report.metrics, out);
}

void EmitGapsCsv(const AuditReport& report, std::ostream& out) {
  fairness::WriteGapCsvHeader(out);
  for (const auto& g : report.gaps) fairness::WriteGapCsvRows(g.report, out);
}

void EmitStatsCsv(const AuditReport& report, std::ostream& out) {
  out << "regime,test_set,count,min,q1,median,q3,max,mean,variance\n";
  for (const auto& e : report.stats) {
    const auto& s = e.stats;
    out << records::Name(e.regime) << ',' << metrics::Name(e.group) << ',' << s.count;
    for (double v : {s.min, s.q1, s.median, s.q3, s.max, s.mean, s.variance}) {
      out << ',' << text::FormatDouble(v);
    }
    out << '\n';
  }
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFileAtomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorKind::kIo, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace fairscope::audit
