#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fairscope/metrics.hpp"
#include "json.hpp"

namespace fairscope::fairness {

using metrics::MetricTable;
using records::Regime;

enum class Definition : std::uint8_t {
  kDemographicParity,  // per-class accuracy
  kEqualOpportunity,   // per-class TPR
  kEqualizedOdds,      // per-class TPR and FPR together
};

inline constexpr std::array<Definition, 3> kDefinitions = {
    Definition::kDemographicParity, Definition::kEqualOpportunity,
    Definition::kEqualizedOdds};

enum class Aggregation : std::uint8_t { kMean, kMax };
enum class EqodCombine : std::uint8_t { kMean, kMax, kSum };

std::string_view Name(Definition d);  // dp | eqop | eqod
std::string_view Name(Aggregation a);
std::string_view Name(EqodCombine c);
Definition ParseDefinition(std::string_view text);
Aggregation ParseAggregation(std::string_view text);
EqodCombine ParseEqodCombine(std::string_view text);

struct GapOptions {
  Aggregation aggregation = Aggregation::kMean;
  EqodCombine eqod_combine = EqodCombine::kMean;
};

// Absolute female/male gap per class, report order.
using GapVector = std::array<double, records::kFusedClassCount>;

struct ModelGap {
  std::string model_id;
  GapVector per_class{};
  double aggregate = 0.0;
};

struct GapReport {
  Definition definition = Definition::kDemographicParity;
  Regime regime = Regime::kRegular;
  GapOptions options;
  std::vector<ModelGap> models;  // sorted by model id

  const ModelGap* Find(const std::string& model_id) const;
};

// Tiers in ascending aggregate gap: tiers.front() is the most fair.
struct Ranking {
  std::vector<std::vector<std::string>> tiers;

  bool operator==(const Ranking&) const = default;
};

inline constexpr double kTieTolerance = 1e-12;

double Aggregate(const GapVector& gaps, Aggregation aggregation);

// Gap report for every model of the regime. Throws kIncompleteTable when a
// model lacks its FemaleSet or MaleSet metrics, or the regime has no models.
GapReport ComputeGaps(const MetricTable& table, Regime regime, Definition definition,
                      const GapOptions& options = {});

inline GapReport DpGaps(const MetricTable& t, Regime r, const GapOptions& o = {}) {
  return ComputeGaps(t, r, Definition::kDemographicParity, o);
}
inline GapReport EqopGaps(const MetricTable& t, Regime r, const GapOptions& o = {}) {
  return ComputeGaps(t, r, Definition::kEqualOpportunity, o);
}
inline GapReport EqodGaps(const MetricTable& t, Regime r, const GapOptions& o = {}) {
  return ComputeGaps(t, r, Definition::kEqualizedOdds, o);
}

// Aggregates within kTieTolerance of a tier's first member share the tier;
// members are listed lexicographically.
Ranking Rank(const GapReport& report);

enum class ClaimStatus : std::uint8_t { kReproduced, kNotReproduced };
std::string_view Name(ClaimStatus s);

struct ClaimResult {
  std::string id;
  std::string description;
  ClaimStatus expected = ClaimStatus::kReproduced;
  ClaimStatus verdict = ClaimStatus::kReproduced;
  std::string evidence;

  bool matches() const { return expected == verdict; }
};

struct ClaimRegister {
  std::vector<ClaimResult> claims;

  bool AllMatch() const;
  std::size_t CountVerdict(ClaimStatus status) const;
};

// The six published architectures every claim refers to.
inline const std::array<std::string, 6> kPublishedModels = {
    "3dcnn", "resnet3d", "resnet50", "senetlstm", "vgg16", "vggface"};

// Evaluates the registered ranking and accuracy claims against a full
// 18-model table. Throws kIncompleteTable when any referenced cell is missing.
ClaimRegister VerifyClaims(const MetricTable& table, const GapOptions& options = {});

// `{definition, regime, aggregation, models:[...], ranking:[[...]]}`.
nlohmann::ordered_json ToJson(const GapReport& report, const Ranking& ranking);

// One row per (model, class): `definition,regime,aggregation,model,class,gap`.
void WriteGapCsvHeader(std::ostream& out);
void WriteGapCsvRows(const GapReport& report, std::ostream& out);

}  // namespace fairscope::fairness
