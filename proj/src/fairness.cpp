#include "fairscope/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>

#include "fairscope/error.hpp"
#include "text.hpp"

namespace fairscope::fairness {
namespace {

using metrics::ClassMetrics;
using metrics::Group;
using records::kFusedLabels;

constexpr std::array<std::string_view, 3> kDefinitionNames = {"dp", "eqop", "eqod"};
constexpr std::array<std::string_view, 2> kAggregationNames = {"mean", "max"};
constexpr std::array<std::string_view, 3> kCombineNames = {"mean", "max", "sum"};

template <typename Enum, std::size_t N>
Enum ParseName(std::string_view text, const std::array<std::string_view, N>& names,
               std::string_view what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (text::IEquals(text, names[i])) return static_cast<Enum>(i);
  }
  throw Error(ErrorKind::kParse, "unknown " + std::string(what) + " '" + std::string(text) + "'");
}

double ClassGap(const ClassMetrics& female, const ClassMetrics& male, Definition d,
                EqodCombine combine) {
  switch (d) {
    case Definition::kDemographicParity: return std::abs(female.acc - male.acc);
    case Definition::kEqualOpportunity: return std::abs(female.tpr - male.tpr);
    case Definition::kEqualizedOdds: {
      const double dtpr = std::abs(female.tpr - male.tpr);
      const double dfpr = std::abs(female.fpr - male.fpr);
      switch (combine) {
        case EqodCombine::kMean: return (dtpr + dfpr) / 2.0;
        case EqodCombine::kMax: return std::max(dtpr, dfpr);
        case EqodCombine::kSum: return dtpr + dfpr;
      }
    }
  }
  return 0.0;
}

// ---- claim helpers ---------------------------------------------------------

std::string DescribeAggregates(const GapReport& report) {
  std::vector<const ModelGap*> sorted;
  for (const auto& m : report.models) sorted.push_back(&m);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](auto* a, auto* b) { return a->aggregate < b->aggregate; });
  std::ostringstream out;
  out << Name(report.definition) << '/' << records::Name(report.regime) << ':';
  for (const auto* m : sorted) out << ' ' << m->model_id << '=' << text::FormatShort(m->aggregate);
  return out.str();
}

bool TierIs(const Ranking& r, std::ptrdiff_t index, std::vector<std::string> expected) {
  const auto n = static_cast<std::ptrdiff_t>(r.tiers.size());
  if (index < 0) index += n;
  if (index < 0 || index >= n) return false;
  std::sort(expected.begin(), expected.end());
  return r.tiers[static_cast<std::size_t>(index)] == expected;
}

double MeanAccuracy(const MetricTable& table, Regime regime, Group group) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& model : kPublishedModels) {
    for (auto cls : kFusedLabels) {
      sum += table.At(model, regime, group, cls).acc;
      ++n;
    }
  }
  return sum / static_cast<double>(n);
}

struct ClaimSpec {
  const char* id;
  const char* description;
  ClaimStatus expected;
  std::function<bool(const MetricTable&, const GapOptions&, std::string&)> holds;
};

// A ranking claim: evaluates `check` on the ranking for one (regime, definition).
std::function<bool(const MetricTable&, const GapOptions&, std::string&)> RankingClaim(
    Regime regime, std::vector<Definition> definitions,
    std::function<bool(const Ranking&)> check) {
  return [=](const MetricTable& table, const GapOptions& options, std::string& evidence) {
    bool all = true;
    for (Definition d : definitions) {
      const GapReport report = ComputeGaps(table, regime, d, options);
      if (!evidence.empty()) evidence += "; ";
      evidence += DescribeAggregates(report);
      all = check(Rank(report)) && all;
    }
    return all;
  };
}

std::function<bool(const MetricTable&, const GapOptions&, std::string&)> AccuracyClaim(
    Regime regime, Group higher, Group lower) {
  return [=](const MetricTable& table, const GapOptions&, std::string& evidence) {
    const double hi = MeanAccuracy(table, regime, higher);
    const double lo = MeanAccuracy(table, regime, lower);
    evidence = "mean acc " + std::string(records::Name(regime)) + ": " +
               std::string(metrics::Name(higher)) + "=" + text::FormatShort(hi) + " " +
               std::string(metrics::Name(lower)) + "=" + text::FormatShort(lo);
    return hi > lo;
  };
}

std::vector<ClaimSpec> RegisteredClaims() {
  using D = Definition;
  const auto first_is = [](std::string m) {
    return [m](const Ranking& r) { return TierIs(r, 0, {m}); };
  };
  const auto last_is = [](std::string m) {
    return [m](const Ranking& r) { return TierIs(r, -1, {m}); };
  };
  return {
      {"regular-dp-most-fair",
       "Regular models, DP: vgg16 is the most fair model and resnet3d the second most fair",
       ClaimStatus::kReproduced,
       RankingClaim(Regime::kRegular, {D::kDemographicParity},
                    [](const Ranking& r) {
                      return TierIs(r, 0, {"vgg16"}) && TierIs(r, 1, {"resnet3d"});
                    })},
      {"regular-dp-most-biased",
       "Regular models, DP: 3dcnn and vggface are the most biased",
       ClaimStatus::kReproduced,
       RankingClaim(Regime::kRegular, {D::kDemographicParity},
                    [](const Ranking& r) { return TierIs(r, -1, {"3dcnn", "vggface"}); })},
      {"female-dp-extremes",
       "Female models, DP: vgg16 is the least biased and senetlstm the most biased",
       ClaimStatus::kReproduced,
       RankingClaim(Regime::kFemaleTrained, {D::kDemographicParity},
                    [](const Ranking& r) {
                      return TierIs(r, 0, {"vgg16"}) && TierIs(r, -1, {"senetlstm"});
                    })},
      {"male-dp-extremes",
       "Male models, DP: senetlstm is the most fair, resnet3d the most biased, resnet50 and "
       "vggface share second most biased",
       ClaimStatus::kReproduced,
       RankingClaim(Regime::kMaleTrained, {D::kDemographicParity},
                    [](const Ranking& r) {
                      return TierIs(r, 0, {"senetlstm"}) && TierIs(r, -1, {"resnet3d"}) &&
                             TierIs(r, -2, {"resnet50", "vggface"});
                    })},
      {"regular-accuracy-female-higher",
       "Regular models: average accuracy is higher on the Female set than on the Male set",
       ClaimStatus::kReproduced,
       AccuracyClaim(Regime::kRegular, Group::kFemaleSet, Group::kMaleSet)},
      {"male-accuracy-male-higher",
       "Male models: average accuracy is higher on the Male set than on the Female set",
       ClaimStatus::kReproduced,
       AccuracyClaim(Regime::kMaleTrained, Group::kMaleSet, Group::kFemaleSet)},
      {"regular-eqop-resnet3d-least-biased",
       "Regular models, EQOP: resnet3d is the least biased",
       ClaimStatus::kNotReproduced,
       RankingClaim(Regime::kRegular, {D::kEqualOpportunity}, first_is("resnet3d"))},
      {"female-eqop-eqod-3dcnn-least-biased",
       "Female models, EQOP and EQOD: 3dcnn is the least biased",
       ClaimStatus::kNotReproduced,
       RankingClaim(Regime::kFemaleTrained, {D::kEqualOpportunity, D::kEqualizedOdds},
                    first_is("3dcnn"))},
      {"male-eqop-eqod-resnet50-most-biased",
       "Male models, EQOP and EQOD: resnet50 is the most biased",
       ClaimStatus::kNotReproduced,
       RankingClaim(Regime::kMaleTrained, {D::kEqualOpportunity, D::kEqualizedOdds},
                    last_is("resnet50"))},
      {"female-accuracy-male-higher",
       "Female models: overall accuracy is better on the Male set than on the Female set",
       ClaimStatus::kNotReproduced,
       AccuracyClaim(Regime::kFemaleTrained, Group::kMaleSet, Group::kFemaleSet)},
  };
}

}  // namespace

std::string_view Name(Definition d) { return kDefinitionNames[static_cast<std::size_t>(d)]; }
std::string_view Name(Aggregation a) { return kAggregationNames[static_cast<std::size_t>(a)]; }
std::string_view Name(EqodCombine c) { return kCombineNames[static_cast<std::size_t>(c)]; }
std::string_view Name(ClaimStatus s) {
  return s == ClaimStatus::kReproduced ? "reproduced" : "not-reproduced";
}

Definition ParseDefinition(std::string_view text) {
  return ParseName<Definition>(text, kDefinitionNames, "fairness definition");
}
Aggregation ParseAggregation(std::string_view text) {
  return ParseName<Aggregation>(text, kAggregationNames, "aggregation");
}
EqodCombine ParseEqodCombine(std::string_view text) {
  return ParseName<EqodCombine>(text, kCombineNames, "eqod combination");
}

const ModelGap* GapReport::Find(const std::string& model_id) const {
  for (const auto& m : models) {
    if (m.model_id == model_id) return &m;
  }
  return nullptr;
}

double Aggregate(const GapVector& gaps, Aggregation aggregation) {
  if (aggregation == Aggregation::kMax) return *std::max_element(gaps.begin(), gaps.end());
  double sum = 0.0;
  for (double g : gaps) sum += std::abs(g);
  return sum / static_cast<double>(gaps.size());
}

GapReport ComputeGaps(const MetricTable& table, Regime regime, Definition definition,
                      const GapOptions& options) {
  GapReport report{definition, regime, options, {}};
  const auto models = table.Models(regime);
  if (models.empty()) {
    throw Error(ErrorKind::kIncompleteTable,
                "no models for regime " + std::string(records::Name(regime)));
  }
  for (const auto& model : models) {
    for (Group g : {Group::kFemaleSet, Group::kMaleSet}) {
      if (!table.HasGroup(model, regime, g)) {
        throw Error(ErrorKind::kIncompleteTable,
                    "gap needs both gender sets; missing " + std::string(metrics::Name(g)) +
                        " set for " + model + "/" + std::string(records::Name(regime)));
      }
    }
    ModelGap gap{model, {}, 0.0};
    for (auto cls : kFusedLabels) {
      gap.per_class[records::Index(cls)] =
          ClassGap(table.At(model, regime, Group::kFemaleSet, cls),
                   table.At(model, regime, Group::kMaleSet, cls), definition,
                   options.eqod_combine);
    }
    gap.aggregate = Aggregate(gap.per_class, options.aggregation);
    report.models.push_back(std::move(gap));
  }
  return report;
}

Ranking Rank(const GapReport& report) {
  std::vector<const ModelGap*> order;
  for (const auto& m : report.models) order.push_back(&m);
  std::sort(order.begin(), order.end(), [](const ModelGap* a, const ModelGap* b) {
    if (a->aggregate != b->aggregate) return a->aggregate < b->aggregate;
    return a->model_id < b->model_id;
  });
  Ranking ranking;
  double tier_start = 0.0;
  for (const ModelGap* m : order) {
    if (ranking.tiers.empty() || m->aggregate - tier_start > kTieTolerance) {
      ranking.tiers.emplace_back();
      tier_start = m->aggregate;
    }
    ranking.tiers.back().push_back(m->model_id);
  }
  for (auto& tier : ranking.tiers) std::sort(tier.begin(), tier.end());
  return ranking;
}

bool ClaimRegister::AllMatch() const {
  return std::all_of(claims.begin(), claims.end(), [](const auto& c) { return c.matches(); });
}

std::size_t ClaimRegister::CountVerdict(ClaimStatus status) const {
  return static_cast<std::size_t>(std::count_if(
      claims.begin(), claims.end(), [status](const auto& c) { return c.verdict == status; }));
}

ClaimRegister VerifyClaims(const MetricTable& table, const GapOptions& options) {
  for (Regime regime : records::kRegimes) {
    for (const auto& model : kPublishedModels) {
      for (Group g : metrics::kGroups) {
        if (!table.HasGroup(model, regime, g)) {
          throw Error(ErrorKind::kIncompleteTable,
                      "fixture lacks " + model + "/" + std::string(records::Name(regime)) +
                          "/" + std::string(metrics::Name(g)));
        }
      }
    }
  }
  ClaimRegister out;
  for (const auto& claim : RegisteredClaims()) {
    ClaimResult result{claim.id, claim.description, claim.expected, ClaimStatus::kReproduced, {}};
    result.verdict = claim.holds(table, options, result.evidence) ? ClaimStatus::kReproduced
                                                                 : ClaimStatus::kNotReproduced;
    out.claims.push_back(std::move(result));
  }
  return out;
}

nlohmann::ordered_json ToJson(const GapReport& report, const Ranking& ranking) {
  nlohmann::ordered_json j;
  j["definition"] = Name(report.definition);
  j["regime"] = records::Name(report.regime);
  j["aggregation"] = Name(report.options.aggregation);
  if (report.definition == Definition::kEqualizedOdds) {
    j["eqod_combine"] = Name(report.options.eqod_combine);
  }
  auto& models = j["models"] = nlohmann::ordered_json::array();
  for (const auto& m : report.models) {
    nlohmann::ordered_json per_class;
    for (auto cls : kFusedLabels) per_class[std::string(records::Name(cls))] = m.per_class[records::Index(cls)];
    models.push_back({{"model_id", m.model_id}, {"per_class", per_class}, {"aggregate", m.aggregate}});
  }
  j["ranking"] = ranking.tiers;
  return j;
}

void WriteGapCsvHeader(std::ostream& out) {
  out << "definition,regime,aggregation,model,class,gap\n";
}

void WriteGapCsvRows(const GapReport& report, std::ostream& out) {
  for (const auto& m : report.models) {
    for (auto cls : kFusedLabels) {
      out << Name(report.definition) << ',' << records::Name(report.regime) << ','
          << Name(report.options.aggregation) << ',' << m.model_id << ','
          << records::Name(cls) << ',' << text::FormatDouble(m.per_class[records::Index(cls)])
          << '\n';
    }
  }
}

}  // namespace fairscope::fairness
