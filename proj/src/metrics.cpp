#include "fairscope/metrics.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <tuple>

#include "fairscope/error.hpp"
#include "text.hpp"

namespace fairscope::metrics {
namespace {

using records::kFusedLabels;

constexpr std::array<std::string_view, 3> kGroupNames = {"test", "female", "male"};
constexpr std::array<std::string_view, 3> kMetricNames = {"acc", "tpr", "fpr"};

std::string Describe(const std::string& model, Regime regime, Group group) {
  return model + "/" + std::string(records::Name(regime)) + "/" + std::string(Name(group));
}

}  // namespace

std::string_view Name(Group group) { return kGroupNames[static_cast<std::size_t>(group)]; }

Group ParseGroup(std::string_view text) {
  for (std::size_t i = 0; i < kGroupNames.size(); ++i) {
    if (text::IEquals(text, kGroupNames[i])) return static_cast<Group>(i);
  }
  throw Error(ErrorKind::kParse, "unknown test set '" + std::string(text) + "'");
}

Support PublishedSupport(Group group) {
  return group == Group::kTest ? Support{20, 60} : Support{10, 30};
}

std::int64_t ConfusionMatrix::RowSum(FusedLabel truth) const {
  std::int64_t sum = 0;
  for (auto v : counts_[records::Index(truth)]) sum += v;
  return sum;
}

std::int64_t ConfusionMatrix::ColSum(FusedLabel predicted) const {
  std::int64_t sum = 0;
  for (const auto& row : counts_) sum += row[records::Index(predicted)];
  return sum;
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t sum = 0;
  for (const auto& row : counts_)
    for (auto v : row) sum += v;
  return sum;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  for (std::size_t i = 0; i < counts_.size(); ++i)
    for (std::size_t j = 0; j < counts_[i].size(); ++j) counts_[i][j] += other.counts_[i][j];
  return *this;
}

const ClassMetrics* MetricTable::Find(const MetricKey& key) const {
  const auto it = cells_.find(key);
  return it == cells_.end() ? nullptr : &it->second;
}

const ClassMetrics& MetricTable::At(const std::string& model, Regime regime, Group group,
                                    FusedLabel cls) const {
  const ClassMetrics* m = Find({regime, group, model, cls});
  if (m == nullptr) {
    throw Error(ErrorKind::kIncompleteTable, "missing metrics for " +
                                                 Describe(model, regime, group) + "/" +
                                                 std::string(records::Name(cls)));
  }
  return *m;
}

bool MetricTable::HasGroup(const std::string& model, Regime regime, Group group) const {
  for (FusedLabel cls : kFusedLabels) {
    if (Find({regime, group, model, cls}) == nullptr) return false;
  }
  return true;
}

std::vector<std::string> MetricTable::Models(Regime regime) const {
  std::set<std::string> models;
  for (const auto& [key, _] : cells_) {
    if (key.regime == regime) models.insert(key.model_id);
  }
  return {models.begin(), models.end()};
}

std::vector<Regime> MetricTable::Regimes() const {
  std::set<Regime> regimes;
  for (const auto& [key, _] : cells_) regimes.insert(key.regime);
  return {regimes.begin(), regimes.end()};
}

void MetricTable::Validate() const {
  std::set<std::tuple<Regime, Group, std::string>> groups;
  for (const auto& [key, value] : cells_) {
    groups.emplace(key.regime, key.group, key.model_id);
    for (double v : {value.acc, value.tpr, value.fpr}) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorKind::kParse,
                    "metric outside [0,1] at " + Describe(key.model_id, key.regime, key.group));
      }
    }
  }
  for (const auto& [regime, group, model] : groups) {
    if (!HasGroup(model, regime, group)) {
      throw Error(ErrorKind::kIncompleteTable,
                  "incomplete class set for " + Describe(model, regime, group));
    }
  }
}

ConfusionMatrix Confusion(const records::RecordSet& set, const RecordFilter& filter) {
  if (set.taxonomy() != records::Taxonomy::kFused4) {
    throw Error(ErrorKind::kTaxonomyMismatch, "metrics require the fused 4-class taxonomy");
  }
  ConfusionMatrix matrix;
  for (const auto& r : set.records()) {
    if (filter && !filter(r)) continue;
    matrix.Add(static_cast<FusedLabel>(r.true_class),
               static_cast<FusedLabel>(r.PredictedClass()));
  }
  if (matrix.total() == 0) throw Error(ErrorKind::kEmptyGroup, "no records in group");
  return matrix;
}

ClassCounts OneVsRest(const ConfusionMatrix& matrix, FusedLabel cls) {
  ClassCounts c;
  c.tp = matrix.at(cls, cls);
  c.fn = matrix.RowSum(cls) - c.tp;
  c.fp = matrix.ColSum(cls) - c.tp;
  c.tn = matrix.total() - c.tp - c.fn - c.fp;
  return c;
}

ClassMetrics ComputeClassMetrics(const ClassCounts& counts) {
  if (counts.positives() <= 0) {
    throw Error(ErrorKind::kUndefinedRate, "TPR undefined: class has no positives");
  }
  if (counts.negatives() <= 0) {
    throw Error(ErrorKind::kUndefinedRate, "FPR undefined: class has no negatives");
  }
  ClassMetrics m;
  m.acc = static_cast<double>(counts.tp + counts.tn) / static_cast<double>(counts.total());
  m.tpr = static_cast<double>(counts.tp) / static_cast<double>(counts.positives());
  m.fpr = static_cast<double>(counts.fp) / static_cast<double>(counts.negatives());
  return m;
}

MetricTable BuildTable(const records::RecordSet& set) {
  if (set.empty()) throw Error(ErrorKind::kEmptyGroup, "no records");
  std::set<std::pair<std::string, Regime>> runs;
  for (const auto& r : set.records()) runs.emplace(r.model_id, r.regime);

  MetricTable table;
  for (const auto& [model, regime] : runs) {
    auto same_run = [&model = model, regime = regime](const records::PredictionRecord& r) {
      return r.model_id == model && r.regime == regime;
    };
    for (Group group : kGroups) {
      RecordFilter filter = same_run;
      if (group != Group::kTest) {
        const auto gender = group == Group::kFemaleSet ? records::Gender::kFemale
                                                       : records::Gender::kMale;
        filter = [same_run, gender](const records::PredictionRecord& r) {
          return same_run(r) && r.gender == gender;
        };
        bool any = false;
        for (const auto& r : set.records()) any = any || filter(r);
        if (!any) continue;
      }
      const ConfusionMatrix matrix = Confusion(set, filter);
      for (FusedLabel cls : kFusedLabels) {
        try {
          table.Set({regime, group, model, cls}, ComputeClassMetrics(OneVsRest(matrix, cls)));
        } catch (const Error& e) {
          throw Error(e.kind(), Describe(model, regime, group) + "/" +
                                    std::string(records::Name(cls)) + ": " + e.what());
        }
      }
    }
  }
  return table;
}

Reconstruction ReconstructCounts(const ClassMetrics& metrics, const Support& support) {
  Reconstruction out;
  auto& c = out.counts;
  c.tp = std::llround(metrics.tpr * static_cast<double>(support.positives));
  c.fp = std::llround(metrics.fpr * static_cast<double>(support.negatives));
  c.fn = support.positives - c.tp;
  c.tn = support.negatives - c.fp;
  const double total = static_cast<double>(support.positives + support.negatives);
  out.acc_error = total > 0 ? std::abs(static_cast<double>(c.tp + c.tn) / total - metrics.acc)
                            : metrics.acc;
  // Tiny slack so that a value exactly on the band edge is not lost to rounding.
  out.consistent = total > 0 && out.acc_error <= kAccConsistencyBand + 1e-12 &&
                   c.tp >= 0 && c.fn >= 0 && c.fp >= 0 && c.tn >= 0;
  return out;
}

MetricTable ReadMetricCsv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& message) -> void {
    throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": " + message);
  };
  if (!std::getline(in, line)) {
    line_no = 1;
    fail("empty input, header required");
  }
  ++line_no;
  const auto header = text::SplitCsvLine(line);
  const std::array<std::string_view, 6> expected = {"regime", "test_set", "model",
                                                    "class",  "metric",   "value"};
  if (header.size() != expected.size()) fail("expected 6 columns");
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (!text::IEquals(header[i], expected[i])) {
      fail("expected column '" + std::string(expected[i]) + "'");
    }
  }

  struct Partial {
    std::array<bool, 3> seen{};
    std::array<double, 3> values{};
  };
  std::map<MetricKey, Partial> partial;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::Trim(line).empty()) continue;
    const auto f = text::SplitCsvLine(line);
    if (f.size() != expected.size()) fail("expected 6 fields");
    MetricKey key;
    try {
      key.regime = records::ParseRegime(f[0]);
      key.group = ParseGroup(f[1]);
      key.cls = records::ParseFused(f[3]);
    } catch (const Error& e) {
      fail(e.what());
    }
    key.model_id = std::string(f[2]);
    if (key.model_id.empty()) fail("empty model id");
    std::size_t metric = kMetricNames.size();
    for (std::size_t i = 0; i < kMetricNames.size(); ++i) {
      if (text::IEquals(f[4], kMetricNames[i])) metric = i;
    }
    if (metric == kMetricNames.size()) fail("unknown metric '" + std::string(f[4]) + "'");
    double value = 0.0;
    if (!text::ParseDouble(f[5], value) || !(value >= 0.0 && value <= 1.0)) {
      fail("metric value must be a number in [0,1], got '" + std::string(f[5]) + "'");
    }
    auto& slot = partial[key];
    if (slot.seen[metric]) fail("duplicate cell");
    slot.seen[metric] = true;
    slot.values[metric] = value;
  }

  MetricTable table;
  for (const auto& [key, slot] : partial) {
    for (std::size_t i = 0; i < slot.seen.size(); ++i) {
      if (!slot.seen[i]) {
        throw Error(ErrorKind::kIncompleteTable,
                    "missing " + std::string(kMetricNames[i]) + " for " +
                        Describe(key.model_id, key.regime, key.group) + "/" +
                        std::string(records::Name(key.cls)));
      }
    }
    table.Set(key, {slot.values[0], slot.values[1], slot.values[2]});
  }
  table.Validate();
  return table;
}

void WriteMetricCsv(const MetricTable& table, std::ostream& out) {
  out << "regime,test_set,model,class,metric,value\n";
  for (const auto& [key, m] : table.cells()) {
    const std::array<double, 3> values = {m.acc, m.tpr, m.fpr};
    for (std::size_t i = 0; i < values.size(); ++i) {
      out << records::Name(key.regime) << ',' << Name(key.group) << ',' << key.model_id << ','
          << records::Name(key.cls) << ',' << kMetricNames[i] << ','
          << text::FormatDouble(values[i]) << '\n';
    }
  }
}

}  // namespace fairscope::metrics
