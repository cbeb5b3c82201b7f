#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "fairscope/records.hpp"

namespace fairscope::metrics {

using records::FusedLabel;
using records::Regime;

// Evaluation population: the full test split or one of its gender halves.
enum class Group : std::uint8_t { kTest, kFemaleSet, kMaleSet };

inline constexpr std::array<Group, 3> kGroups = {Group::kTest, Group::kFemaleSet,
                                                 Group::kMaleSet};

std::string_view Name(Group group);  // test | female | male
Group ParseGroup(std::string_view text);

struct ClassCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t positives() const { return tp + fn; }
  std::int64_t negatives() const { return fp + tn; }
  std::int64_t total() const { return tp + fp + tn + fn; }

  bool operator==(const ClassCounts&) const = default;
};

// Rows are true labels, columns predicted labels, both in report order.
class ConfusionMatrix {
 public:
  using Grid = std::array<std::array<std::int64_t, records::kFusedClassCount>,
                          records::kFusedClassCount>;

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(const Grid& counts) : counts_(counts) {}

  std::int64_t at(FusedLabel truth, FusedLabel predicted) const {
    return counts_[records::Index(truth)][records::Index(predicted)];
  }
  void Add(FusedLabel truth, FusedLabel predicted, std::int64_t n = 1) {
    counts_[records::Index(truth)][records::Index(predicted)] += n;
  }
  std::int64_t RowSum(FusedLabel truth) const;
  std::int64_t ColSum(FusedLabel predicted) const;
  std::int64_t total() const;
  const Grid& counts() const { return counts_; }

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  friend ConfusionMatrix operator+(ConfusionMatrix a, const ConfusionMatrix& b) {
    return a += b;
  }
  bool operator==(const ConfusionMatrix&) const = default;

 private:
  Grid counts_{};
};

struct ClassMetrics {
  double acc = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;

  bool operator==(const ClassMetrics&) const = default;
};

struct Support {
  std::int64_t positives = 0;
  std::int64_t negatives = 0;
};

// Per-class supports of the published tables: 20/60 on the full test split and
// 10/30 on each gender half.
Support PublishedSupport(Group group);

struct Reconstruction {
  ClassCounts counts;
  bool consistent = false;
  double acc_error = 0.0;  // |(tp+tn)/N - acc|
};

inline constexpr double kAccConsistencyBand = 0.0005;

struct MetricKey {
  Regime regime = Regime::kRegular;
  Group group = Group::kTest;
  std::string model_id;
  FusedLabel cls = FusedLabel::kSurprised;

  auto operator<=>(const MetricKey&) const = default;
};

// (model, regime, group, class) -> ClassMetrics. Iteration order is regime,
// group, model id, class, which is also the CSV emission order.
class MetricTable {
 public:
  using Cells = std::map<MetricKey, ClassMetrics>;

  void Set(const MetricKey& key, const ClassMetrics& value) { cells_[key] = value; }
  const ClassMetrics* Find(const MetricKey& key) const;
  // Throws kIncompleteTable when the cell is missing.
  const ClassMetrics& At(const std::string& model, Regime regime, Group group,
                         FusedLabel cls) const;

  bool HasGroup(const std::string& model, Regime regime, Group group) const;
  std::vector<std::string> Models(Regime regime) const;
  std::vector<Regime> Regimes() const;

  // Throws kIncompleteTable unless every present (model, regime, group) has
  // all four classes.
  void Validate() const;

  const Cells& cells() const { return cells_; }
  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }

  bool operator==(const MetricTable&) const = default;

 private:
  Cells cells_;
};

using RecordFilter = std::function<bool(const records::PredictionRecord&)>;

// Throws kTaxonomyMismatch on a raw 6-way set and kEmptyGroup when the filter
// selects nothing.
ConfusionMatrix Confusion(const records::RecordSet& set, const RecordFilter& filter);

ClassCounts OneVsRest(const ConfusionMatrix& matrix, FusedLabel cls);

// Throws kUndefinedRate when the class has no positives or no negatives.
ClassMetrics ComputeClassMetrics(const ClassCounts& counts);

// Test, FemaleSet and MaleSet metrics for every (model, regime) in the set.
// Gender groups with no records are omitted.
MetricTable BuildTable(const records::RecordSet& set);

// Inverts the rate formulas against known supports. Never throws; an
// inconsistent accuracy is flagged instead.
Reconstruction ReconstructCounts(const ClassMetrics& metrics, const Support& support);

// `regime,test_set,model,class,metric,value` with metric in {acc,tpr,fpr}.
MetricTable ReadMetricCsv(std::istream& in);
void WriteMetricCsv(const MetricTable& table, std::ostream& out);

}  // namespace fairscope::metrics
