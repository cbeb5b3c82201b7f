#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fairscope/error.hpp"
#include "fairscope/metrics.hpp"
#include "fairscope/random.hpp"
#include "test_util.hpp"

using namespace fairscope;
using namespace fairscope::metrics;
using records::FusedLabel;
using records::Gender;
using records::PredictionRecord;
using records::RecordSet;
using records::Regime;

namespace {

PredictionRecord Rec(std::string model, Gender g, int id, FusedLabel truth, FusedLabel pred,
                     Regime regime = Regime::kRegular) {
  PredictionRecord r;
  r.model_id = std::move(model);
  r.regime = regime;
  r.subject_id = "s" + std::to_string(id % 10);
  r.gender = g;
  r.video_id = "v" + std::to_string(id);
  r.true_class = static_cast<std::uint8_t>(records::Index(truth));
  r.prediction = static_cast<std::uint8_t>(records::Index(pred));
  return r;
}

FusedLabel Label(std::uint64_t i) { return records::kFusedLabels[i]; }

RecordSet RandomSet(Xoshiro256& rng, int n) {
  std::vector<PredictionRecord> recs;
  for (int i = 0; i < n; ++i) {
    recs.push_back(Rec("m", rng.Bernoulli(0.5) ? Gender::kFemale : Gender::kMale, i,
                       Label(rng.Below(4)), Label(rng.Below(4))));
  }
  return RecordSet(std::move(recs), records::Taxonomy::kFused4);
}

bool All(const PredictionRecord&) { return true; }

ErrorKind KindOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected fairscope::Error");
  return ErrorKind::kIo;
}

}  // namespace

TEST_CASE("confusion examples") {
  std::vector<PredictionRecord> recs;
  for (int i = 0; i < 8; ++i) recs.push_back(Rec("m", Gender::kMale, i, Label(i % 4), Label(i % 4)));
  const auto diag = Confusion(RecordSet(recs, records::Taxonomy::kFused4), All);
  for (auto t : records::kFusedLabels) {
    for (auto p : records::kFusedLabels) CHECK(diag.at(t, p) == (t == p ? 2 : 0));
  }

  const RecordSet one({Rec("m", Gender::kMale, 0, FusedLabel::kSad, FusedLabel::kUpset)},
                      records::Taxonomy::kFused4);
  const auto m = Confusion(one, All);
  CHECK(m.at(FusedLabel::kSad, FusedLabel::kUpset) == 1);
  CHECK(m.total() == 1);
  CHECK(OneVsRest(m, FusedLabel::kUpset) == ClassCounts{0, 1, 0, 0});

  CHECK(KindOf([&] {
          Confusion(one, [](const PredictionRecord& r) { return r.gender == Gender::kFemale; });
        }) == ErrorKind::kEmptyGroup);
}

TEST_CASE("confusion matches a brute-force tally") {
  Xoshiro256 rng(21);
  const auto set = RandomSet(rng, 100);
  const auto m = Confusion(set, All);
  CHECK(m.total() == 100);
  for (auto t : records::kFusedLabels) {
    for (auto p : records::kFusedLabels) {
      const auto n = std::count_if(set.records().begin(), set.records().end(), [&](const auto& r) {
        return r.true_class == records::Index(t) && r.PredictedClass() == records::Index(p);
      });
      CHECK(m.at(t, p) == n);
    }
  }
}

TEST_CASE("confusion is invariant to record order") {
  Xoshiro256 rng(5);
  const auto set = RandomSet(rng, 60);
  std::vector<PredictionRecord> shuffled(set.records().begin(), set.records().end());
  std::reverse(shuffled.begin(), shuffled.end());
  std::swap(shuffled[3], shuffled[40]);
  CHECK(Confusion(RecordSet(shuffled, set.taxonomy()), All) == Confusion(set, All));
}

TEST_CASE("one-vs-rest counts partition the total") {
  Xoshiro256 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    ConfusionMatrix m;
    for (auto t : records::kFusedLabels) {
      for (auto p : records::kFusedLabels) m.Add(t, p, static_cast<std::int64_t>(rng.Below(20)));
    }
    for (auto cls : records::kFusedLabels) {
      const auto c = OneVsRest(m, cls);
      CHECK(c.tp >= 0);
      CHECK(c.fp >= 0);
      CHECK(c.tn >= 0);
      CHECK(c.fn >= 0);
      CHECK(c.total() == m.total());
    }
  }
  ConfusionMatrix diag;
  for (auto t : records::kFusedLabels) diag.Add(t, t, 5);
  for (auto cls : records::kFusedLabels) {
    CHECK(OneVsRest(diag, cls).fp == 0);
    CHECK(OneVsRest(diag, cls).fn == 0);
  }
}

TEST_CASE("class metrics examples") {
  const auto a = ComputeClassMetrics({15, 2, 58, 5});
  CHECK(a.acc == doctest::Approx(0.9125));
  CHECK(a.tpr == doctest::Approx(0.75));
  CHECK(a.fpr == doctest::Approx(2.0 / 60));

  const auto b = ComputeClassMetrics({20, 0, 60, 0});
  CHECK(b.acc == 1.0);
  CHECK(b.tpr == 1.0);
  CHECK(b.fpr == 0.0);

  const auto c = ComputeClassMetrics({19, 20, 40, 1});
  CHECK(c.acc == doctest::Approx(0.7375));
  CHECK(c.tpr == doctest::Approx(0.95));
  CHECK(c.fpr == doctest::Approx(1.0 / 3));

  CHECK(KindOf([] { ComputeClassMetrics({0, 3, 5, 0}); }) == ErrorKind::kUndefinedRate);
  CHECK(KindOf([] { ComputeClassMetrics({3, 0, 0, 2}); }) == ErrorKind::kUndefinedRate);
}

TEST_CASE("class metrics on the 20/60 support sit on the fixture grid") {
  for (int tp = 0; tp <= 20; ++tp) {
    for (int fp = 0; fp <= 60; fp += 7) {
      const auto m = ComputeClassMetrics({tp, fp, 60 - fp, 20 - tp});
      CHECK(std::fabs(m.acc * 80 - std::round(m.acc * 80)) < 1e-9);
      CHECK(std::fabs(m.tpr * 20 - std::round(m.tpr * 20)) < 1e-9);
      CHECK(std::fabs(m.fpr * 60 - std::round(m.fpr * 60)) < 1e-9);
    }
  }
}

TEST_CASE("reconstruct counts examples") {
  const auto a = ReconstructCounts({0.9125, 0.75, 0.033}, {20, 60});
  CHECK(a.counts == ClassCounts{15, 2, 58, 5});
  CHECK(a.consistent);

  const auto b = ReconstructCounts({0.825, 0.7, 0.13}, {10, 30});
  CHECK(b.counts == ClassCounts{7, 4, 26, 3});
  CHECK(b.consistent);

  const auto c = ReconstructCounts({1.0, 1.0, 0.0}, {10, 30});
  CHECK(c.counts == ClassCounts{10, 0, 30, 0});
  CHECK(c.consistent);

  // acc disagrees with the counts implied by tpr/fpr
  CHECK_FALSE(ReconstructCounts({0.8375, 0.95, 0.1}, {20, 60}).consistent);
}

TEST_CASE("reconstruct inverts class metrics") {
  Xoshiro256 rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const Support s{static_cast<std::int64_t>(1 + rng.Below(200)),
                    static_cast<std::int64_t>(1 + rng.Below(600))};
    ClassCounts c;
    c.tp = static_cast<std::int64_t>(rng.Below(s.positives + 1));
    c.fn = s.positives - c.tp;
    c.fp = static_cast<std::int64_t>(rng.Below(s.negatives + 1));
    c.tn = s.negatives - c.fp;
    const auto r = ReconstructCounts(ComputeClassMetrics(c), s);
    CHECK(r.counts == c);
    CHECK(r.consistent);
  }
}

TEST_CASE("pooled test confusion is the sum of the gender matrices") {
  Xoshiro256 rng(44);
  for (int trial = 0; trial < 50; ++trial) {
    const auto set = RandomSet(rng, 40 + static_cast<int>(rng.Below(80)));
    auto of = [&](Gender g) {
      return Confusion(set, [g](const PredictionRecord& r) { return r.gender == g; });
    };
    CHECK(Confusion(set, All) == of(Gender::kFemale) + of(Gender::kMale));
  }
}

TEST_CASE("table from a single-gender set") {
  std::vector<PredictionRecord> recs;
  for (int i = 0; i < 16; ++i) {
    recs.push_back(Rec("m", Gender::kFemale, i, Label(i % 4), Label((i / 4 + i) % 4)));
  }
  const auto table = BuildTable(RecordSet(recs, records::Taxonomy::kFused4));
  CHECK(table.HasGroup("m", Regime::kRegular, Group::kFemaleSet));
  CHECK_FALSE(table.HasGroup("m", Regime::kRegular, Group::kMaleSet));
  for (auto cls : records::kFusedLabels) {
    CHECK(table.At("m", Regime::kRegular, Group::kTest, cls) ==
          table.At("m", Regime::kRegular, Group::kFemaleSet, cls));
  }
  CHECK(KindOf([&] { table.At("m", Regime::kRegular, Group::kMaleSet, FusedLabel::kSad); }) ==
        ErrorKind::kIncompleteTable);
}

TEST_CASE("test metrics come from pooled counts") {
  std::vector<PredictionRecord> recs;
  int id = 0;
  for (Gender g : {Gender::kFemale, Gender::kMale}) {
    for (int i = 0; i < 20; ++i) {
      const auto truth = Label(i % 4);
      const auto pred = (i + (g == Gender::kMale ? 1 : 0)) % 5 == 0 ? Label((i + 1) % 4) : truth;
      recs.push_back(Rec("m", g, id++, truth, pred));
    }
  }
  const RecordSet set(recs, records::Taxonomy::kFused4);
  const auto table = BuildTable(set);
  const auto pooled = Confusion(set, All);
  for (auto cls : records::kFusedLabels) {
    const auto expect = ComputeClassMetrics(OneVsRest(pooled, cls));
    CHECK(table.At("m", Regime::kRegular, Group::kTest, cls) == expect);
  }
}

TEST_CASE("fixture replay has 648 values") {
  const auto table = testing::FixtureTable();
  CHECK(table.size() * 3 == 648);
  CHECK(table.Regimes().size() == 3);
  for (auto regime : table.Regimes()) CHECK(table.Models(regime).size() == 6);
  CHECK_NOTHROW(table.Validate());
}

TEST_CASE("metric csv round-trips") {
  const auto table = testing::FixtureTable();
  std::ostringstream out;
  WriteMetricCsv(table, out);
  std::istringstream in(out.str());
  CHECK(ReadMetricCsv(in) == table);
}

TEST_CASE("metric csv errors") {
  std::istringstream bad("regime,test_set,model,class,metric,value\nregular,test,m,sad,acc,x\n");
  CHECK(KindOf([&] { ReadMetricCsv(bad); }) == ErrorKind::kParse);
  std::istringstream partial(
      "regime,test_set,model,class,metric,value\nregular,test,m,sad,acc,0.5\n");
  CHECK(KindOf([&] { ReadMetricCsv(partial); }) == ErrorKind::kIncompleteTable);
}
