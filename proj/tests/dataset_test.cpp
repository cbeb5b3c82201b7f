#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "fairscope/dataset.hpp"
#include "fairscope/error.hpp"
#include "fairscope/random.hpp"
#include "test_util.hpp"

using namespace fairscope;
using namespace fairscope::dataset;

namespace {

ErrorKind KindOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected fairscope::Error");
  return ErrorKind::kIo;
}

Manifest Load(const std::string& text) {
  std::istringstream in(text);
  return LoadManifest(in);
}

Manifest WithFemales(std::size_t n) {
  auto m = CanonicalManifest();
  for (std::size_t i = 0; i < m.subjects.size(); ++i) {
    m.subjects[i].gender = i < n ? Gender::kFemale : Gender::kMale;
  }
  return m;
}

}  // namespace

TEST_CASE("canonical manifest") {
  const auto m = CanonicalManifest();
  CHECK(m.subjects.size() == 50);
  CHECK(m.VideoCount() == 600);
  CHECK(std::count_if(m.subjects.begin(), m.subjects.end(),
                      [](const auto& s) { return s.gender == Gender::kFemale; }) == 18);
  const auto reloaded = ParseManifest(nlohmann::json::parse(ToJson(m).dump()));
  CHECK(reloaded.subjects == m.subjects);
  CHECK(reloaded.warnings.empty());
}

TEST_CASE("manifest errors and warnings") {
  CHECK(KindOf([] { Load(R"({"subjects": []})"); }) == ErrorKind::kParse);
  CHECK(KindOf([] { Load(R"({"people": []})"); }) == ErrorKind::kParse);
  CHECK(KindOf([] { Load("not json"); }) == ErrorKind::kParse);
  CHECK(KindOf([] {
          Load(R"({"subjects": [{"id": "a", "gender": "female", "videos": []},
                                {"id": "a", "gender": "male", "videos": []}]})");
        }) == ErrorKind::kDuplication);

  const auto toy = Load(R"({"subjects": [
      {"id": "a", "gender": "female", "videos": [
        {"video_id": "a1", "path": "a/1", "emotion": "anger", "veracity": "fake",
         "frame_count": 500, "fps": 100}]},
      {"id": "b", "gender": "male", "videos": []},
      {"id": "c", "gender": "male", "videos": []}]})");
  CHECK(toy.subjects.size() == 3);
  CHECK_FALSE(toy.warnings.empty());
  CHECK(toy.subjects[0].videos[0].emotion == records::EmotionLabel::kAnger);
}

TEST_CASE("default split counts") {
  const auto m = CanonicalManifest();
  const auto split = MakeSplit(m, {1, 2});
  CHECK(split.test_subjects.size() == 10);
  CHECK(split.val_subjects.size() == 8);
  CHECK(split.train_subjects.size() == 32);
  CHECK(split.test_videos.size() == 120);
  CHECK(split.val_videos.size() == 96);
  CHECK(split.train_videos.size() == 384);
  CHECK(testing::SplitViolation(m, split).empty());
}

TEST_CASE("split invariants over seeds") {
  const auto m = CanonicalManifest();
  auto permuted = m;
  std::reverse(permuted.subjects.begin(), permuted.subjects.end());
  std::rotate(permuted.subjects.begin(), permuted.subjects.begin() + 7, permuted.subjects.end());
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const SplitConfig config{seed, seed * 7 + 3};
    const auto split = MakeSplit(m, config);
    CHECK_MESSAGE(testing::SplitViolation(m, split).empty(), seed);
    CHECK(MakeSplit(m, config) == split);
    CHECK(MakeSplit(permuted, config) == split);
    const auto other_val = MakeSplit(m, {seed, seed + 1000});
    CHECK(other_val.test_subjects == split.test_subjects);
  }
}

TEST_CASE("val fraction") {
  const auto m = CanonicalManifest();
  SplitConfig config{1, 2};
  config.val_fraction = 0.2;
  const auto split = MakeSplit(m, config);
  CHECK(split.resolved_val_count == 8);  // round(0.2 * 40)
  CHECK(split.train_subjects.size() == 32);
  config.val_fraction = 1.0;
  CHECK(KindOf([&] { MakeSplit(m, config); }) == ErrorKind::kInfeasibleSplit);
}

TEST_CASE("infeasible splits") {
  const auto nine = WithFemales(9);
  SplitConfig config{1, 2};
  config.test_per_gender = 10;
  CHECK(KindOf([&] { MakeSplit(nine, config); }) == ErrorKind::kInfeasibleSplit);
  config.test_per_gender = 5;
  config.val_subject_count = 40;
  CHECK(KindOf([&] { MakeSplit(CanonicalManifest(), config); }) == ErrorKind::kInfeasibleSplit);
}

TEST_CASE("gender subsets") {
  const auto m = CanonicalManifest();
  const auto split = MakeSplit(m, {1, 2});
  const auto female_pool = GenderSubset(split, m, Gender::kFemale, Partition::kPool);
  CHECK(female_pool.subjects.size() == 13);
  CHECK(female_pool.videos.size() == 13 * 12);
  const auto female_val = GenderSubset(split, m, Gender::kFemale, Partition::kVal);
  const auto female_train = GenderSubset(split, m, Gender::kFemale, Partition::kTrain);
  CHECK(female_train.subjects.size() + female_val.subjects.size() == 13);

  const auto male_test = GenderSubset(split, m, Gender::kMale, Partition::kTest);
  CHECK(male_test.subjects.size() == 5);
  CHECK(male_test.videos.size() == 60);

  auto one_female = WithFemales(5);
  const auto s = MakeSplit(one_female, {3, 4});
  CHECK(GenderSubset(s, one_female, Gender::kFemale, Partition::kTrain).subjects.empty());
  CHECK(GenderSubset(s, one_female, Gender::kFemale, Partition::kVal).videos.empty());
}

TEST_CASE("split json lists every partition") {
  const auto j = ToJson(MakeSplit(CanonicalManifest(), {1, 2}));
  CHECK(j["test"].size() == 10);
  CHECK(j["videos"]["train"] == 384);
  CHECK(j.dump() == ToJson(MakeSplit(CanonicalManifest(), {1, 2})).dump());
}
