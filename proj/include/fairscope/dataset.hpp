#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fairscope/records.hpp"
#include "json.hpp"

namespace fairscope::dataset {

using records::EmotionLabel;
using records::Gender;
using records::Veracity;

struct VideoEntry {
  std::string video_id;
  std::string path;
  EmotionLabel emotion = EmotionLabel::kHappiness;
  Veracity veracity = Veracity::kGenuine;
  std::int64_t frame_count = 0;
  double fps = 100.0;

  bool operator==(const VideoEntry&) const = default;
};

struct SubjectEntry {
  std::string id;
  Gender gender = Gender::kMale;
  std::vector<VideoEntry> videos;

  bool operator==(const SubjectEntry&) const = default;
};

// SASE-FE geometry: 50 subjects (18 female, 32 male), 12 videos each.
inline constexpr std::size_t kSaseFeSubjects = 50;
inline constexpr std::size_t kSaseFeFemales = 18;
inline constexpr std::size_t kSaseFeVideosPerSubject = 12;

struct Manifest {
  std::vector<SubjectEntry> subjects;
  // Deviations from the SASE-FE shape. Informational only.
  std::vector<std::string> warnings;

  const SubjectEntry* Find(const std::string& subject_id) const;
  std::size_t VideoCount() const;
};

// Throws kParse on schema violations or an empty subject list, kDuplication
// on repeated subject or video ids.
Manifest ParseManifest(const nlohmann::json& j);
Manifest LoadManifest(std::istream& in);
nlohmann::ordered_json ToJson(const Manifest& manifest);

// Synthetic manifest with the canonical SASE-FE shape (ids s01..s50, the
// first 18 female, 6 emotions x genuine/fake, 600 frames at 100 fps).
Manifest CanonicalManifest(std::int64_t frame_count = 600);

struct SplitConfig {
  std::uint64_t test_seed = 0;
  std::uint64_t val_seed = 0;
  int test_per_gender = 5;
  int val_subject_count = 8;
  // When set, overrides val_subject_count with round(fraction * train pool).
  std::optional<double> val_fraction;
};

struct SplitAssignment {
  std::vector<std::string> test_subjects;
  std::vector<std::string> val_subjects;
  std::vector<std::string> train_subjects;
  std::vector<std::string> test_videos;
  std::vector<std::string> val_videos;
  std::vector<std::string> train_videos;
  SplitConfig config;
  int resolved_val_count = 0;

  bool operator==(const SplitAssignment& o) const {
    return test_subjects == o.test_subjects && val_subjects == o.val_subjects &&
           train_subjects == o.train_subjects;
  }
};

// Subject-disjoint split. The test subjects depend only on test_seed, the
// validation subjects on val_seed; subjects are sorted by id before drawing so
// manifest order does not matter. Throws kInfeasibleSplit when a gender has
// fewer than test_per_gender subjects or the validation size leaves no
// training subject.
SplitAssignment MakeSplit(const Manifest& manifest, const SplitConfig& config);

nlohmann::ordered_json ToJson(const SplitAssignment& split);

// kPool is everything outside the test set (train plus validation).
enum class Partition : std::uint8_t { kTrain, kVal, kTest, kPool };

struct SubjectVideos {
  std::vector<std::string> subjects;
  std::vector<std::string> videos;
};

// The one-gender part of a partition (the pure male / pure female sets).
SubjectVideos GenderSubset(const SplitAssignment& split, const Manifest& manifest,
                           Gender gender, Partition partition = Partition::kTrain);

}  // namespace fairscope::dataset
