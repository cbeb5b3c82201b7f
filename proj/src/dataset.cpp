#include "fairscope/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <set>

#include "fairscope/error.hpp"
#include "fairscope/random.hpp"

namespace fairscope::dataset {
namespace {

using nlohmann::json;

[[noreturn]] void SchemaError(const std::string& message) {
  throw Error(ErrorKind::kParse, "manifest: " + message);
}

const json& Field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) SchemaError(where + " lacks '" + key + "'");
  return obj.at(key);
}

std::string StringField(const json& obj, const char* key, const std::string& where) {
  const json& v = Field(obj, key, where);
  if (!v.is_string() || v.get_ref<const std::string&>().empty()) {
    SchemaError(where + "." + key + " must be a non-empty string");
  }
  return v.get<std::string>();
}

template <typename Fn>
auto Parsed(Fn&& fn, const std::string& where) {
  try {
    return fn();
  } catch (const Error& e) {
    SchemaError(where + ": " + e.what());
  }
}

std::vector<std::string> Draw(std::vector<std::string> pool, std::size_t count,
                              Xoshiro256& rng) {
  // Partial Fisher-Yates over the sorted pool.
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.Below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::vector<std::string> VideosOf(const Manifest& manifest,
                                  const std::vector<std::string>& subjects) {
  std::vector<std::string> videos;
  for (const auto& id : subjects) {
    for (const auto& v : manifest.Find(id)->videos) videos.push_back(v.video_id);
  }
  std::sort(videos.begin(), videos.end());
  return videos;
}

}  // namespace

const SubjectEntry* Manifest::Find(const std::string& subject_id) const {
  for (const auto& s : subjects) {
    if (s.id == subject_id) return &s;
  }
  return nullptr;
}

std::size_t Manifest::VideoCount() const {
  std::size_t n = 0;
  for (const auto& s : subjects) n += s.videos.size();
  return n;
}

Manifest ParseManifest(const json& j) {
  const json& subjects = Field(j, "subjects", "manifest");
  if (!subjects.is_array()) SchemaError("'subjects' must be an array");
  if (subjects.empty()) SchemaError("'subjects' is empty");

  Manifest m;
  std::set<std::string> subject_ids;
  std::set<std::string> video_ids;
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    const json& s = subjects[i];
    const std::string where = "subjects[" + std::to_string(i) + "]";
    SubjectEntry entry;
    entry.id = StringField(s, "id", where);
    entry.gender = Parsed([&] { return records::ParseGender(StringField(s, "gender", where)); }, where);
    if (!subject_ids.insert(entry.id).second) {
      throw Error(ErrorKind::kDuplication, "manifest: duplicate subject id '" + entry.id + "'");
    }
    const json& videos = Field(s, "videos", where);
    if (!videos.is_array()) SchemaError(where + ".videos must be an array");
    for (std::size_t k = 0; k < videos.size(); ++k) {
      const json& v = videos[k];
      const std::string vwhere = where + ".videos[" + std::to_string(k) + "]";
      VideoEntry video;
      video.video_id = StringField(v, "video_id", vwhere);
      video.path = StringField(v, "path", vwhere);
      video.emotion = Parsed([&] { return records::ParseEmotion(StringField(v, "emotion", vwhere)); }, vwhere);
      video.veracity = Parsed([&] { return records::ParseVeracity(StringField(v, "veracity", vwhere)); }, vwhere);
      const json& frames = Field(v, "frame_count", vwhere);
      const json& fps = Field(v, "fps", vwhere);
      if (!frames.is_number_integer() || frames.get<std::int64_t>() <= 0) {
        SchemaError(vwhere + ".frame_count must be a positive integer");
      }
      if (!fps.is_number() || !(fps.get<double>() > 0.0)) {
        SchemaError(vwhere + ".fps must be positive");
      }
      video.frame_count = frames.get<std::int64_t>();
      video.fps = fps.get<double>();
      if (!video_ids.insert(video.video_id).second) {
        throw Error(ErrorKind::kDuplication,
                    "manifest: duplicate video id '" + video.video_id + "'");
      }
      entry.videos.push_back(std::move(video));
    }
    m.subjects.push_back(std::move(entry));
  }

  const auto females = static_cast<std::size_t>(std::count_if(
      m.subjects.begin(), m.subjects.end(),
      [](const auto& s) { return s.gender == Gender::kFemale; }));
  if (m.subjects.size() != kSaseFeSubjects) {
    m.warnings.push_back("expected " + std::to_string(kSaseFeSubjects) + " subjects, found " +
                         std::to_string(m.subjects.size()));
  }
  if (females != kSaseFeFemales || m.subjects.size() - females != kSaseFeSubjects - kSaseFeFemales) {
    m.warnings.push_back("expected 18 female / 32 male subjects, found " +
                         std::to_string(females) + " / " +
                         std::to_string(m.subjects.size() - females));
  }
  for (const auto& s : m.subjects) {
    if (s.videos.size() != kSaseFeVideosPerSubject) {
      m.warnings.push_back("subject " + s.id + " has " + std::to_string(s.videos.size()) +
                           " videos, expected 12");
    }
  }
  return m;
}

Manifest LoadManifest(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("manifest: invalid JSON: ") + e.what());
  }
  return ParseManifest(j);
}

nlohmann::ordered_json ToJson(const Manifest& manifest) {
  nlohmann::ordered_json j;
  auto& subjects = j["subjects"] = nlohmann::ordered_json::array();
  for (const auto& s : manifest.subjects) {
    nlohmann::ordered_json videos = nlohmann::ordered_json::array();
    for (const auto& v : s.videos) {
      videos.push_back({{"video_id", v.video_id},
                        {"path", v.path},
                        {"emotion", records::Name(v.emotion)},
                        {"veracity", records::Name(v.veracity)},
                        {"frame_count", v.frame_count},
                        {"fps", v.fps}});
    }
    subjects.push_back({{"id", s.id}, {"gender", records::Name(s.gender)}, {"videos", videos}});
  }
  return j;
}

Manifest CanonicalManifest(std::int64_t frame_count) {
  Manifest m;
  for (std::size_t i = 0; i < kSaseFeSubjects; ++i) {
    char id[8];
    std::snprintf(id, sizeof(id), "s%02zu", i + 1);
    SubjectEntry s{id, i < kSaseFeFemales ? Gender::kFemale : Gender::kMale, {}};
    for (auto emotion : records::kEmotionLabels) {
      for (auto veracity : {Veracity::kGenuine, Veracity::kFake}) {
        const std::string stem = std::string(records::Name(emotion)) + "_" +
                                 std::string(records::Name(veracity));
        s.videos.push_back({s.id + "_" + stem, s.id + "/" + stem, emotion, veracity,
                            frame_count, 100.0});
      }
    }
    m.subjects.push_back(std::move(s));
  }
  return m;
}

SplitAssignment MakeSplit(const Manifest& manifest, const SplitConfig& config) {
  if (config.test_per_gender < 1) {
    throw Error(ErrorKind::kInfeasibleSplit, "test_per_gender must be at least 1");
  }
  std::vector<std::string> females;
  std::vector<std::string> males;
  for (const auto& s : manifest.subjects) {
    (s.gender == Gender::kFemale ? females : males).push_back(s.id);
  }
  std::sort(females.begin(), females.end());
  std::sort(males.begin(), males.end());
  const auto per_gender = static_cast<std::size_t>(config.test_per_gender);
  if (females.size() < per_gender || males.size() < per_gender) {
    throw Error(ErrorKind::kInfeasibleSplit,
                "need " + std::to_string(per_gender) + " test subjects per gender, have " +
                    std::to_string(females.size()) + " female / " +
                    std::to_string(males.size()) + " male");
  }

  SplitAssignment split;
  split.config = config;
  Xoshiro256 test_rng(config.test_seed);
  split.test_subjects = Draw(females, per_gender, test_rng);
  const auto test_males = Draw(males, per_gender, test_rng);
  split.test_subjects.insert(split.test_subjects.end(), test_males.begin(), test_males.end());
  std::sort(split.test_subjects.begin(), split.test_subjects.end());

  std::vector<std::string> pool;
  for (const auto* list : {&females, &males}) {
    for (const auto& id : *list) {
      if (!std::binary_search(split.test_subjects.begin(), split.test_subjects.end(), id)) {
        pool.push_back(id);
      }
    }
  }
  std::sort(pool.begin(), pool.end());

  long val_count = config.val_subject_count;
  if (config.val_fraction) {
    if (!(*config.val_fraction >= 0.0 && *config.val_fraction < 1.0)) {
      throw Error(ErrorKind::kInfeasibleSplit, "val_fraction must be in [0, 1)");
    }
    val_count = std::lround(*config.val_fraction * static_cast<double>(pool.size()));
  }
  if (val_count < 0 || static_cast<std::size_t>(val_count) >= pool.size()) {
    throw Error(ErrorKind::kInfeasibleSplit,
                "validation size " + std::to_string(val_count) +
                    " must be smaller than the train pool of " + std::to_string(pool.size()));
  }
  split.resolved_val_count = static_cast<int>(val_count);

  Xoshiro256 val_rng(config.val_seed);
  split.val_subjects = Draw(pool, static_cast<std::size_t>(val_count), val_rng);
  for (const auto& id : pool) {
    if (!std::binary_search(split.val_subjects.begin(), split.val_subjects.end(), id)) {
      split.train_subjects.push_back(id);
    }
  }
  split.test_videos = VideosOf(manifest, split.test_subjects);
  split.val_videos = VideosOf(manifest, split.val_subjects);
  split.train_videos = VideosOf(manifest, split.train_subjects);
  return split;
}

nlohmann::ordered_json ToJson(const SplitAssignment& split) {
  nlohmann::ordered_json config{{"test_seed", split.config.test_seed},
                                {"val_seed", split.config.val_seed},
                                {"test_per_gender", split.config.test_per_gender},
                                {"val_subject_count", split.resolved_val_count}};
  if (split.config.val_fraction) config["val_fraction"] = *split.config.val_fraction;
  return {{"test", split.test_subjects},
          {"val", split.val_subjects},
          {"train", split.train_subjects},
          {"videos",
           {{"test", split.test_videos.size()},
            {"val", split.val_videos.size()},
            {"train", split.train_videos.size()}}},
          {"config", config}};
}

SubjectVideos GenderSubset(const SplitAssignment& split, const Manifest& manifest,
                           Gender gender, Partition partition) {
  std::vector<std::string> ids;
  if (partition == Partition::kTrain || partition == Partition::kPool) {
    ids.insert(ids.end(), split.train_subjects.begin(), split.train_subjects.end());
  }
  if (partition == Partition::kVal || partition == Partition::kPool) {
    ids.insert(ids.end(), split.val_subjects.begin(), split.val_subjects.end());
  }
  if (partition == Partition::kTest) ids = split.test_subjects;
  std::sort(ids.begin(), ids.end());
  SubjectVideos out;
  for (const auto& id : ids) {
    const SubjectEntry* s = manifest.Find(id);
    if (s != nullptr && s->gender == gender) out.subjects.push_back(id);
  }
  out.videos = VideosOf(manifest, out.subjects);
  return out;
}

}  // namespace fairscope::dataset
