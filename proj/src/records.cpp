#include "fairscope/records.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <tuple>

#include "fairscope/error.hpp"
#include "text.hpp"

namespace fairscope::records {
namespace {

constexpr std::array<std::string_view, 6> kEmotionNames = {
    "happiness", "surprise", "sadness", "disgust", "anger", "contempt"};
constexpr std::array<std::string_view, 4> kFusedNames = {"surprised", "upset",
                                                         "sad", "happy"};
constexpr std::array<std::string_view, 7> kKeyColumns = {
    "model_id", "regime", "subject_id", "gender", "video_id", "veracity", "true_label"};

template <typename Enum, std::size_t N>
bool TryParse(std::string_view text, const std::array<std::string_view, N>& names,
              Enum& out) {
  for (std::size_t i = 0; i < N; ++i) {
    if (text::IEquals(text, names[i])) {
      out = static_cast<Enum>(i);
      return true;
    }
  }
  return false;
}

template <typename Enum, std::size_t N>
Enum ParseOrThrow(std::string_view text, const std::array<std::string_view, N>& names,
                  std::string_view what) {
  Enum out{};
  if (!TryParse(text, names, out)) {
    throw Error(ErrorKind::kParse,
                "unknown " + std::string(what) + " '" + std::string(text) + "'");
  }
  return out;
}

constexpr std::array<std::string_view, 2> kGenderNames = {"male", "female"};
constexpr std::array<std::string_view, 3> kRegimeNames = {"regular", "female", "male"};
constexpr std::array<std::string_view, 2> kVeracityNames = {"genuine", "fake"};

bool IsProbabilityVector(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) {
    if (!(x >= 0.0 && x <= 1.0)) return false;
    sum += x;
  }
  return std::abs(sum - 1.0) <= 1e-6;
}

std::string ScoreColumn(Taxonomy taxonomy, std::size_t i) {
  return "score_" + std::string(taxonomy == Taxonomy::kRaw6 ? kEmotionNames[i]
                                                            : kFusedNames[i]);
}

enum class Layout { kLabel, kScore4, kScore6 };

[[noreturn]] void Fail(std::size_t line, const std::string& message,
                       ErrorKind kind = ErrorKind::kParse) {
  throw Error(kind, "line " + std::to_string(line) + ": " + message);
}

// Parses a class label in either taxonomy; returns false on unknown names.
bool ParseAnyLabel(std::string_view field, Taxonomy& taxonomy, std::uint8_t& index) {
  FusedLabel fused{};
  if (TryParse(field, kFusedNames, fused)) {
    taxonomy = Taxonomy::kFused4;
    index = static_cast<std::uint8_t>(fused);
    return true;
  }
  EmotionLabel raw{};
  if (TryParse(field, kEmotionNames, raw)) {
    taxonomy = Taxonomy::kRaw6;
    index = static_cast<std::uint8_t>(raw);
    return true;
  }
  return false;
}

}  // namespace

std::string_view Name(EmotionLabel label) { return kEmotionNames[Index(label)]; }
std::string_view Name(FusedLabel label) { return kFusedNames[Index(label)]; }
std::string_view Name(Gender gender) { return kGenderNames[static_cast<std::size_t>(gender)]; }
std::string_view Name(Regime regime) { return kRegimeNames[static_cast<std::size_t>(regime)]; }
std::string_view Name(Veracity v) { return kVeracityNames[static_cast<std::size_t>(v)]; }
std::string_view Name(Taxonomy t) { return t == Taxonomy::kRaw6 ? "raw6" : "fused4"; }

EmotionLabel ParseEmotion(std::string_view text) {
  return ParseOrThrow<EmotionLabel>(text, kEmotionNames, "emotion");
}
FusedLabel ParseFused(std::string_view text) {
  return ParseOrThrow<FusedLabel>(text, kFusedNames, "fused label");
}
Gender ParseGender(std::string_view text) {
  return ParseOrThrow<Gender>(text, kGenderNames, "gender");
}
Regime ParseRegime(std::string_view text) {
  return ParseOrThrow<Regime>(text, kRegimeNames, "regime");
}
Veracity ParseVeracity(std::string_view text) {
  return ParseOrThrow<Veracity>(text, kVeracityNames, "veracity");
}

FusedLabel FuseLabel(EmotionLabel raw) {
  switch (raw) {
    case EmotionLabel::kHappiness: return FusedLabel::kHappy;
    case EmotionLabel::kSurprise: return FusedLabel::kSurprised;
    case EmotionLabel::kSadness: return FusedLabel::kSad;
    case EmotionLabel::kDisgust:
    case EmotionLabel::kAnger:
    case EmotionLabel::kContempt: return FusedLabel::kUpset;
  }
  return FusedLabel::kUpset;
}

ScoreVector Softmax(std::span<const double> logits) {
  if (logits.empty()) throw Error(ErrorKind::kInvalidScore, "empty score vector");
  for (double x : logits) {
    if (!std::isfinite(x)) throw Error(ErrorKind::kInvalidScore, "non-finite score");
  }
  const double peak = *std::max_element(logits.begin(), logits.end());
  ScoreVector out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

std::size_t Argmax(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

FusedLabel Decode(std::span<const double> scores) {
  if (scores.size() != kFusedClassCount) {
    throw Error(ErrorKind::kTaxonomyMismatch,
                "expected 4 scores, got " + std::to_string(scores.size()));
  }
  return static_cast<FusedLabel>(Argmax(scores));
}

ScoreVector FuseScores(std::span<const double> raw_scores) {
  if (raw_scores.size() != kEmotionLabels.size()) {
    throw Error(ErrorKind::kTaxonomyMismatch,
                "expected 6 scores, got " + std::to_string(raw_scores.size()));
  }
  const ScoreVector probs = IsProbabilityVector(raw_scores)
                                ? ScoreVector(raw_scores.begin(), raw_scores.end())
                                : Softmax(raw_scores);
  ScoreVector fused(kFusedClassCount, 0.0);
  for (EmotionLabel e : kEmotionLabels) fused[Index(FuseLabel(e))] += probs[Index(e)];
  return fused;
}

std::uint8_t PredictionRecord::PredictedClass() const {
  if (const auto* label = std::get_if<std::uint8_t>(&prediction)) return *label;
  return static_cast<std::uint8_t>(Argmax(std::get<ScoreVector>(prediction)));
}

RecordSet::RecordSet(std::vector<PredictionRecord> records, Taxonomy taxonomy)
    : records_(std::move(records)), taxonomy_(taxonomy) {
  const std::size_t classes = ClassCount(taxonomy_);
  std::set<std::tuple<std::string_view, Regime, std::string_view>> keys;
  for (const auto& r : records_) {
    if (!keys.emplace(r.model_id, r.regime, r.video_id).second) {
      throw Error(ErrorKind::kDuplication,
                  "duplicate record key (" + r.model_id + ", " +
                      std::string(Name(r.regime)) + ", " + r.video_id + ")");
    }
    if (r.true_class >= classes) {
      throw Error(ErrorKind::kTaxonomyMismatch, "true class out of range for " +
                                                    std::string(Name(taxonomy_)));
    }
    if (r.HasScores() != records_.front().HasScores()) {
      throw Error(ErrorKind::kTaxonomyMismatch, "mixed label and score predictions");
    }
    if (const auto* scores = std::get_if<ScoreVector>(&r.prediction)) {
      if (scores->size() != classes) {
        throw Error(ErrorKind::kTaxonomyMismatch,
                    "score vector length " + std::to_string(scores->size()) +
                        " does not match taxonomy " + std::string(Name(taxonomy_)));
      }
    } else if (std::get<std::uint8_t>(r.prediction) >= classes) {
      throw Error(ErrorKind::kTaxonomyMismatch, "predicted class out of range");
    }
  }
}

bool RecordSet::score_mode() const {
  return !records_.empty() && records_.front().HasScores();
}

RecordSet RecordSet::Fused() const {
  if (taxonomy_ == Taxonomy::kFused4) return *this;
  std::vector<PredictionRecord> fused = records_;
  for (auto& r : fused) {
    r.true_class = static_cast<std::uint8_t>(
        Index(FuseLabel(static_cast<EmotionLabel>(r.true_class))));
    if (auto* scores = std::get_if<ScoreVector>(&r.prediction)) {
      r.prediction = FuseScores(*scores);
    } else {
      r.prediction = static_cast<std::uint8_t>(Index(
          FuseLabel(static_cast<EmotionLabel>(std::get<std::uint8_t>(r.prediction)))));
    }
  }
  return RecordSet(std::move(fused), Taxonomy::kFused4);
}

RecordSet Ingest(std::istream& in, bool fuse) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (!have_header && std::getline(in, line)) {
    ++line_no;
    have_header = !text::Trim(line).empty();
  }
  if (!have_header) Fail(1, "empty input, header required");

  const auto header = text::SplitCsvLine(line);
  if (header.size() < kKeyColumns.size() + 1) Fail(line_no, "header has too few columns");
  for (std::size_t i = 0; i < kKeyColumns.size(); ++i) {
    if (!text::IEquals(header[i], kKeyColumns[i])) {
      Fail(line_no, "expected column '" + std::string(kKeyColumns[i]) + "', found '" +
                        std::string(header[i]) + "'");
    }
  }
  const auto tail = std::span(header).subspan(kKeyColumns.size());
  auto matches_scores = [&](Taxonomy t) {
    if (tail.size() != ClassCount(t)) return false;
    for (std::size_t i = 0; i < tail.size(); ++i) {
      if (!text::IEquals(tail[i], ScoreColumn(t, i))) return false;
    }
    return true;
  };
  Layout layout{};
  std::optional<Taxonomy> taxonomy;
  if (tail.size() == 1 && text::IEquals(tail[0], "pred_label")) {
    layout = Layout::kLabel;
  } else if (matches_scores(Taxonomy::kFused4)) {
    layout = Layout::kScore4;
    taxonomy = Taxonomy::kFused4;
  } else if (matches_scores(Taxonomy::kRaw6)) {
    layout = Layout::kScore6;
    taxonomy = Taxonomy::kRaw6;
  } else {
    Fail(line_no, "unrecognized prediction columns");
  }

  std::vector<PredictionRecord> records;
  std::set<std::tuple<std::string, Regime, std::string>> keys;
  auto label_field = [&](std::string_view field, std::string_view column) {
    Taxonomy t{};
    std::uint8_t index = 0;
    if (!ParseAnyLabel(field, t, index)) {
      Fail(line_no, "unknown " + std::string(column) + " '" + std::string(field) + "'");
    }
    if (!taxonomy) taxonomy = t;
    if (*taxonomy != t) {
      Fail(line_no, std::string(column) + " '" + std::string(field) +
                        "' does not belong to the " + std::string(Name(*taxonomy)) +
                        " taxonomy");
    }
    return index;
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (text::Trim(line).empty()) continue;
    const auto fields = text::SplitCsvLine(line);
    if (fields.size() != header.size()) {
      Fail(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                        std::to_string(fields.size()));
    }
    PredictionRecord r;
    try {
      r.model_id = std::string(fields[0]);
      r.regime = ParseRegime(fields[1]);
      r.subject_id = std::string(fields[2]);
      r.gender = ParseGender(fields[3]);
      r.video_id = std::string(fields[4]);
      r.veracity = ParseVeracity(fields[5]);
    } catch (const Error& e) {
      Fail(line_no, e.what());
    }
    if (r.model_id.empty() || r.subject_id.empty() || r.video_id.empty()) {
      Fail(line_no, "empty identifier");
    }
    r.true_class = label_field(fields[6], "true_label");
    if (layout == Layout::kLabel) {
      r.prediction = label_field(fields[7], "pred_label");
    } else {
      ScoreVector scores(tail.size());
      for (std::size_t i = 0; i < tail.size(); ++i) {
        if (!text::ParseDouble(fields[7 + i], scores[i]) || !std::isfinite(scores[i])) {
          Fail(line_no, "invalid score '" + std::string(fields[7 + i]) + "'");
        }
      }
      r.prediction = std::move(scores);
    }
    if (!keys.emplace(r.model_id, r.regime, r.video_id).second) {
      Fail(line_no,
           "duplicate record key (" + r.model_id + ", " + std::string(Name(r.regime)) +
               ", " + r.video_id + ")",
           ErrorKind::kDuplication);
    }
    records.push_back(std::move(r));
  }
  if (records.empty()) Fail(line_no, "no records");

  RecordSet set(std::move(records), *taxonomy);
  return fuse ? set.Fused() : set;
}

void Emit(const RecordSet& set, std::ostream& out) {
  const Taxonomy t = set.taxonomy();
  auto label_name = [t](std::uint8_t index) {
    return t == Taxonomy::kRaw6 ? kEmotionNames[index] : kFusedNames[index];
  };
  for (auto column : kKeyColumns) out << column << ',';
  if (set.score_mode()) {
    for (std::size_t i = 0; i < ClassCount(t); ++i) {
      out << (i ? "," : "") << ScoreColumn(t, i);
    }
  } else {
    out << "pred_label";
  }
  out << '\n';
  for (const auto& r : set.records()) {
    out << r.model_id << ',' << Name(r.regime) << ',' << r.subject_id << ','
        << Name(r.gender) << ',' << r.video_id << ',' << Name(r.veracity) << ','
        << label_name(r.true_class);
    if (const auto* scores = std::get_if<ScoreVector>(&r.prediction)) {
      for (double s : *scores) out << ',' << text::FormatDouble(s);
    } else {
      out << ',' << label_name(std::get<std::uint8_t>(r.prediction));
    }
    out << '\n';
  }
}

}  // namespace fairscope::records
