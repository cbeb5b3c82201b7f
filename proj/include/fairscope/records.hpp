#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fairscope::records {

enum class EmotionLabel : std::uint8_t {
  kHappiness,
  kSurprise,
  kSadness,
  kDisgust,
  kAnger,
  kContempt,
};

// Report order; matches the column order of every published table.
enum class FusedLabel : std::uint8_t {
  kSurprised,
  kUpset,
  kSad,
  kHappy,
};

enum class Gender : std::uint8_t { kMale, kFemale };

enum class Regime : std::uint8_t { kRegular, kFemaleTrained, kMaleTrained };

enum class Veracity : std::uint8_t { kGenuine, kFake };

enum class Taxonomy : std::uint8_t { kRaw6, kFused4 };

inline constexpr std::array<EmotionLabel, 6> kEmotionLabels = {
    EmotionLabel::kHappiness, EmotionLabel::kSurprise, EmotionLabel::kSadness,
    EmotionLabel::kDisgust,   EmotionLabel::kAnger,    EmotionLabel::kContempt};

inline constexpr std::array<FusedLabel, 4> kFusedLabels = {
    FusedLabel::kSurprised, FusedLabel::kUpset, FusedLabel::kSad,
    FusedLabel::kHappy};

inline constexpr std::array<Regime, 3> kRegimes = {
    Regime::kRegular, Regime::kFemaleTrained, Regime::kMaleTrained};

inline constexpr std::size_t kFusedClassCount = kFusedLabels.size();

constexpr std::size_t ClassCount(Taxonomy t) {
  return t == Taxonomy::kRaw6 ? kEmotionLabels.size() : kFusedLabels.size();
}

constexpr std::size_t Index(FusedLabel l) { return static_cast<std::size_t>(l); }
constexpr std::size_t Index(EmotionLabel l) { return static_cast<std::size_t>(l); }

// Canonical lowercase names. Parsing is case-insensitive and throws a parse
// error on unknown names.
std::string_view Name(EmotionLabel label);
std::string_view Name(FusedLabel label);
std::string_view Name(Gender gender);
std::string_view Name(Regime regime);  // regular | female | male
std::string_view Name(Veracity veracity);
std::string_view Name(Taxonomy taxonomy);

EmotionLabel ParseEmotion(std::string_view text);
FusedLabel ParseFused(std::string_view text);
Gender ParseGender(std::string_view text);
Regime ParseRegime(std::string_view text);
Veracity ParseVeracity(std::string_view text);

// Contempt, disgust and anger collapse into Upset.
FusedLabel FuseLabel(EmotionLabel raw);

// Logits or probabilities, one entry per class.
using ScoreVector = std::vector<double>;

// Max-subtracted softmax. Throws kInvalidScore on non-finite input.
ScoreVector Softmax(std::span<const double> logits);

// Index of the largest entry; ties go to the lowest index.
std::size_t Argmax(std::span<const double> scores);

// Argmax over a 4-way vector in report order. Throws kTaxonomyMismatch when
// the length is not 4.
FusedLabel Decode(std::span<const double> scores);

// Collapses a 6-way vector (EmotionLabel order) into report order by summing
// the three Upset constituents. Non-probability inputs go through Softmax
// first.
ScoreVector FuseScores(std::span<const double> raw_scores);

struct PredictionRecord {
  using Prediction = std::variant<std::uint8_t, ScoreVector>;

  std::string model_id;
  Regime regime = Regime::kRegular;
  std::string subject_id;
  Gender gender = Gender::kMale;
  std::string video_id;
  Veracity veracity = Veracity::kGenuine;
  // Class indices are interpreted in the owning RecordSet's taxonomy.
  std::uint8_t true_class = 0;
  Prediction prediction = std::uint8_t{0};

  std::uint8_t PredictedClass() const;
  bool HasScores() const { return std::holds_alternative<ScoreVector>(prediction); }

  bool operator==(const PredictionRecord&) const = default;
};

// Immutable, validated collection of predictions sharing one taxonomy.
class RecordSet {
 public:
  RecordSet() = default;
  // Throws kDuplication on a repeated (model_id, regime, video_id) key and
  // kTaxonomyMismatch on out-of-range classes, wrong score lengths or mixed
  // prediction kinds.
  RecordSet(std::vector<PredictionRecord> records, Taxonomy taxonomy);

  std::span<const PredictionRecord> records() const { return records_; }
  Taxonomy taxonomy() const { return taxonomy_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  bool score_mode() const;

  // Re-labels into the 4-class taxonomy. Identity when already fused.
  RecordSet Fused() const;

  bool operator==(const RecordSet&) const = default;

 private:
  std::vector<PredictionRecord> records_;
  Taxonomy taxonomy_ = Taxonomy::kFused4;
};

// Reads the prediction CSV. Label mode, 4-way score mode and 6-way score mode
// are detected from the header. Errors carry the 1-based line number.
RecordSet Ingest(std::istream& in, bool fuse);

// Writes a RecordSet back in the same CSV schema Ingest accepts.
void Emit(const RecordSet& set, std::ostream& out);

}  // namespace fairscope::records
