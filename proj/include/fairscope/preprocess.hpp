#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fairscope/image.hpp"
#include "json.hpp"

namespace fairscope::preprocess {

using image::Clip;
using image::Image;

// 32x32 luma thumbnail in [0,1], flattened row-major.
using FrameVector = std::vector<double>;
inline constexpr int kFeatureSide = 32;
inline constexpr std::size_t kFeatureLength = kFeatureSide * kFeatureSide;

// Bilinear resize (pixel-center aligned) of the frame's luma
// 0.299R + 0.587G + 0.114B, scaled to [0,1].
FrameVector FeaturizeFrame(const Image& frame);
std::vector<FrameVector> Featurize(const Clip& clip);

struct KMeansOptions {
  int max_iterations = 300;
  double tolerance = 1e-6;  // max centroid displacement
};

struct KMeansResult {
  std::vector<FrameVector> centroids;
  std::vector<std::size_t> assignments;
  double inertia = 0.0;
  int iterations = 0;
  // Inertia after the initial assignment and after every Lloyd step.
  std::vector<double> inertia_history;
};

double SquaredDistance(std::span<const double> a, std::span<const double> b);

// Lloyd's algorithm from a seeded k-means++ start. Empty clusters are
// reseeded with the point farthest from its centroid. Throws
// kInfeasibleClustering when k is 0 or exceeds the number of points.
KMeansResult KMeans(std::span<const FrameVector> points, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options = {});

enum class Preset : std::uint8_t { kK10, kK20, kK50, kCustom };
std::string_view Name(Preset preset);  // k10 | k20 | k50 | custom
Preset ParsePreset(std::string_view text);

// Candidate frames are [skip_leading, N), split into consecutive equal
// segments (extra frames go to later segments), each clustered separately
// with its own quota.
struct KeyframeConfig {
  Preset preset = Preset::kK10;
  std::size_t skip_leading = 0;
  std::vector<std::size_t> segment_quotas{10};

  std::size_t k() const;

  static KeyframeConfig FromPreset(Preset preset);
  static KeyframeConfig Custom(std::size_t skip_leading, std::vector<std::size_t> quotas);
};

// Frame nearest each centroid (ties to the lowest index, already-chosen
// frames skipped), sorted ascending. Throws kInfeasibleSelection naming the
// segment that has fewer candidates than its quota.
std::vector<std::size_t> SelectKeyframes(std::span<const FrameVector> features,
                                         const KeyframeConfig& config, std::uint64_t seed);
std::vector<std::size_t> SelectKeyframes(const Clip& clip, const KeyframeConfig& config,
                                         std::uint64_t seed);

// Evenly spaced subset of `count` selected indices (identity when count is
// at least the input size).
std::vector<std::size_t> Subsample(std::span<const std::size_t> indices, std::size_t count);

nlohmann::ordered_json KeyframesToJson(const std::string& video_id, const KeyframeConfig& config,
                                       std::span<const std::size_t> indices);

struct AugmentPlan {
  bool flip = false;
  bool rotate = false;
  double angle_degrees = 0.0;  // in [-15, 15]; positive is counterclockwise
  bool brighten = false;
  double factor = 1.0;  // in [0.75, 1.25]
  std::uint64_t seed = 0;

  bool operator==(const AugmentPlan&) const = default;
};

inline constexpr double kAugmentProbability = 0.5;
inline constexpr double kMaxRotationDegrees = 15.0;
inline constexpr double kMinBrightness = 0.75;
inline constexpr double kMaxBrightness = 1.25;

// Three Bernoulli(0.5) draws in the order flip, rotate, brighten, then the
// rotation angle and brightness factor for the flags that fired.
AugmentPlan PlanAugmentation(std::uint64_t seed);

Image FlipHorizontal(const Image& frame);
// Rotation about the frame center, bilinear, black outside the source.
Image Rotate(const Image& frame, double angle_degrees);
Image Brighten(const Image& frame, double factor);

// Applies flip, rotation, brightness (in that order) with identical
// parameters on every frame.
Clip ApplyAugmentation(const AugmentPlan& plan, const Clip& clip);

struct NamedClip {
  std::string video_id;
  Clip clip;
};

// Corpus drivers: every clip gets the stream DeriveSeed(seed, video_id), so
// results do not depend on the thread count.
std::vector<std::vector<std::size_t>> SelectKeyframesCorpus(std::span<const NamedClip> clips,
                                                            const KeyframeConfig& config,
                                                            std::uint64_t seed,
                                                            unsigned threads);
std::vector<Clip> AugmentCorpus(std::span<const NamedClip> clips, std::uint64_t seed,
                                unsigned threads);

}  // namespace fairscope::preprocess
