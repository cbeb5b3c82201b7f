#include "fairscope/preprocess.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "fairscope/error.hpp"
#include "fairscope/random.hpp"
#include "text.hpp"

namespace fairscope::preprocess {
namespace {

constexpr std::array<std::string_view, 4> kPresetNames = {"k10", "k20", "k50", "custom"};

std::uint8_t ToByte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
}

// Nearest centroid; a tie keeps `current` when it is among the minima,
// otherwise the lowest index wins.
std::size_t Nearest(std::span<const double> point, const std::vector<FrameVector>& centroids,
                    std::size_t current, double& best_distance) {
  std::size_t best = 0;
  best_distance = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = SquaredDistance(point, centroids[c]);
    if (d < best_distance || (d == best_distance && c == current)) {
      best_distance = d;
      best = c;
    }
  }
  return best;
}

std::vector<FrameVector> PlusPlusInit(std::span<const FrameVector> points, std::size_t k,
                                      Xoshiro256& rng) {
  const std::size_t n = points.size();
  std::vector<FrameVector> centroids;
  std::vector<bool> chosen(n, false);
  std::size_t first = static_cast<std::size_t>(rng.Below(n));
  centroids.push_back(points[first]);
  chosen[first] = true;

  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) nearest[i] = SquaredDistance(points[i], centroids[0]);
  while (centroids.size() < k) {
    double total = 0.0;
    for (double d : nearest) total += d;
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = rng.Uniform() * total;
      double cumulative = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (nearest[i] <= 0.0) continue;
        cumulative += nearest[i];
        pick = i;
        if (cumulative > target) break;
      }
    } else {
      // All remaining points coincide with a centroid.
      for (std::size_t i = 0; i < n && pick == n; ++i) {
        if (!chosen[i]) pick = i;
      }
    }
    chosen[pick] = true;
    centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], SquaredDistance(points[i], centroids.back()));
    }
  }
  return centroids;
}

}  // namespace

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

FrameVector FeaturizeFrame(const Image& frame) {
  const int h = frame.height;
  const int w = frame.width;
  std::vector<double> luma(static_cast<std::size_t>(h) * w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      // Integer weights keep white at exactly 1.0.
      const int y = 299 * frame.at(r, c, 0) + 587 * frame.at(r, c, 1) + 114 * frame.at(r, c, 2);
      luma[static_cast<std::size_t>(r) * w + c] = static_cast<double>(y) / 255000.0;
    }
  }
  auto source = [&](int out, int size) {
    const double s = (out + 0.5) * static_cast<double>(size) / kFeatureSide - 0.5;
    return std::clamp(s, 0.0, static_cast<double>(size - 1));
  };
  FrameVector out(kFeatureLength);
  for (int oy = 0; oy < kFeatureSide; ++oy) {
    const double sy = source(oy, h);
    const int y0 = static_cast<int>(sy);
    const int y1 = std::min(y0 + 1, h - 1);
    const double fy = sy - y0;
    for (int ox = 0; ox < kFeatureSide; ++ox) {
      const double sx = source(ox, w);
      const int x0 = static_cast<int>(sx);
      const int x1 = std::min(x0 + 1, w - 1);
      const double fx = sx - x0;
      auto L = [&](int y, int x) { return luma[static_cast<std::size_t>(y) * w + x]; };
      const double top = L(y0, x0) + (L(y0, x1) - L(y0, x0)) * fx;
      const double bottom = L(y1, x0) + (L(y1, x1) - L(y1, x0)) * fx;
      out[static_cast<std::size_t>(oy) * kFeatureSide + ox] =
          std::clamp(top + (bottom - top) * fy, 0.0, 1.0);
    }
  }
  return out;
}

std::vector<FrameVector> Featurize(const Clip& clip) {
  std::vector<FrameVector> out;
  out.reserve(clip.frames.size());
  for (const auto& f : clip.frames) out.push_back(FeaturizeFrame(f));
  return out;
}

KMeansResult KMeans(std::span<const FrameVector> points, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options) {
  const std::size_t n = points.size();
  if (k == 0 || n < k) {
    throw Error(ErrorKind::kInfeasibleClustering,
                "cannot form " + std::to_string(k) + " clusters from " + std::to_string(n) +
                    " points");
  }
  const std::size_t dims = points.front().size();
  for (const auto& p : points) {
    if (p.size() != dims) throw Error(ErrorKind::kInfeasibleClustering, "ragged points");
  }

  Xoshiro256 rng(seed);
  KMeansResult result;
  result.centroids = PlusPlusInit(points, k, rng);
  result.assignments.assign(n, k);  // k == unassigned
  std::vector<double> distance(n);

  auto assign = [&] {
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      result.assignments[i] = Nearest(points[i], result.centroids, result.assignments[i], distance[i]);
      inertia += distance[i];
    }
    result.inertia = inertia;
    result.inertia_history.push_back(inertia);
  };

  assign();
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    std::vector<FrameVector> sums(k, FrameVector(dims, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& sum = sums[result.assignments[i]];
      for (std::size_t d = 0; d < dims; ++d) sum[d] += points[i][d];
      ++counts[result.assignments[i]];
    }
    std::vector<FrameVector> next(k);
    std::vector<bool> reseeded(n, false);
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        next[c] = std::move(sums[c]);
        for (double& v : next[c]) v /= static_cast<double>(counts[c]);
        continue;
      }
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (!reseeded[i] && (far == n || distance[i] > distance[far])) far = i;
      }
      reseeded[far] = true;
      next[c] = points[far];
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      shift = std::max(shift, std::sqrt(SquaredDistance(next[c], result.centroids[c])));
    }
    result.centroids = std::move(next);
    assign();
    result.iterations = iter;
    if (shift < options.tolerance) break;
  }
  return result;
}

std::string_view Name(Preset preset) { return kPresetNames[static_cast<std::size_t>(preset)]; }

Preset ParsePreset(std::string_view t) {
  for (std::size_t i = 0; i < kPresetNames.size(); ++i) {
    if (text::IEquals(t, kPresetNames[i])) return static_cast<Preset>(i);
  }
  throw Error(ErrorKind::kParse, "unknown keyframe preset '" + std::string(t) + "'");
}

std::size_t KeyframeConfig::k() const {
  std::size_t k = 0;
  for (auto q : segment_quotas) k += q;
  return k;
}

KeyframeConfig KeyframeConfig::FromPreset(Preset preset) {
  switch (preset) {
    case Preset::kK10: return {Preset::kK10, 0, {10}};
    case Preset::kK20: return {Preset::kK20, 100, {20}};  // drop the first second at 100 fps
    case Preset::kK50: return {Preset::kK50, 0, {20, 30}};
    case Preset::kCustom: break;
  }
  throw Error(ErrorKind::kParse, "custom keyframe config needs explicit quotas");
}

KeyframeConfig KeyframeConfig::Custom(std::size_t skip_leading, std::vector<std::size_t> quotas) {
  if (quotas.empty() || std::find(quotas.begin(), quotas.end(), 0u) != quotas.end()) {
    throw Error(ErrorKind::kParse, "segment quotas must be positive");
  }
  return {Preset::kCustom, skip_leading, std::move(quotas)};
}

std::vector<std::size_t> SelectKeyframes(std::span<const FrameVector> features,
                                         const KeyframeConfig& config, std::uint64_t seed) {
  const std::size_t n = features.size();
  const std::size_t begin = std::min(config.skip_leading, n);
  const std::size_t length = n - begin;
  const std::size_t segments = config.segment_quotas.size();

  std::vector<std::size_t> selected;
  for (std::size_t s = 0; s < segments; ++s) {
    const std::size_t lo = begin + s * length / segments;
    const std::size_t hi = begin + (s + 1) * length / segments;
    const std::size_t quota = config.segment_quotas[s];
    if (hi - lo < quota) {
      throw Error(ErrorKind::kInfeasibleSelection,
                  "segment " + std::to_string(s) + " [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + ") has " + std::to_string(hi - lo) +
                      " candidate frames, needs " + std::to_string(quota));
    }
    const auto candidates = features.subspan(lo, hi - lo);
    const KMeansResult km = KMeans(candidates, quota, DeriveSeed(seed, std::uint64_t{s}));

    std::vector<bool> used(candidates.size(), false);
    auto nearest_unused = [&](std::size_t cluster, bool members_only) {
      std::size_t best = candidates.size();
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (used[i] || (members_only && km.assignments[i] != cluster)) continue;
        const double d = SquaredDistance(candidates[i], km.centroids[cluster]);
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      return best;
    };
    for (std::size_t c = 0; c < quota; ++c) {
      std::size_t pick = nearest_unused(c, true);
      if (pick == candidates.size()) pick = nearest_unused(c, false);
      used[pick] = true;
      selected.push_back(lo + pick);
    }
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

std::vector<std::size_t> SelectKeyframes(const Clip& clip, const KeyframeConfig& config,
                                         std::uint64_t seed) {
  clip.Validate();
  return SelectKeyframes(Featurize(clip), config, seed);
}

std::vector<std::size_t> Subsample(std::span<const std::size_t> indices, std::size_t count) {
  if (count >= indices.size()) return {indices.begin(), indices.end()};
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(indices[(2 * i + 1) * indices.size() / (2 * count)]);
  }
  return out;
}

nlohmann::ordered_json KeyframesToJson(const std::string& video_id, const KeyframeConfig& config,
                                       std::span<const std::size_t> indices) {
  return {{"video_id", video_id},
          {"k", config.k()},
          {"preset", Name(config.preset)},
          {"indices", std::vector<std::size_t>(indices.begin(), indices.end())}};
}

AugmentPlan PlanAugmentation(std::uint64_t seed) {
  Xoshiro256 rng(seed);
  AugmentPlan plan;
  plan.seed = seed;
  plan.flip = rng.Bernoulli(kAugmentProbability);
  plan.rotate = rng.Bernoulli(kAugmentProbability);
  plan.brighten = rng.Bernoulli(kAugmentProbability);
  if (plan.rotate) plan.angle_degrees = rng.Uniform(-kMaxRotationDegrees, kMaxRotationDegrees);
  if (plan.brighten) plan.factor = rng.Uniform(kMinBrightness, kMaxBrightness);
  return plan;
}

Image FlipHorizontal(const Image& frame) {
  Image out(frame.height, frame.width);
  for (int r = 0; r < frame.height; ++r)
    for (int c = 0; c < frame.width; ++c)
      for (int ch = 0; ch < 3; ++ch) out.at(r, frame.width - 1 - c, ch) = frame.at(r, c, ch);
  return out;
}

Image Rotate(const Image& frame, double angle_degrees) {
  const double theta = angle_degrees * std::numbers::pi / 180.0;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double cx = (frame.width - 1) / 2.0;
  const double cy = (frame.height - 1) / 2.0;
  Image out(frame.height, frame.width);
  auto sample = [&](int y, int x, int ch) -> double {
    if (y < 0 || y >= frame.height || x < 0 || x >= frame.width) return 0.0;
    return frame.at(y, x, ch);
  };
  for (int r = 0; r < frame.height; ++r) {
    for (int c = 0; c < frame.width; ++c) {
      const double dx = c - cx;
      const double dy = r - cy;
      const double sx = cx + dx * cos_t - dy * sin_t;
      const double sy = cy + dx * sin_t + dy * cos_t;
      const double fx0 = std::floor(sx);
      const double fy0 = std::floor(sy);
      if (fx0 < -1.0 || fy0 < -1.0 || fx0 > frame.width || fy0 > frame.height) continue;
      const int x0 = static_cast<int>(fx0);
      const int y0 = static_cast<int>(fy0);
      const double fx = sx - fx0;
      const double fy = sy - fy0;
      for (int ch = 0; ch < 3; ++ch) {
        const double top = sample(y0, x0, ch) * (1 - fx) + sample(y0, x0 + 1, ch) * fx;
        const double bottom = sample(y0 + 1, x0, ch) * (1 - fx) + sample(y0 + 1, x0 + 1, ch) * fx;
        out.at(r, c, ch) = ToByte(top * (1 - fy) + bottom * fy);
      }
    }
  }
  return out;
}

Image Brighten(const Image& frame, double factor) {
  Image out = frame;
  for (auto& v : out.rgb) v = ToByte(v * factor);
  return out;
}

Clip ApplyAugmentation(const AugmentPlan& plan, const Clip& clip) {
  Clip out;
  out.fps = clip.fps;
  out.frames.reserve(clip.frames.size());
  for (const auto& frame : clip.frames) {
    Image f = plan.flip ? FlipHorizontal(frame) : frame;
    if (plan.rotate) f = Rotate(f, plan.angle_degrees);
    if (plan.brighten) f = Brighten(f, plan.factor);
    out.frames.push_back(std::move(f));
  }
  return out;
}

namespace {

template <typename Fn>
void ParallelFor(std::size_t count, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  {
    std::vector<std::jthread> workers;
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < count && !failed; i = next++) {
          try {
            fn(i);
          } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::vector<std::vector<std::size_t>> SelectKeyframesCorpus(std::span<const NamedClip> clips,
                                                            const KeyframeConfig& config,
                                                            std::uint64_t seed,
                                                            unsigned threads) {
  std::vector<std::vector<std::size_t>> out(clips.size());
  ParallelFor(clips.size(), threads, [&](std::size_t i) {
    out[i] = SelectKeyframes(clips[i].clip, config, DeriveSeed(seed, clips[i].video_id));
  });
  return out;
}

std::vector<Clip> AugmentCorpus(std::span<const NamedClip> clips, std::uint64_t seed,
                                unsigned threads) {
  std::vector<Clip> out(clips.size());
  ParallelFor(clips.size(), threads, [&](std::size_t i) {
    out[i] = ApplyAugmentation(PlanAugmentation(DeriveSeed(seed, clips[i].video_id)),
                               clips[i].clip);
  });
  return out;
}

}  // namespace fairscope::preprocess
