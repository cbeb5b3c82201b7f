#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <filesystem>
#include <limits>
#include <set>

#include "fairscope/error.hpp"
#include "fairscope/preprocess.hpp"
#include "fairscope/random.hpp"

using namespace fairscope;
using namespace fairscope::preprocess;
using image::Clip;
using image::Image;

namespace {

Image Solid(int h, int w, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  Image img(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      img.at(y, x, 0) = r;
      img.at(y, x, 1) = g;
      img.at(y, x, 2) = b;
    }
  }
  return img;
}

Image Noise(Xoshiro256& rng, int h, int w) {
  Image img(h, w);
  for (auto& v : img.rgb) v = static_cast<std::uint8_t>(rng.Below(256));
  return img;
}

Clip NoiseClip(Xoshiro256& rng, int frames, int h, int w) {
  Clip clip;
  for (int i = 0; i < frames; ++i) clip.frames.push_back(Noise(rng, h, w));
  return clip;
}

std::vector<FrameVector> RandomPoints(Xoshiro256& rng, std::size_t n, std::size_t dims) {
  std::vector<FrameVector> pts(n, FrameVector(dims));
  for (auto& p : pts) {
    for (auto& v : p) v = rng.Uniform();
  }
  return pts;
}

// Minimum within-cluster SSE over every split of 1-D points into two
// non-empty groups; returns the SSE and the bit mask of points sharing point
// 0's group.
std::pair<double, unsigned> BestTwoPartition(const std::vector<double>& xs) {
  const unsigned n = static_cast<unsigned>(xs.size());
  double best = std::numeric_limits<double>::infinity();
  unsigned best_mask = 0;
  for (unsigned mask = 1; mask < (1u << n); mask += 2) {
    if (mask == (1u << n) - 1) continue;
    double sse = 0.0;
    for (unsigned side = 0; side < 2; ++side) {
      double sum = 0.0;
      int count = 0;
      for (unsigned i = 0; i < n; ++i) {
        if (((mask >> i) & 1u) == side) {
          sum += xs[i];
          ++count;
        }
      }
      const double mean = sum / count;
      for (unsigned i = 0; i < n; ++i) {
        if (((mask >> i) & 1u) == side) sse += (xs[i] - mean) * (xs[i] - mean);
      }
    }
    if (sse < best) {
      best = sse;
      best_mask = mask;
    }
  }
  return {best, best_mask};
}

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

TEST_CASE("featurize solid frames") {
  const auto black = FeaturizeFrame(Solid(48, 64, 0, 0, 0));
  const auto white = FeaturizeFrame(Solid(48, 64, 255, 255, 255));
  const auto gray = FeaturizeFrame(Solid(7, 5, 128, 128, 128));
  REQUIRE(black.size() == kFeatureSide * kFeatureSide);
  REQUIRE(gray.size() == kFeatureSide * kFeatureSide);
  for (double v : black) CHECK(v == 0.0);
  for (double v : white) CHECK(v == 1.0);
  for (double v : gray) CHECK(v == doctest::Approx(128.0 / 255).epsilon(1e-12));
}

TEST_CASE("featurize uses the luma weights") {
  CHECK(FeaturizeFrame(Solid(4, 4, 255, 0, 0))[0] == doctest::Approx(0.299));
  CHECK(FeaturizeFrame(Solid(4, 4, 0, 255, 0))[0] == doctest::Approx(0.587));
  CHECK(FeaturizeFrame(Solid(4, 4, 0, 0, 255))[0] == doctest::Approx(0.114));
}

TEST_CASE("featurize is deterministic and dimension stable") {
  Xoshiro256 rng(2);
  for (auto [h, w] : {std::pair{1, 1}, {3, 100}, {32, 32}, {120, 90}}) {
    const auto img = Noise(rng, h, w);
    const auto a = FeaturizeFrame(img);
    CHECK(a.size() == kFeatureSide * kFeatureSide);
    CHECK(a == FeaturizeFrame(img));
    for (double v : a) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("kmeans with k equal to the point count") {
  Xoshiro256 rng(6);
  const auto pts = RandomPoints(rng, 6, 3);
  const auto r = KMeans(pts, 6, 1);
  CHECK(r.inertia == 0.0);
  std::set<std::size_t> clusters(r.assignments.begin(), r.assignments.end());
  CHECK(clusters.size() == 6);
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(r.centroids[r.assignments[i]] == pts[i]);
}

TEST_CASE("kmeans on two groups of identical points") {
  std::vector<FrameVector> pts;
  for (int i = 0; i < 5; ++i) pts.push_back({0.2, 0.4});
  for (int i = 0; i < 3; ++i) pts.push_back({0.9, 0.1});
  const auto r = KMeans(pts, 2, 12);
  CHECK(r.inertia == doctest::Approx(0.0));
  const std::size_t a = r.assignments[0];
  const std::size_t b = r.assignments[5];
  REQUIRE(a != b);
  CHECK(r.centroids[a][0] == doctest::Approx(0.2));
  CHECK(r.centroids[a][1] == doctest::Approx(0.4));
  CHECK(r.centroids[b][0] == doctest::Approx(0.9));
  CHECK(r.centroids[b][1] == doctest::Approx(0.1));
}

TEST_CASE("kmeans matches the brute-force two partition") {
  const std::vector<double> xs{0, 0.01, 0.02, 0.03, 1, 1.01, 1.02, 1.03};
  const auto [best_sse, best_mask] = BestTwoPartition(xs);
  std::vector<FrameVector> pts;
  for (double x : xs) pts.push_back({x});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = KMeans(pts, 2, seed);
    CHECK(r.inertia == doctest::Approx(best_sse).epsilon(1e-12));
    unsigned with_first = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (r.assignments[i] == r.assignments[0]) with_first |= 1u << i;
    }
    CHECK(with_first == best_mask);
  }
  CHECK(best_mask == 0x0fu);
}

TEST_CASE("kmeans inertia never increases") {
  Xoshiro256 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const auto n = 10 + rng.Below(60);
    const auto pts = RandomPoints(rng, n, 1 + rng.Below(5));
    const auto k = 1 + rng.Below(std::min<std::uint64_t>(n, 8));
    const auto r = KMeans(pts, k, rng.Next());
    REQUIRE(!r.inertia_history.empty());
    for (std::size_t i = 1; i < r.inertia_history.size(); ++i) {
      CHECK(r.inertia_history[i] <= r.inertia_history[i - 1] + 1e-12);
    }
    CHECK(r.inertia == doctest::Approx(r.inertia_history.back()));
    CHECK(r.iterations <= 300);
  }
}

TEST_CASE("kmeans is seed deterministic") {
  Xoshiro256 rng(1);
  const auto pts = RandomPoints(rng, 40, 4);
  const auto a = KMeans(pts, 5, 99);
  const auto b = KMeans(pts, 5, 99);
  CHECK(a.assignments == b.assignments);
  CHECK(a.centroids == b.centroids);
}

TEST_CASE("kmeans errors") {
  std::vector<FrameVector> pts{{0.0}, {1.0}};
  CHECK(KindOf([&] { KMeans(pts, 3, 0); }) == ErrorKind::kInfeasibleClustering);
  CHECK(KindOf([&] { KMeans(pts, 0, 0); }) == ErrorKind::kInfeasibleClustering);
}

TEST_CASE("keyframe presets") {
  CHECK(KeyframeConfig::FromPreset(Preset::kK10).k() == 10);
  CHECK(KeyframeConfig::FromPreset(Preset::kK20).skip_leading == 100);
  CHECK(KeyframeConfig::FromPreset(Preset::kK50).segment_quotas ==
        std::vector<std::size_t>{20, 30});
  CHECK(ParsePreset("K50") == Preset::kK50);
}

TEST_CASE("k20 on a 600-frame clip skips the first second") {
  Xoshiro256 rng(4);
  const auto features = RandomPoints(rng, 600, 6);
  const auto idx = SelectKeyframes(features, KeyframeConfig::FromPreset(Preset::kK20), 3);
  CHECK(idx.size() == 20);
  for (auto i : idx) CHECK(i >= 100);
}

TEST_CASE("k50 on a 1000-frame clip splits 20/30 by halves") {
  Xoshiro256 rng(5);
  const auto features = RandomPoints(rng, 1000, 6);
  const auto idx = SelectKeyframes(features, KeyframeConfig::FromPreset(Preset::kK50), 3);
  CHECK(idx.size() == 50);
  CHECK(std::count_if(idx.begin(), idx.end(), [](auto i) { return i < 500; }) == 20);
  CHECK(std::count_if(idx.begin(), idx.end(), [](auto i) { return i >= 500; }) == 30);
}

TEST_CASE("identical frames still give distinct keyframes") {
  Clip clip;
  for (int i = 0; i < 10; ++i) clip.frames.push_back(Solid(8, 8, 40, 50, 60));
  const auto idx = SelectKeyframes(clip, KeyframeConfig::FromPreset(Preset::kK10), 1);
  CHECK(idx == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
}

TEST_CASE("selection is unique, sorted and inside the candidates") {
  Xoshiro256 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto n = 60 + rng.Below(100);
    const auto features = RandomPoints(rng, n, 3);
    const auto config = KeyframeConfig::Custom(rng.Below(20), {3 + rng.Below(5), 2 + rng.Below(5)});
    const auto idx = SelectKeyframes(features, config, rng.Next());
    CHECK(idx.size() == config.k());
    CHECK(std::is_sorted(idx.begin(), idx.end()));
    CHECK(std::set<std::size_t>(idx.begin(), idx.end()).size() == idx.size());
    for (auto i : idx) {
      CHECK(i >= config.skip_leading);
      CHECK(i < n);
    }
  }
}

TEST_CASE("too short a segment names it") {
  Xoshiro256 rng(9);
  const auto features = RandomPoints(rng, 110, 2);
  try {
    SelectKeyframes(features, KeyframeConfig::FromPreset(Preset::kK20), 1);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInfeasibleSelection);
    CHECK(std::string(e.what()).find("segment 0") != std::string::npos);
  }
}

TEST_CASE("subsample") {
  const std::vector<std::size_t> idx{0, 10, 20, 30, 40, 50, 60, 70, 80, 90};
  CHECK(Subsample(idx, 20) == idx);
  CHECK(Subsample(idx, 5) == std::vector<std::size_t>{10, 30, 50, 70, 90});
  CHECK(Subsample(idx, 1) == std::vector<std::size_t>{50});
}

TEST_CASE("augmentation plans") {
  CHECK(PlanAugmentation(77) == PlanAugmentation(77));
  Xoshiro256 rng(0);
  for (int i = 0; i < 1000; ++i) {
    const auto p = PlanAugmentation(rng.Next());
    if (p.rotate) {
      CHECK(p.angle_degrees >= -15.0);
      CHECK(p.angle_degrees <= 15.0);
    } else {
      CHECK(p.angle_degrees == 0.0);
    }
    if (p.brighten) {
      CHECK(p.factor >= 0.75);
      CHECK(p.factor <= 1.25);
    } else {
      CHECK(p.factor == 1.0);
    }
  }
}

TEST_CASE("augmentation identities") {
  Xoshiro256 rng(10);
  const auto clip = NoiseClip(rng, 3, 9, 13);
  CHECK(ApplyAugmentation(AugmentPlan{}, clip) == clip);

  AugmentPlan flip;
  flip.flip = true;
  CHECK(ApplyAugmentation(flip, ApplyAugmentation(flip, clip)) == clip);
  CHECK(Brighten(clip.frames[0], 1.0) == clip.frames[0]);
  CHECK(Rotate(clip.frames[0], 0.0) == clip.frames[0]);

  AugmentPlan all{true, true, 7.5, true, 1.1, 0};
  const auto out = ApplyAugmentation(all, clip);
  CHECK(out.frames.size() == clip.frames.size());
  for (const auto& f : out.frames) {
    CHECK(f.height == 9);
    CHECK(f.width == 13);
  }
}

TEST_CASE("flip mirrors a single pixel") {
  Image img(5, 7);
  for (int ch = 0; ch < 3; ++ch) img.at(2, 1, ch) = 255;
  const auto out = FlipHorizontal(img);
  CHECK(out.at(2, 7 - 1 - 1, 0) == 255);
  CHECK(out.at(2, 1, 0) == 0);
}

TEST_CASE("rotation is counterclockwise about the center") {
  Image img(5, 5);
  for (int ch = 0; ch < 3; ++ch) img.at(2, 3, ch) = 200;  // right of center
  const auto out = Rotate(img, 90.0);
  CHECK(out.at(1, 2, 0) == 200);  // moved above center
  CHECK(out.at(2, 3, 0) == 0);
  const auto corner = Rotate(Solid(21, 21, 255, 255, 255), 45.0);
  CHECK(corner.at(0, 0, 0) == 0);  // filled with black
  CHECK(corner.at(10, 10, 0) == 255);
}

TEST_CASE("brightness is monotone for unclamped pixels") {
  Xoshiro256 rng(12);
  const auto img = Noise(rng, 6, 6);
  const auto lo = Brighten(img, 0.8);
  const auto hi = Brighten(img, 1.2);
  for (std::size_t i = 0; i < img.rgb.size(); ++i) {
    CHECK(lo.rgb[i] <= hi.rgb[i]);
    if (img.rgb[i] * 1.2 < 255) CHECK(hi.rgb[i] == static_cast<int>(std::lround(img.rgb[i] * 1.2)));
  }
}

TEST_CASE("corpus drivers do not depend on thread count") {
  Xoshiro256 rng(14);
  std::vector<NamedClip> clips;
  for (int i = 0; i < 6; ++i) {
    clips.push_back({"v" + std::to_string(i), NoiseClip(rng, 30, 6, 6)});
  }
  const auto config = KeyframeConfig::Custom(5, {4});
  CHECK(SelectKeyframesCorpus(clips, config, 3, 1) == SelectKeyframesCorpus(clips, config, 3, 4));
  const auto serial = AugmentCorpus(clips, 3, 1);
  const auto parallel = AugmentCorpus(clips, 3, 3);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) CHECK(serial[i] == parallel[i]);
}

TEST_CASE("png round trip") {
  Xoshiro256 rng(15);
  const auto dir = std::filesystem::temp_directory_path() / "fairscope_png_test";
  std::filesystem::remove_all(dir);
  const auto clip = NoiseClip(rng, 3, 7, 5);
  image::WriteClip(dir, clip);
  CHECK(image::ReadClip(dir) == clip);
  std::filesystem::remove_all(dir);
}
