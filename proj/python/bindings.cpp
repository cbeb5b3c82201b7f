#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "fairscope/audit.hpp"
#include "fairscope/dataset.hpp"
#include "fairscope/error.hpp"
#include "fairscope/fairness.hpp"
#include "fairscope/metrics.hpp"
#include "fairscope/preprocess.hpp"
#include "fairscope/records.hpp"

namespace py = pybind11;
using namespace fairscope;

namespace {

// Results cross the boundary as plain dicts/lists; JSON is the lingua franca.
py::object FromJson(const nlohmann::ordered_json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

metrics::MetricTable ParseMetrics(const std::string& csv) {
  std::istringstream in(csv);
  return metrics::ReadMetricCsv(in);
}

std::string MetricsCsv(const metrics::MetricTable& table) {
  std::ostringstream out;
  metrics::WriteMetricCsv(table, out);
  return out.str();
}

py::dict CountsDict(const metrics::ClassCounts& c) {
  py::dict d;
  d["tp"] = c.tp;
  d["fp"] = c.fp;
  d["tn"] = c.tn;
  d["fn"] = c.fn;
  return d;
}

image::Clip ClipFromArray(py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> a) {
  if (a.ndim() != 4 || a.shape(3) != 3) {
    throw py::value_error("clip must have shape (frames, height, width, 3)");
  }
  image::Clip clip;
  const auto frames = a.shape(0), h = a.shape(1), w = a.shape(2);
  const std::uint8_t* data = a.data();
  const std::size_t frame_bytes = static_cast<std::size_t>(h * w * 3);
  for (py::ssize_t f = 0; f < frames; ++f) {
    image::Image img(static_cast<int>(h), static_cast<int>(w));
    std::copy(data + f * frame_bytes, data + (f + 1) * frame_bytes, img.rgb.begin());
    clip.frames.push_back(std::move(img));
  }
  clip.Validate();
  return clip;
}

py::array_t<std::uint8_t> ClipToArray(const image::Clip& clip) {
  const auto& first = clip.frames.front();
  py::array_t<std::uint8_t> out({static_cast<py::ssize_t>(clip.frames.size()),
                                 static_cast<py::ssize_t>(first.height),
                                 static_cast<py::ssize_t>(first.width), py::ssize_t{3}});
  std::uint8_t* dst = out.mutable_data();
  for (const auto& f : clip.frames) dst = std::copy(f.rgb.begin(), f.rgb.end(), dst);
  return out;
}

}  // namespace

PYBIND11_MODULE(_fairscope, m) {
  m.doc() = "fairscope core bindings";
  m.attr("__version__") = std::string(audit::ToolVersion());

  static py::exception<Error> error(m, "FairscopeError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(ErrorKindName(e.kind())) + ": " + e.what()).c_str());
    }
  });

  // records
  m.def("fuse_label", [](const std::string& raw) {
    return std::string(records::Name(records::FuseLabel(records::ParseEmotion(raw))));
  }, py::arg("raw"));
  m.def("softmax", [](const std::vector<double>& logits) { return records::Softmax(logits); },
        py::arg("logits"));
  m.def("decode", [](const std::vector<double>& scores) {
    return std::string(records::Name(records::Decode(scores)));
  }, py::arg("scores"));
  m.def("ingest", [](const std::string& csv, bool fuse) {
    std::istringstream in(csv);
    const auto set = records::Ingest(in, fuse);
    std::ostringstream out;
    records::Emit(set, out);
    py::dict d;
    d["size"] = set.size();
    d["taxonomy"] = std::string(records::Name(set.taxonomy()));
    d["csv"] = out.str();
    return d;
  }, py::arg("csv"), py::arg("fuse") = false,
  "Validate prediction CSV text; returns size, taxonomy and the normalized CSV.");

  // metrics
  m.def("class_metrics", [](std::int64_t tp, std::int64_t fp, std::int64_t tn, std::int64_t fn) {
    const auto cm = metrics::ComputeClassMetrics({tp, fp, tn, fn});
    return py::make_tuple(cm.acc, cm.tpr, cm.fpr);
  }, py::arg("tp"), py::arg("fp"), py::arg("tn"), py::arg("fn"));
  m.def("reconstruct_counts", [](double acc, double tpr, double fpr, std::int64_t positives,
                                 std::int64_t negatives) {
    const auto r = metrics::ReconstructCounts({acc, tpr, fpr}, {positives, negatives});
    py::dict d = CountsDict(r.counts);
    d["consistent"] = r.consistent;
    return d;
  }, py::arg("acc"), py::arg("tpr"), py::arg("fpr"), py::arg("positives"), py::arg("negatives"));
  m.def("load_metrics", [](const std::string& csv) { return MetricsCsv(ParseMetrics(csv)); },
        py::arg("csv"), "Validate and normalize a metric CSV.");
  m.def("table_from_records", [](const std::string& csv) {
    std::istringstream in(csv);
    return MetricsCsv(metrics::BuildTable(records::Ingest(in, true)));
  }, py::arg("csv"), "Metric CSV computed from prediction CSV text.");

  // fairness
  m.def("gaps", [](const std::string& metric_csv, const std::string& definition,
                   const std::string& regime, const std::string& aggregation,
                   const std::string& eqod_combine) {
    const fairness::GapOptions options{fairness::ParseAggregation(aggregation),
                                       fairness::ParseEqodCombine(eqod_combine)};
    const auto report = fairness::ComputeGaps(ParseMetrics(metric_csv), records::ParseRegime(regime),
                                              fairness::ParseDefinition(definition), options);
    return FromJson(fairness::ToJson(report, fairness::Rank(report)));
  }, py::arg("metrics_csv"), py::arg("definition"), py::arg("regime"),
     py::arg("aggregation") = "mean", py::arg("eqod_combine") = "mean");
  m.def("rank", [](const std::map<std::string, double>& aggregates) {
    fairness::GapReport report;
    for (const auto& [model, value] : aggregates) report.models.push_back({model, {}, value});
    return fairness::Rank(report).tiers;
  }, py::arg("aggregates"));
  m.def("verify_claims", [](const std::string& metric_csv) {
    py::list out;
    for (const auto& c : fairness::VerifyClaims(ParseMetrics(metric_csv)).claims) {
      py::dict d;
      d["id"] = c.id;
      d["expected"] = std::string(fairness::Name(c.expected));
      d["verdict"] = std::string(fairness::Name(c.verdict));
      d["matches"] = c.matches();
      out.append(d);
    }
    return out;
  }, py::arg("metrics_csv"));
  m.def("verify_paper", [] { return FromJson(audit::ToJson(audit::VerifyPaper())); });
  m.def("aggregate_stats", [](const std::string& metric_csv, const std::string& regime,
                              const std::string& set) {
    return FromJson(audit::ToJson(audit::AggregateStats(
        ParseMetrics(metric_csv), records::ParseRegime(regime), metrics::ParseGroup(set))));
  }, py::arg("metrics_csv"), py::arg("regime"), py::arg("set"));

  // dataset
  m.def("canonical_manifest", [] { return FromJson(dataset::ToJson(dataset::CanonicalManifest())); });
  m.def("make_split", [](py::object manifest, std::uint64_t test_seed, std::uint64_t val_seed,
                         int test_per_gender, int val_subjects) {
    const std::string text = py::module_::import("json").attr("dumps")(manifest).cast<std::string>();
    const auto parsed = dataset::ParseManifest(nlohmann::json::parse(text));
    const dataset::SplitConfig config{test_seed, val_seed, test_per_gender, val_subjects, {}};
    return FromJson(dataset::ToJson(dataset::MakeSplit(parsed, config)));
  }, py::arg("manifest"), py::arg("test_seed"), py::arg("val_seed"),
     py::arg("test_per_gender") = 5, py::arg("val_subjects") = 8);

  // preprocess
  m.def("featurize", [](py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> clip) {
    return preprocess::Featurize(ClipFromArray(clip));
  }, py::arg("clip"));
  m.def("kmeans", [](const std::vector<std::vector<double>>& points, std::size_t k,
                     std::uint64_t seed) {
    const auto r = preprocess::KMeans(points, k, seed);
    py::dict d;
    d["centroids"] = r.centroids;
    d["assignments"] = r.assignments;
    d["inertia"] = r.inertia;
    d["iterations"] = r.iterations;
    d["inertia_history"] = r.inertia_history;
    return d;
  }, py::arg("points"), py::arg("k"), py::arg("seed"));
  m.def("select_keyframes", [](py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> clip,
                               const std::string& preset, std::uint64_t seed) {
    return preprocess::SelectKeyframes(
        ClipFromArray(clip), preprocess::KeyframeConfig::FromPreset(preprocess::ParsePreset(preset)),
        seed);
  }, py::arg("clip"), py::arg("preset"), py::arg("seed"));
  m.def("plan_augmentation", [](std::uint64_t seed) {
    const auto p = preprocess::PlanAugmentation(seed);
    py::dict d;
    d["flip"] = p.flip;
    d["rotate"] = p.rotate;
    d["angle_degrees"] = p.angle_degrees;
    d["brighten"] = p.brighten;
    d["factor"] = p.factor;
    d["seed"] = p.seed;
    return d;
  }, py::arg("seed"));
  m.def("apply_augmentation", [](py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> clip,
                                 bool flip, double angle_degrees, double factor) {
    preprocess::AugmentPlan plan;
    plan.flip = flip;
    plan.rotate = angle_degrees != 0.0;
    plan.angle_degrees = angle_degrees;
    plan.brighten = factor != 1.0;
    plan.factor = factor;
    return ClipToArray(preprocess::ApplyAugmentation(plan, ClipFromArray(clip)));
  }, py::arg("clip"), py::arg("flip") = false, py::arg("angle_degrees") = 0.0,
     py::arg("factor") = 1.0);
}
