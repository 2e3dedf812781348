// numpy-facing bindings for the core pipeline operations. Feature maps are
// (D,H,W) float32 arrays, label maps (H,W) uint8, images (3,H,W) float32,
// scores (C,H,W) float32.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mapsr/pipeline.hpp"
#include "mapsr/synth.hpp"

namespace py = pybind11;
using namespace mapsr;

namespace {

FeatureMap to_feature_map(const py::array_t<float, py::array::c_style>& a) {
    if (a.ndim() != 3) throw ValidationError("expected a (D,H,W) array");
    FeatureMap f(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)),
                 static_cast<int>(a.shape(2)));
    std::copy(a.data(), a.data() + a.size(), f.data.begin());
    return f;
}

py::array_t<float> from_feature_map(const FeatureMap& f) {
    py::array_t<float> out({f.d, f.h, f.w});
    std::copy(f.data.begin(), f.data.end(), out.mutable_data());
    return out;
}

ImageRaster to_image(const py::array_t<float, py::array::c_style>& a) {
    if (a.ndim() != 3 || a.shape(0) != 3)
        throw ValidationError("expected a (3,H,W) array");
    ImageRaster img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(2)));
    std::copy(a.data(), a.data() + a.size(), img.data.begin());
    return img;
}

py::array_t<float> from_image(const ImageRaster& img) {
    py::array_t<float> out({3, img.h, img.w});
    std::copy(img.data.begin(), img.data.end(), out.mutable_data());
    return out;
}

LabelMap to_label_map(const py::array_t<uint8_t, py::array::c_style>& a,
                      int classes) {
    if (a.ndim() != 2) throw ValidationError("expected a (H,W) array");
    LabelMap m(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)),
               classes);
    std::copy(a.data(), a.data() + a.size(), m.data.begin());
    m.validate();
    return m;
}

py::array_t<uint8_t> from_label_map(const LabelMap& m) {
    py::array_t<uint8_t> out({m.h, m.w});
    std::copy(m.data.begin(), m.data.end(), out.mutable_data());
    return out;
}

ScoreMap to_score_map(const py::array_t<float, py::array::c_style>& a) {
    if (a.ndim() != 3) throw ValidationError("expected a (C,H,W) array");
    ScoreMap s(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)),
               static_cast<int>(a.shape(2)));
    std::copy(a.data(), a.data() + a.size(), s.data.begin());
    return s;
}

py::array_t<float> from_score_map(const ScoreMap& s) {
    py::array_t<float> out({s.classes, s.h, s.w});
    std::copy(s.data.begin(), s.data.end(), out.mutable_data());
    return out;
}

PromptSet to_prompt_set(const py::array_t<float, py::array::c_style>& a) {
    if (a.ndim() != 2) throw ValidationError("expected a (C,D) prompt array");
    PromptSet ps;
    ps.classes = static_cast<int>(a.shape(0));
    ps.feature_dim = static_cast<int>(a.shape(1));
    ps.prompts.assign(ps.classes, std::vector<float>(ps.feature_dim));
    for (int c = 0; c < ps.classes; ++c)
        for (int d = 0; d < ps.feature_dim; ++d)
            ps.prompts[c][d] = a.at(c, d);
    ps.support_counts.assign(ps.classes, 1);
    ps.provenance.assign(ps.classes, PromptProvenance::oracle_hr);
    return ps;
}

py::array_t<float> prompts_array(const PromptSet& ps) {
    py::array_t<float> out({ps.classes, ps.feature_dim});
    for (int c = 0; c < ps.classes; ++c)
        for (int d = 0; d < ps.feature_dim; ++d)
            out.mutable_at(c, d) = ps.prompts[c][d];
    return out;
}

}  // namespace

PYBIND11_MODULE(_mapsr, m) {
    m.doc() = "prompt-driven land-cover map super-resolution core";

    py::class_<SceneSpec>(m, "SceneSpec")
        .def(py::init<>())
        .def_readwrite("h", &SceneSpec::h)
        .def_readwrite("w", &SceneSpec::w)
        .def_readwrite("classes", &SceneSpec::classes)
        .def_readwrite("feature_dim", &SceneSpec::feature_dim)
        .def_readwrite("patch", &SceneSpec::patch)
        .def_readwrite("n_regions", &SceneSpec::n_regions)
        .def_readwrite("embed_separation", &SceneSpec::embed_separation)
        .def_readwrite("embed_noise", &SceneSpec::embed_noise)
        .def_readwrite("image_noise", &SceneSpec::image_noise)
        .def_readwrite("lr_factor", &SceneSpec::lr_factor)
        .def_readwrite("label_flip_rate", &SceneSpec::label_flip_rate)
        .def_readwrite("seed", &SceneSpec::seed);

    m.def("generate_scene", [](const SceneSpec& spec) {
        Scene s = generate_scene(spec);
        py::dict out;
        out["image"] = from_image(s.image);
        out["patch_features"] = from_feature_map(s.patch_feats);
        out["dense_features"] = from_feature_map(s.dense_feats);
        out["truth"] = from_label_map(s.truth);
        out["lr_labels"] = from_label_map(s.lr_labels);
        py::list means;
        for (const auto& mu : s.class_means) means.append(py::cast(mu));
        out["class_means"] = means;
        return out;
    });

    m.def("majority_downsample",
          [](py::array_t<uint8_t, py::array::c_style> labels, int classes,
             int factor) {
              return from_label_map(
                  majority_downsample(to_label_map(labels, classes), factor));
          },
          py::arg("labels"), py::arg("classes"), py::arg("factor"));

    m.def("upsample_features",
          [](py::array_t<float, py::array::c_style> f_lr,
             py::array_t<float, py::array::c_style> image,
             const std::string& mode, int window_radius, double color_bandwidth,
             double spatial_bandwidth) {
              UpsampleConfig cfg;
              cfg.mode = parse_upsample_mode(mode);
              cfg.window_radius = window_radius;
              cfg.color_bandwidth = color_bandwidth;
              cfg.spatial_bandwidth = spatial_bandwidth;
              return from_feature_map(
                  upsample_features(to_feature_map(f_lr), to_image(image), cfg));
          },
          py::arg("f_lr"), py::arg("image"), py::arg("mode") = "attention",
          py::arg("window_radius") = 3, py::arg("color_bandwidth") = 0.05,
          py::arg("spatial_bandwidth") = 2.0);

    m.def("upsample_labels_nn",
          [](py::array_t<uint8_t, py::array::c_style> labels, int classes,
             int h, int w) {
              return from_label_map(
                  upsample_labels_nn(to_label_map(labels, classes), h, w));
          },
          py::arg("labels"), py::arg("classes"), py::arg("h"), py::arg("w"));

    m.def("train_probe",
          [](py::array_t<float, py::array::c_style> feats,
             py::array_t<uint8_t, py::array::c_style> labels, int classes,
             double learning_rate, int epochs, int batch_pixels, double l2_reg,
             uint64_t seed) {
              ProbeTrainConfig cfg;
              cfg.learning_rate = learning_rate;
              cfg.epochs = epochs;
              cfg.batch_pixels = batch_pixels;
              cfg.l2_reg = l2_reg;
              cfg.seed = seed;
              LinearProbe probe =
                  train_probe(to_feature_map(feats),
                              to_label_map(labels, classes), cfg);
              py::array_t<float> out({probe.classes, probe.feature_dim});
              std::copy(probe.weights.begin(), probe.weights.end(),
                        out.mutable_data());
              return out;
          },
          py::arg("features"), py::arg("labels"), py::arg("classes"),
          py::arg("learning_rate") = 0.5, py::arg("epochs") = 20,
          py::arg("batch_pixels") = 4096, py::arg("l2_reg") = 1e-4,
          py::arg("seed") = 0);

    m.def("probe_predict",
          [](py::array_t<float, py::array::c_style> weights,
             py::array_t<float, py::array::c_style> feats) {
              if (weights.ndim() != 2)
                  throw ValidationError("expected (C,D) weights");
              LinearProbe probe(static_cast<int>(weights.shape(0)),
                                static_cast<int>(weights.shape(1)));
              std::copy(weights.data(), weights.data() + weights.size(),
                        probe.weights.begin());
              return from_label_map(
                  probe_predict(probe, to_feature_map(feats)));
          },
          py::arg("weights"), py::arg("features"));

    m.def("build_agreement_prompts",
          [](py::array_t<float, py::array::c_style> feats,
             py::array_t<uint8_t, py::array::c_style> probe_pred,
             py::array_t<uint8_t, py::array::c_style> lr_up, int classes) {
              PromptSet ps = build_agreement_prompts(
                  to_feature_map(feats), to_label_map(probe_pred, classes),
                  to_label_map(lr_up, classes));
              py::dict out;
              out["prompts"] = prompts_array(ps);
              out["support_counts"] = py::cast(ps.support_counts);
              return out;
          },
          py::arg("features"), py::arg("probe_pred"), py::arg("lr_up"),
          py::arg("classes"));

    m.def("oracle_prompts",
          [](py::array_t<float, py::array::c_style> feats,
             py::array_t<uint8_t, py::array::c_style> truth, int classes) {
              PromptSet ps = oracle_prompts(to_feature_map(feats),
                                            to_label_map(truth, classes));
              py::dict out;
              out["prompts"] = prompts_array(ps);
              out["support_counts"] = py::cast(ps.support_counts);
              return out;
          },
          py::arg("features"), py::arg("truth"), py::arg("classes"));

    m.def("cosine_scores",
          [](py::array_t<float, py::array::c_style> feats,
             py::array_t<float, py::array::c_style> prompts) {
              return from_score_map(
                  cosine_scores(to_feature_map(feats), to_prompt_set(prompts)));
          },
          py::arg("features"), py::arg("prompts"));

    m.def("argmax_labels",
          [](py::array_t<float, py::array::c_style> scores) {
              return from_label_map(argmax_labels(to_score_map(scores)));
          },
          py::arg("scores"));

    m.def("kmeans_voting_baseline",
          [](py::array_t<float, py::array::c_style> feats,
             py::array_t<uint8_t, py::array::c_style> lr_up, int classes,
             int k, int max_iters, uint64_t seed) {
              KMeansConfig cfg;
              cfg.k = k;
              cfg.max_iters = max_iters;
              cfg.seed = seed;
              return from_label_map(kmeans_voting_baseline(
                  to_feature_map(feats), to_label_map(lr_up, classes), cfg));
          },
          py::arg("features"), py::arg("lr_up"), py::arg("classes"),
          py::arg("k") = 8, py::arg("max_iters") = 50, py::arg("seed") = 0);

    m.def("slic_segment",
          [](py::array_t<float, py::array::c_style> image, int n_segments,
             double compactness, int max_iters, bool enforce_connectivity) {
              SlicConfig cfg;
              cfg.n_segments = n_segments;
              cfg.compactness = compactness;
              cfg.max_iters = max_iters;
              cfg.enforce_connectivity = enforce_connectivity;
              ImageRaster img = to_image(image);
              int n = 0;
              auto assignment = slic_segment(img, cfg, &n);
              py::array_t<uint32_t> out({img.h, img.w});
              std::copy(assignment.begin(), assignment.end(),
                        out.mutable_data());
              return out;
          },
          py::arg("image"), py::arg("n_segments") = 200,
          py::arg("compactness") = 10.0, py::arg("max_iters") = 10,
          py::arg("enforce_connectivity") = true);

    m.def("refine_scores",
          [](py::array_t<float, py::array::c_style> feats,
             py::array_t<float, py::array::c_style> scores,
             py::array_t<uint32_t, py::array::c_style> assignment, int k,
             double gamma, double sigma, double spatial_exponent, double alpha,
             const std::string& solver) {
              ScoreMap s = to_score_map(scores);
              std::vector<uint32_t> assign(assignment.data(),
                                           assignment.data() + assignment.size());
              SuperpixelPartition part = summarize_segments(
                  assign, s.h, s.w, to_feature_map(feats), s);
              GraphConfig cfg;
              cfg.k = k;
              cfg.gamma = gamma;
              cfg.sigma = sigma;
              cfg.spatial_exponent = spatial_exponent;
              cfg.alpha = alpha;
              cfg.solver = parse_solver(solver);
              AffinityGraph graph = build_graph(part, cfg);
              return from_label_map(
                  refine_labels(part, graph, cfg, s.classes));
          },
          py::arg("features"), py::arg("scores"), py::arg("assignment"),
          py::arg("k") = 100, py::arg("gamma") = 1.0, py::arg("sigma") = 1.0,
          py::arg("spatial_exponent") = 2.0, py::arg("alpha") = 0.5,
          py::arg("solver") = "fixed_point");

    m.def("run_pipeline",
          [](py::array_t<float, py::array::c_style> image,
             py::array_t<float, py::array::c_style> patch_feats,
             py::array_t<uint8_t, py::array::c_style> lr_labels, int classes,
             py::object truth, const std::map<std::string, std::string>& config) {
              PipelineConfig cfg;
              for (const auto& [k, v] : config) apply_config_entry(cfg, k, v);
              LabelMap truth_map;
              const LabelMap* truth_ptr = nullptr;
              if (!truth.is_none()) {
                  truth_map = to_label_map(
                      truth.cast<py::array_t<uint8_t, py::array::c_style>>(),
                      classes);
                  truth_ptr = &truth_map;
              }
              PipelineResult res = run_pipeline(
                  to_image(image), to_feature_map(patch_feats),
                  to_label_map(lr_labels, classes), cfg, truth_ptr);
              py::dict out;
              out["labels"] = from_label_map(res.labels);
              out["initial"] = from_label_map(res.initial);
              if (res.metrics) {
                  out["miou"] = res.metrics->mean;
                  out["per_class_iou"] = py::cast(res.metrics->per_class);
              }
              return out;
          },
          py::arg("image"), py::arg("patch_features"), py::arg("lr_labels"),
          py::arg("classes"), py::arg("truth") = py::none(),
          py::arg("config") = std::map<std::string, std::string>{});

    m.def("miou",
          [](py::array_t<uint8_t, py::array::c_style> pred,
             py::array_t<uint8_t, py::array::c_style> truth, int classes,
             bool absent_as_zero) {
              ConfusionMatrix cm(classes);
              accumulate_confusion(to_label_map(pred, classes),
                                   to_label_map(truth, classes), cm);
              IouResult res = miou(cm, absent_as_zero);
              py::dict out;
              out["miou"] = res.mean;
              out["per_class"] = py::cast(res.per_class);
              return out;
          },
          py::arg("pred"), py::arg("truth"), py::arg("classes"),
          py::arg("absent_as_zero") = false);
}
