// Command-line front end for the map super-resolution pipeline. All rasters
// use the MSRF/MSRL/MSRS/MSRW/MSRP containers or binary PPM; score maps are
// stored in the MSRF container with D = class count.
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mapsr/pipeline.hpp"
#include "mapsr/synth.hpp"

namespace {

using namespace mapsr;

FeatureMap scores_to_map(const ScoreMap& s) {
    FeatureMap m(s.classes, s.h, s.w);
    m.data = s.data;
    return m;
}

ScoreMap map_to_scores(const FeatureMap& m) {
    ScoreMap s(m.d, m.h, m.w);
    s.data = m.data;
    return s;
}

std::vector<Rgb> default_palette(int classes) {
    static const std::vector<Rgb> base = {
        {31, 119, 180}, {255, 127, 14}, {44, 160, 44},  {214, 39, 40},
        {148, 103, 189}, {140, 86, 75}, {227, 119, 194}, {127, 127, 127},
        {188, 189, 34}, {23, 190, 207},
    };
    std::vector<Rgb> out(classes);
    for (int c = 0; c < classes; ++c) out[c] = base[c % base.size()];
    return out;
}

void print_iou(const IouResult& res) {
    std::printf("%-8s %s\n", "class", "iou");
    for (size_t c = 0; c < res.per_class.size(); ++c) {
        if (res.included[c])
            std::printf("%-8zu %.6f\n", c, res.per_class[c]);
        else
            std::printf("%-8zu (absent)\n", c);
    }
    std::printf("mIoU     %.6f\n", res.mean);
    for (size_t c = 0; c < res.per_class.size(); ++c)
        if (res.included[c])
            std::printf("iou_%zu=%.6f\n", c, res.per_class[c]);
    std::printf("miou=%.6f\n", res.mean);
}

const char* kConfigKeys[] = {
    "chip_size", "seed", "prompt_mode", "stages.upsample_mode",
    "stages.graph_refine", "stages.superpixel", "upsample.window_radius",
    "upsample.color_bandwidth", "upsample.spatial_bandwidth",
    "probe.learning_rate", "probe.epochs", "probe.batch_pixels",
    "probe.l2_reg", "probe.seed", "slic.n_segments", "slic.compactness",
    "slic.max_iters", "slic.enforce_connectivity", "graph.k", "graph.gamma",
    "graph.sigma", "graph.spatial_exponent", "graph.alpha", "graph.tol",
    "graph.max_prop_iters", "graph.solver",
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mapsr: prompt-driven land-cover map super-resolution"};
    app.require_subcommand(1);

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "generate a synthetic scene");
    SceneSpec spec;
    std::string synth_out;
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--height", spec.h);
    synth->add_option("--width", spec.w);
    synth->add_option("--classes", spec.classes);
    synth->add_option("--feature-dim", spec.feature_dim);
    synth->add_option("--patch", spec.patch);
    synth->add_option("--regions", spec.n_regions);
    synth->add_option("--embed-separation", spec.embed_separation);
    synth->add_option("--embed-noise", spec.embed_noise);
    synth->add_option("--image-noise", spec.image_noise);
    synth->add_option("--lr-factor", spec.lr_factor);
    synth->add_option("--flip-rate", spec.label_flip_rate);
    synth->add_option("--seed", spec.seed);

    // ---- upsample ----
    auto* ups = app.add_subcommand("upsample", "densify patch-grid features");
    std::string ups_feats, ups_image, ups_out, ups_mode = "attention";
    UpsampleConfig ucfg;
    ups->add_option("--features", ups_feats)->required();
    ups->add_option("--image", ups_image)->required();
    ups->add_option("--out", ups_out)->required();
    ups->add_option("--mode", ups_mode, "attention|bilinear|nearest");
    ups->add_option("--window-radius", ucfg.window_radius);
    ups->add_option("--color-bandwidth", ucfg.color_bandwidth);
    ups->add_option("--spatial-bandwidth", ucfg.spatial_bandwidth);

    // ---- probe ----
    auto* prb = app.add_subcommand("probe", "train the linear probe");
    std::string prb_feats, prb_lr, prb_out;
    ProbeTrainConfig pcfg;
    std::string prb_batch = "4096";
    prb->add_option("--features", prb_feats, "HR feature map (MSRF)")->required();
    prb->add_option("--lr-labels", prb_lr, "LR label map (MSRL)")->required();
    prb->add_option("--out", prb_out, "probe weights (MSRW)")->required();
    prb->add_option("--learning-rate", pcfg.learning_rate);
    prb->add_option("--epochs", pcfg.epochs);
    prb->add_option("--batch-pixels", prb_batch, "pixel batch size or 'full'");
    prb->add_option("--l2-reg", pcfg.l2_reg);
    prb->add_option("--seed", pcfg.seed);

    // ---- prompts ----
    auto* prm = app.add_subcommand("prompts", "build class prompts");
    std::vector<std::string> prm_feats, prm_lr;
    std::string prm_probe, prm_out, prm_truth, prm_agg = "pooled";
    prm->add_option("--features", prm_feats, "HR features, repeatable")->required();
    prm->add_option("--lr-labels", prm_lr, "LR labels, one per features file");
    prm->add_option("--probe", prm_probe, "probe weights (MSRW)");
    prm->add_option("--truth", prm_truth, "HR truth for oracle prompts");
    prm->add_option("--aggregate", prm_agg, "pooled|per-image");
    prm->add_option("--out", prm_out)->required();

    // ---- predict ----
    auto* prd = app.add_subcommand("predict", "cosine scores and argmax labels");
    std::string prd_feats, prd_prompts, prd_scores, prd_labels;
    prd->add_option("--features", prd_feats)->required();
    prd->add_option("--prompts", prd_prompts)->required();
    prd->add_option("--scores-out", prd_scores);
    prd->add_option("--labels-out", prd_labels);

    // ---- superpixel ----
    auto* spx = app.add_subcommand("superpixel", "SLIC segmentation");
    std::string spx_image, spx_out;
    SlicConfig scfg;
    bool spx_no_conn = false;
    spx->add_option("--image", spx_image)->required();
    spx->add_option("--out", spx_out, "segment raster (MSRS)")->required();
    spx->add_option("--n-segments", scfg.n_segments);
    spx->add_option("--compactness", scfg.compactness);
    spx->add_option("--max-iters", scfg.max_iters);
    spx->add_flag("--no-connectivity", spx_no_conn);

    // ---- refine ----
    auto* rfn = app.add_subcommand("refine", "graph-based score propagation");
    std::string rfn_scores, rfn_feats, rfn_segs, rfn_out, rfn_dump,
        rfn_solver = "fixed_point";
    GraphConfig gcfg;
    rfn->add_option("--scores", rfn_scores, "score map (MSRF, D=C)")->required();
    rfn->add_option("--features", rfn_feats)->required();
    rfn->add_option("--segments", rfn_segs, "segment raster (MSRS)")->required();
    rfn->add_option("--out", rfn_out)->required();
    rfn->add_option("--k", gcfg.k);
    rfn->add_option("--gamma", gcfg.gamma);
    rfn->add_option("--sigma", gcfg.sigma);
    rfn->add_option("--spatial-exponent", gcfg.spatial_exponent);
    rfn->add_option("--alpha", gcfg.alpha);
    rfn->add_option("--tol", gcfg.tol);
    rfn->add_option("--max-iters", gcfg.max_prop_iters);
    rfn->add_option("--solver", rfn_solver, "fixed_point|direct");
    rfn->add_option("--dump-graph", rfn_dump, "edge-list text output");

    // ---- eval ----
    auto* evl = app.add_subcommand("eval", "per-class IoU and mIoU");
    std::string evl_pred, evl_truth;
    bool absent_as_zero = false;
    evl->add_option("--pred", evl_pred)->required();
    evl->add_option("--truth", evl_truth)->required();
    evl->add_flag("--absent-as-zero", absent_as_zero);

    // ---- baseline-kmeans ----
    auto* kmb = app.add_subcommand("baseline-kmeans",
                                   "k-means + majority voting baseline");
    std::string kmb_feats, kmb_lr, kmb_out;
    KMeansConfig kcfg;
    kmb->add_option("--features", kmb_feats)->required();
    kmb->add_option("--lr-labels", kmb_lr)->required();
    kmb->add_option("--out", kmb_out)->required();
    kmb->add_option("--k", kcfg.k);
    kmb->add_option("--max-iters", kcfg.max_iters);
    kmb->add_option("--seed", kcfg.seed);

    // ---- run ----
    auto* run = app.add_subcommand("run", "full pipeline");
    std::string run_image, run_feats, run_lr, run_out, run_truth, run_config,
        run_color;
    std::vector<std::pair<std::string, std::string>> overrides;
    run->add_option("--image", run_image)->required();
    run->add_option("--features", run_feats, "patch-grid features")->required();
    run->add_option("--lr-labels", run_lr)->required();
    run->add_option("--out", run_out)->required();
    run->add_option("--truth", run_truth, "HR truth (eval / oracle prompts)");
    run->add_option("--config", run_config, "key = value config file");
    run->add_option("--colormap-out", run_color, "color PPM of the output");
    for (const char* key : kConfigKeys) {
        run->add_option_function<std::string>(
            std::string("--") + key,
            [&overrides, key](const std::string& v) {
                overrides.emplace_back(key, v);
            },
            "override config key " + std::string(key));
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            Scene scene = generate_scene(spec);
            write_image(scene.image, synth_out + "/image.ppm");
            write_feature_map(scene.patch_feats, synth_out + "/patch_features.msrf");
            write_feature_map(scene.dense_feats, synth_out + "/dense_features.msrf");
            write_label_map(scene.truth, synth_out + "/truth.msrl");
            write_label_map(scene.lr_labels, synth_out + "/lr_labels.msrl");
            std::printf("scene written to %s\n", synth_out.c_str());
        } else if (*ups) {
            ucfg.mode = parse_upsample_mode(ups_mode);
            FeatureMap f = read_feature_map(ups_feats);
            ImageRaster img = read_image(ups_image);
            write_feature_map(upsample_features(f, img, ucfg), ups_out);
        } else if (*prb) {
            pcfg.batch_pixels = (prb_batch == "full") ? 0 : std::stoi(prb_batch);
            FeatureMap f = read_feature_map(prb_feats);
            LabelMap lr = read_label_map(prb_lr);
            LabelMap lr_up = upsample_labels_nn(lr, f.h, f.w);
            LinearProbe probe = train_probe(f, lr_up, pcfg);
            write_probe(probe, prb_out);
            std::printf("trainable parameters: %lld\n",
                        static_cast<long long>(probe.parameter_count()));
        } else if (*prm) {
            if (!prm_truth.empty()) {
                if (prm_feats.size() != 1)
                    throw ValidationError("oracle prompts take one features file");
                FeatureMap f = read_feature_map(prm_feats[0]);
                LabelMap truth = read_label_map(prm_truth);
                write_prompts(oracle_prompts(f, truth), prm_out);
            } else {
                if (prm_probe.empty())
                    throw ValidationError("--probe or --truth required");
                if (prm_lr.size() != prm_feats.size())
                    throw ValidationError("need one --lr-labels per --features");
                LinearProbe probe = read_probe(prm_probe);
                // Per-image prompts, then pooled (support-weighted) or
                // unweighted combination across images.
                PromptSet combined;
                std::vector<std::vector<double>> acc;
                std::vector<uint64_t> weights;
                for (size_t i = 0; i < prm_feats.size(); ++i) {
                    FeatureMap f = read_feature_map(prm_feats[i]);
                    LabelMap lr = read_label_map(prm_lr[i]);
                    LabelMap lr_up = upsample_labels_nn(lr, f.h, f.w);
                    LabelMap pred = probe_predict(probe, f);
                    PromptSet ps = build_agreement_prompts(f, pred, lr_up);
                    if (acc.empty()) {
                        combined = ps;
                        acc.assign(ps.classes,
                                   std::vector<double>(ps.feature_dim, 0.0));
                        weights.assign(ps.classes, 0);
                        for (auto& n : combined.support_counts) n = 0;
                    }
                    for (int c = 0; c < ps.classes; ++c) {
                        if (!ps.active(c)) continue;
                        uint64_t wgt =
                            (prm_agg == "pooled") ? ps.support_counts[c] : 1;
                        for (int d = 0; d < ps.feature_dim; ++d)
                            acc[c][d] += static_cast<double>(wgt) * ps.prompts[c][d];
                        weights[c] += wgt;
                        combined.support_counts[c] += ps.support_counts[c];
                        combined.provenance[c] = ps.provenance[c];
                    }
                }
                for (int c = 0; c < combined.classes; ++c) {
                    if (weights[c] == 0) {
                        combined.provenance[c] = PromptProvenance::inactive;
                        continue;
                    }
                    for (int d = 0; d < combined.feature_dim; ++d)
                        combined.prompts[c][d] =
                            static_cast<float>(acc[c][d] / weights[c]);
                }
                write_prompts(combined, prm_out);
            }
        } else if (*prd) {
            FeatureMap f = read_feature_map(prd_feats);
            PromptSet ps = read_prompts(prd_prompts);
            ScoreMap scores = cosine_scores(f, ps);
            if (!prd_scores.empty())
                write_feature_map(scores_to_map(scores), prd_scores);
            if (!prd_labels.empty())
                write_label_map(argmax_labels(scores), prd_labels);
        } else if (*spx) {
            scfg.enforce_connectivity = !spx_no_conn;
            ImageRaster img = read_image(spx_image);
            int n = 0;
            auto assignment = slic_segment(img, scfg, &n);
            write_segment_map(assignment, img.h, img.w, spx_out);
            std::printf("segments=%d\n", n);
        } else if (*rfn) {
            gcfg.solver = parse_solver(rfn_solver);
            ScoreMap scores = map_to_scores(read_feature_map(rfn_scores));
            FeatureMap f = read_feature_map(rfn_feats);
            int h = 0, w = 0;
            auto assignment = read_segment_map(rfn_segs, h, w);
            SuperpixelPartition part =
                summarize_segments(assignment, h, w, f, scores);
            AffinityGraph graph = build_graph(part, gcfg);
            if (!rfn_dump.empty()) write_graph_edges(graph, rfn_dump);
            write_label_map(refine_labels(part, graph, gcfg, scores.classes),
                            rfn_out);
        } else if (*evl) {
            LabelMap pred = read_label_map(evl_pred);
            LabelMap truth = read_label_map(evl_truth);
            ConfusionMatrix cm(truth.classes);
            accumulate_confusion(pred, truth, cm);
            print_iou(miou(cm, absent_as_zero));
        } else if (*kmb) {
            FeatureMap f = read_feature_map(kmb_feats);
            LabelMap lr = read_label_map(kmb_lr);
            LabelMap lr_up = upsample_labels_nn(lr, f.h, f.w);
            write_label_map(kmeans_voting_baseline(f, lr_up, kcfg), kmb_out);
        } else if (*run) {
            PipelineConfig cfg;
            if (!run_config.empty())
                for (const auto& [k, v] : load_config_file(run_config))
                    apply_config_entry(cfg, k, v);
            for (const auto& [k, v] : overrides) apply_config_entry(cfg, k, v);
            ImageRaster img = read_image(run_image);
            FeatureMap patch_feats = read_feature_map(run_feats);
            LabelMap lr = read_label_map(run_lr);
            LabelMap truth;
            const LabelMap* truth_ptr = nullptr;
            if (!run_truth.empty()) {
                truth = read_label_map(run_truth);
                truth_ptr = &truth;
            }
            PipelineResult res =
                run_pipeline(img, patch_feats, lr, cfg, truth_ptr);
            write_label_map(res.labels, run_out);
            if (!run_color.empty())
                write_colormap_ppm(res.labels,
                                   default_palette(res.labels.classes),
                                   run_color);
            if (res.metrics) print_iou(*res.metrics);
        }
    } catch (const StageError& e) {
        std::cerr << "error " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
