#include "mapsr/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace mapsr {

PromptMode parse_prompt_mode(const std::string& s) {
    if (s == "probe_agreement") return PromptMode::probe_agreement;
    if (s == "oracle_hr") return PromptMode::oracle_hr;
    throw ValidationError("unknown prompt mode: " + s);
}

void PipelineConfig::validate(int patch) const {
    if (chip_size < 2 * patch)
        throw ValidationError("chip_size must be >= 2 * patch size");
    if (use_superpixel && !graph_refine)
        throw ValidationError("superpixel=true requires graph_refine=true");
    upsample.validate();
    probe.validate();
    graph.validate();
}

std::vector<ChipRect> chip_rects(int H, int W, int chip_size) {
    std::vector<ChipRect> out;
    for (int u = 0; u < H; u += chip_size)
        for (int v = 0; v < W; v += chip_size)
            out.push_back({u, v, std::min(chip_size, H - u),
                           std::min(chip_size, W - v)});
    return out;
}

namespace {

template <typename T>
void copy_chip(const std::vector<T>& src, std::vector<T>& dst, int channels,
               int H, int W, const ChipRect& r) {
    const size_t src_plane = static_cast<size_t>(H) * W;
    const size_t dst_plane = static_cast<size_t>(r.h) * r.w;
    for (int c = 0; c < channels; ++c)
        for (int u = 0; u < r.h; ++u) {
            const T* s = &src[src_plane * c +
                              static_cast<size_t>(r.u0 + u) * W + r.v0];
            T* d = &dst[dst_plane * c + static_cast<size_t>(u) * r.w];
            std::copy(s, s + r.w, d);
        }
}

}  // namespace

ImageRaster extract_chip(const ImageRaster& full, const ChipRect& r) {
    ImageRaster out(r.h, r.w);
    copy_chip(full.data, out.data, 3, full.h, full.w, r);
    return out;
}

FeatureMap extract_chip(const FeatureMap& full, const ChipRect& r) {
    FeatureMap out(full.d, r.h, r.w);
    copy_chip(full.data, out.data, full.d, full.h, full.w, r);
    return out;
}

ScoreMap extract_chip(const ScoreMap& full, const ChipRect& r) {
    ScoreMap out(full.classes, r.h, r.w);
    copy_chip(full.data, out.data, full.classes, full.h, full.w, r);
    return out;
}

LabelMap extract_chip(const LabelMap& full, const ChipRect& r) {
    LabelMap out(r.h, r.w, full.classes);
    copy_chip(full.data, out.data, 1, full.h, full.w, r);
    return out;
}

void insert_chip(LabelMap& full, const LabelMap& chip, const ChipRect& r) {
    for (int u = 0; u < r.h; ++u) {
        const uint8_t* s = &chip.data[static_cast<size_t>(u) * r.w];
        uint8_t* d = &full.data[static_cast<size_t>(r.u0 + u) * full.w + r.v0];
        std::copy(s, s + r.w, d);
    }
}

PipelineResult run_pipeline(const ImageRaster& image,
                            const FeatureMap& patch_feats,
                            const LabelMap& lr_labels,
                            const PipelineConfig& cfg, const LabelMap* truth) {
    const int H = image.h, W = image.w;
    if (H % patch_feats.h != 0 || W % patch_feats.w != 0)
        throw StageError("input", "image dims not a multiple of patch grid");
    const int patch = H / patch_feats.h;
    cfg.validate(patch);
    if (cfg.prompt_mode == PromptMode::oracle_hr && !truth)
        throw StageError("prompts", "oracle prompt mode requires HR truth");

    PipelineResult result;

    FeatureMap feats;
    try {
        feats = upsample_features(patch_feats, image, cfg.upsample);
    } catch (const std::exception& e) {
        throw StageError("upsample", e.what());
    }

    LabelMap lr_up;
    try {
        lr_up = upsample_labels_nn(lr_labels, H, W);
    } catch (const std::exception& e) {
        throw StageError("labels", e.what());
    }

    try {
        if (cfg.prompt_mode == PromptMode::oracle_hr) {
            result.prompts = oracle_prompts(feats, *truth);
        } else {
            ProbeTrainConfig pc = cfg.probe;
            pc.seed = cfg.seed ^ pc.seed;
            LinearProbe probe = train_probe(feats, lr_up, pc);
            LabelMap probe_pred = probe_predict(probe, feats);
            result.prompts = build_agreement_prompts(feats, probe_pred, lr_up);
        }
    } catch (const std::exception& e) {
        throw StageError("prompts", e.what());
    }

    ScoreMap scores;
    try {
        scores = cosine_scores(feats, result.prompts);
        result.initial = argmax_labels(scores);
    } catch (const std::exception& e) {
        throw StageError("predict", e.what());
    }

    if (!cfg.graph_refine) {
        result.labels = result.initial;
    } else {
        result.labels = LabelMap(H, W, lr_labels.classes);
        for (const ChipRect& r : chip_rects(H, W, cfg.chip_size)) {
            try {
                ImageRaster chip_img = extract_chip(image, r);
                FeatureMap chip_feats = extract_chip(feats, r);
                ScoreMap chip_scores = extract_chip(scores, r);

                std::vector<uint32_t> assignment;
                if (cfg.use_superpixel) {
                    SlicConfig sc = cfg.slic;
                    sc.n_segments = std::min(sc.n_segments, r.h * r.w);
                    assignment = slic_segment(chip_img, sc);
                } else {
                    assignment = pixels_as_nodes(r.h, r.w);
                }
                SuperpixelPartition part = summarize_segments(
                    assignment, r.h, r.w, chip_feats, chip_scores);
                LabelMap chip_out;
                if (part.n < 2) {
                    // single node: propagation is a no-op on the argmax
                    chip_out = argmax_labels(chip_scores);
                } else {
                    AffinityGraph graph = build_graph(part, cfg.graph);
                    chip_out =
                        refine_labels(part, graph, cfg.graph, lr_labels.classes);
                }
                insert_chip(result.labels, chip_out, r);
            } catch (const std::exception& e) {
                throw StageError("refine", e.what());
            }
        }
    }

    if (truth) {
        try {
            ConfusionMatrix cm(truth->classes);
            accumulate_confusion(result.labels, *truth, cm);
            result.metrics = miou(cm);
        } catch (const std::exception& e) {
            throw StageError("eval", e.what());
        }
    }
    return result;
}

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ValidationError("invalid boolean value: " + v);
}

}  // namespace

std::map<std::string, std::string> load_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file: " + path);
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        lineno++;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ValidationError(path + ":" + std::to_string(lineno) +
                                  ": expected 'key = value'");
        out[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return out;
}

void apply_config_entry(PipelineConfig& cfg, const std::string& key,
                        const std::string& value) {
    if (key == "chip_size") cfg.chip_size = std::stoi(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "prompt_mode") cfg.prompt_mode = parse_prompt_mode(value);
    else if (key == "stages.upsample_mode")
        cfg.upsample.mode = parse_upsample_mode(value);
    else if (key == "stages.graph_refine") cfg.graph_refine = parse_bool(value);
    else if (key == "stages.superpixel") cfg.use_superpixel = parse_bool(value);
    else if (key == "upsample.window_radius")
        cfg.upsample.window_radius = std::stoi(value);
    else if (key == "upsample.color_bandwidth")
        cfg.upsample.color_bandwidth = std::stod(value);
    else if (key == "upsample.spatial_bandwidth")
        cfg.upsample.spatial_bandwidth = std::stod(value);
    else if (key == "probe.learning_rate")
        cfg.probe.learning_rate = std::stod(value);
    else if (key == "probe.epochs") cfg.probe.epochs = std::stoi(value);
    else if (key == "probe.batch_pixels")
        cfg.probe.batch_pixels = (value == "full") ? 0 : std::stoi(value);
    else if (key == "probe.l2_reg") cfg.probe.l2_reg = std::stod(value);
    else if (key == "probe.seed") cfg.probe.seed = std::stoull(value);
    else if (key == "slic.n_segments") cfg.slic.n_segments = std::stoi(value);
    else if (key == "slic.compactness") cfg.slic.compactness = std::stod(value);
    else if (key == "slic.max_iters") cfg.slic.max_iters = std::stoi(value);
    else if (key == "slic.enforce_connectivity")
        cfg.slic.enforce_connectivity = parse_bool(value);
    else if (key == "graph.k") cfg.graph.k = std::stoi(value);
    else if (key == "graph.gamma") cfg.graph.gamma = std::stod(value);
    else if (key == "graph.sigma") cfg.graph.sigma = std::stod(value);
    else if (key == "graph.spatial_exponent")
        cfg.graph.spatial_exponent = std::stod(value);
    else if (key == "graph.alpha") cfg.graph.alpha = std::stod(value);
    else if (key == "graph.tol") cfg.graph.tol = std::stod(value);
    else if (key == "graph.max_prop_iters")
        cfg.graph.max_prop_iters = std::stoi(value);
    else if (key == "graph.solver") cfg.graph.solver = parse_solver(value);
    else
        throw ValidationError("unknown config key: " + key);
}

}  // namespace mapsr
