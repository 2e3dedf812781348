#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mapsr/classify.hpp"
#include "mapsr/eval.hpp"
#include "mapsr/graphrefine.hpp"
#include "mapsr/probe.hpp"
#include "mapsr/prompts.hpp"
#include "mapsr/superpixel.hpp"
#include "mapsr/tensorio.hpp"
#include "mapsr/upsample.hpp"

namespace mapsr {

enum class PromptMode { probe_agreement, oracle_hr };

PromptMode parse_prompt_mode(const std::string& s);

struct PipelineConfig {
    int chip_size = 448;
    UpsampleConfig upsample;
    ProbeTrainConfig probe;
    SlicConfig slic;
    GraphConfig graph;
    bool graph_refine = true;
    bool use_superpixel = true;
    PromptMode prompt_mode = PromptMode::probe_agreement;
    uint64_t seed = 0;

    void validate(int patch) const;
};

struct StageError : std::runtime_error {
    std::string stage;
    StageError(const std::string& stage_, const std::string& msg)
        : std::runtime_error("[" + stage_ + "] " + msg), stage(stage_) {}
};

struct PipelineResult {
    LabelMap labels;             // final map
    LabelMap initial;            // pre-refinement argmax
    PromptSet prompts;
    std::optional<IouResult> metrics;  // set when truth provided
};

// Full pipeline: feature upsampling -> probe (skipped under oracle_hr) ->
// prompts -> cosine scores + argmax -> per-chip superpixel graph
// refinement -> mosaic -> optional eval. Deterministic given cfg seeds.
PipelineResult run_pipeline(const ImageRaster& image,
                            const FeatureMap& patch_feats,
                            const LabelMap& lr_labels,
                            const PipelineConfig& cfg,
                            const LabelMap* truth = nullptr);

// Non-overlapping tiling; trailing chips truncated to image bounds.
struct ChipRect {
    int u0, v0, h, w;
};
std::vector<ChipRect> chip_rects(int H, int W, int chip_size);

ImageRaster extract_chip(const ImageRaster& full, const ChipRect& r);
FeatureMap extract_chip(const FeatureMap& full, const ChipRect& r);
ScoreMap extract_chip(const ScoreMap& full, const ChipRect& r);
LabelMap extract_chip(const LabelMap& full, const ChipRect& r);
void insert_chip(LabelMap& full, const LabelMap& chip, const ChipRect& r);

// Plain-text "key = value" config with dotted section prefixes; '#' starts
// a comment line.
std::map<std::string, std::string> load_config_file(const std::string& path);
void apply_config_entry(PipelineConfig& cfg, const std::string& key,
                        const std::string& value);

}  // namespace mapsr
