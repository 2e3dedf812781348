#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mapsr/tensorio.hpp"

namespace mapsr {

// Linear classifier W in R^{C x D}, no bias. Row-major weights.
struct LinearProbe {
    int classes = 0;
    int feature_dim = 0;
    std::vector<float> weights;  // classes * feature_dim

    LinearProbe() = default;
    LinearProbe(int c, int d)
        : classes(c), feature_dim(d),
          weights(static_cast<size_t>(c) * d, 0.0f) {}

    float& at(int c, int d) { return weights[static_cast<size_t>(c) * feature_dim + d]; }
    float at(int c, int d) const { return weights[static_cast<size_t>(c) * feature_dim + d]; }
    int64_t parameter_count() const {
        return static_cast<int64_t>(classes) * feature_dim;
    }
};

struct ProbeTrainConfig {
    double learning_rate = 0.5;
    int epochs = 20;
    int batch_pixels = 4096;  // 0 = full batch
    uint64_t seed = 0;
    double l2_reg = 1e-4;

    void validate() const;
};

// Nearest-neighbor upsampling of an LR label raster to H x W via floor
// index mapping: out(u,v) = in(floor(u*h/H), floor(v*w/W)).
LabelMap upsample_labels_nn(const LabelMap& y_lr, int H, int W);

// Cross-entropy loss over the given pixel subset (flat indices u*W+v),
// plus l2_reg*||W||^2/2, and its exact gradient. Nodata pixels must be
// excluded by the caller.
void probe_loss_and_grad(const LinearProbe& probe, const FeatureMap& feats,
                         const LabelMap& labels,
                         const std::vector<int>& pixel_subset, double l2_reg,
                         double& loss, std::vector<double>& grad);

// Mini-batch SGD from zero init; deterministic given cfg.seed. The per-epoch
// full-batch loss history is returned through `loss_history` when non-null.
LinearProbe train_probe(const FeatureMap& feats, const LabelMap& labels,
                        const ProbeTrainConfig& cfg,
                        std::vector<double>* loss_history = nullptr);

// Per-pixel argmax of logits; ties -> lowest class index.
LabelMap probe_predict(const LinearProbe& probe, const FeatureMap& feats);

// "MSRW" v1: magic, u32 version, u32 C, u32 D, f32 row-major weights.
void write_probe(const LinearProbe& probe, const std::string& path);
LinearProbe read_probe(const std::string& path);

}  // namespace mapsr
