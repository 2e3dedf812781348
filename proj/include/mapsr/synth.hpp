#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "mapsr/tensorio.hpp"

namespace mapsr {

// Parameters for a synthetic scene with known HR ground truth.
struct SceneSpec {
    int h = 128;
    int w = 128;
    int classes = 4;
    int feature_dim = 16;
    int patch = 8;                  // must divide h and w
    int n_regions = 24;             // Voronoi seed count
    double embed_separation = 1.0;  // scale of class mean vectors
    double embed_noise = 0.0;       // per-pixel embedding noise std
    double image_noise = 0.0;
    int lr_factor = 1;              // HR -> LR downsample ratio
    double label_flip_rate = 0.0;   // per-LR-cell flip probability
    uint64_t seed = 0;

    void validate() const;
};

// All artifacts of one generated scene.
struct Scene {
    ImageRaster image;        // 3 x H x W
    FeatureMap patch_feats;   // D x (H/p) x (W/p)
    FeatureMap dense_feats;   // D x H x W oracle features
    LabelMap truth;           // Y* HR ground truth
    LabelMap lr_labels;       // degraded LR product
    std::vector<std::vector<float>> class_means;  // C vectors in R^D
};

// Mutually equidistant vectors of norm `separation` (simplex embedding).
// Requires feature_dim >= classes.
std::vector<std::vector<float>> simplex_class_means(int classes, int feature_dim,
                                                    double separation);

// Deterministic given spec.seed.
Scene generate_scene(const SceneSpec& spec);

// Modal class per factor x factor block; ties -> lowest class index.
LabelMap majority_downsample(const LabelMap& labels, int factor);

// Standard normal via Box-Muller on top of mt19937_64, so the stream is
// identical across standard library implementations.
class GaussianGen {
public:
    explicit GaussianGen(std::mt19937_64& rng) : rng_(rng) {}
    double operator()();

private:
    std::mt19937_64& rng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace mapsr
