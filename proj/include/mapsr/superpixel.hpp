#pragma once

#include <cstdint>
#include <vector>

#include "mapsr/tensorio.hpp"

namespace mapsr {

struct SlicConfig {
    int n_segments = 200;
    double compactness = 10.0;
    int max_iters = 10;
    bool enforce_connectivity = true;

    void validate(int h, int w) const;
};

// Pixel -> segment assignment with per-segment summaries used as graph
// nodes.
struct SuperpixelPartition {
    int h = 0;
    int w = 0;
    int n = 0;                              // segment count
    std::vector<uint32_t> assignment;       // h*w ids in [0,n)
    std::vector<size_t> sizes;              // pixels per segment
    std::vector<std::array<double, 2>> centroids;  // (row, col)
    std::vector<std::vector<float>> mean_embeddings;  // unit-norm z_i
    std::vector<bool> zero_embedding;       // z_i had ~zero norm pre-normalization
    std::vector<std::vector<double>> mean_scores;     // N x C initial Y-hat
};

// sRGB (D65) -> CIELAB, inputs in [0,1]. Exposed for tests.
void rgb_to_lab(float r, float g, float b, double& L, double& A, double& B);

// Standard SLIC: grid-seeded cluster centers in joint Lab-xy space,
// gradient-perturbed init, windowed assignment, optional connectivity
// enforcement. Returns contiguous ids in [0, N).
std::vector<uint32_t> slic_segment(const ImageRaster& image,
                                   const SlicConfig& cfg, int* n_out = nullptr);

// One node per pixel (refinement ablation without superpixels).
std::vector<uint32_t> pixels_as_nodes(int h, int w, int* n_out = nullptr);

// Per-segment sizes, centroids, unit-normalized mean embeddings, and mean
// score rows.
SuperpixelPartition summarize_segments(const std::vector<uint32_t>& assignment,
                                       int h, int w, const FeatureMap& feats,
                                       const ScoreMap& scores);

}  // namespace mapsr
