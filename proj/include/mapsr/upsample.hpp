#pragma once

#include "mapsr/tensorio.hpp"

namespace mapsr {

enum class UpsampleMode { attention, bilinear, nearest };

struct UpsampleConfig {
    int window_radius = 3;        // LR-cell neighborhood half-width
    double color_bandwidth = 0.05;
    double spatial_bandwidth = 2.0;
    UpsampleMode mode = UpsampleMode::attention;

    void validate() const;
};

UpsampleMode parse_upsample_mode(const std::string& s);
std::string to_string(UpsampleMode m);

// Per-block channel means of the image at block size p (3 x h/p x w/p).
FeatureMap block_mean_colors(const ImageRaster& image, int p);

// Densify patch-grid features to pixel resolution. Attention mode weights
// each LR cell in a (2r+1)^2 window around the pixel's home cell by a
// softmax over color and spatial affinity to that pixel; bilinear/nearest
// interpolate with the cell-center alignment convention. Every output pixel
// is a convex combination of LR values.
FeatureMap upsample_features(const FeatureMap& f_lr, const ImageRaster& image,
                             const UpsampleConfig& cfg);

}  // namespace mapsr
