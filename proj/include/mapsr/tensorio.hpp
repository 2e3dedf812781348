#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mapsr {

// Error kinds for file I/O and validation. Callers can catch the base
// IoError or a specific subclass.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BadMagicError : IoError {
    using IoError::IoError;
};
struct TruncatedFileError : IoError {
    using IoError::IoError;
};
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dense D x H x W real-valued raster, channel-major: index = d*H*W + u*W + v.
struct FeatureMap {
    int d = 0;
    int h = 0;
    int w = 0;
    std::vector<float> data;

    FeatureMap() = default;
    FeatureMap(int d_, int h_, int w_, float fill = 0.0f)
        : d(d_), h(h_), w(w_),
          data(static_cast<size_t>(d_) * h_ * w_, fill) {}

    float& at(int c, int u, int v) {
        return data[(static_cast<size_t>(c) * h + u) * w + v];
    }
    float at(int c, int u, int v) const {
        return data[(static_cast<size_t>(c) * h + u) * w + v];
    }
    size_t size() const { return data.size(); }
    bool all_finite() const;
};

// H x W class raster over {0,...,classes-1}; 255 reserved as nodata.
struct LabelMap {
    static constexpr uint8_t kNoData = 255;

    int h = 0;
    int w = 0;
    int classes = 0;
    std::vector<uint8_t> data;

    LabelMap() = default;
    LabelMap(int h_, int w_, int classes_, uint8_t fill = 0)
        : h(h_), w(w_), classes(classes_),
          data(static_cast<size_t>(h_) * w_, fill) {}

    uint8_t& at(int u, int v) { return data[static_cast<size_t>(u) * w + v]; }
    uint8_t at(int u, int v) const { return data[static_cast<size_t>(u) * w + v]; }
    void validate() const;  // throws ValidationError on out-of-range entries
};

// 3 x H x W image, channel values in [0,1].
struct ImageRaster {
    int h = 0;
    int w = 0;
    std::vector<float> data;  // channel-major, 3*h*w

    ImageRaster() = default;
    ImageRaster(int h_, int w_, float fill = 0.0f)
        : h(h_), w(w_), data(3 * static_cast<size_t>(h_) * w_, fill) {}

    float& at(int c, int u, int v) {
        return data[(static_cast<size_t>(c) * h + u) * w + v];
    }
    float at(int c, int u, int v) const {
        return data[(static_cast<size_t>(c) * h + u) * w + v];
    }
};

// C x H x W per-class score raster.
struct ScoreMap {
    int classes = 0;
    int h = 0;
    int w = 0;
    std::vector<float> data;

    ScoreMap() = default;
    ScoreMap(int classes_, int h_, int w_, float fill = 0.0f)
        : classes(classes_), h(h_), w(w_),
          data(static_cast<size_t>(classes_) * h_ * w_, fill) {}

    float& at(int c, int u, int v) {
        return data[(static_cast<size_t>(c) * h + u) * w + v];
    }
    float at(int c, int u, int v) const {
        return data[(static_cast<size_t>(c) * h + u) * w + v];
    }
};

using Rgb = std::array<uint8_t, 3>;

// "MSRF" v1: magic, u32 version, u32 D,H,W little-endian, f32 payload.
void write_feature_map(const FeatureMap& map, const std::string& path);
FeatureMap read_feature_map(const std::string& path);

// "MSRL" v1: magic, u32 version, u32 C,H,W, u8 payload (255 = nodata).
void write_label_map(const LabelMap& map, const std::string& path);
LabelMap read_label_map(const std::string& path);

// Binary PPM "P6", 8-bit, maxval 255. Values scaled by /255 on read,
// *255 round-half-up on write.
void write_image(const ImageRaster& img, const std::string& path);
ImageRaster read_image(const std::string& path);

// P6 image with pixel color = palette[class]; nodata pixels get magenta.
void write_colormap_ppm(const LabelMap& labels, const std::vector<Rgb>& palette,
                        const std::string& path);

// "MSRS" v1: magic, u32 version, u32 H,W, u32 segment ids.
void write_segment_map(const std::vector<uint32_t>& assignment, int h, int w,
                       const std::string& path);
std::vector<uint32_t> read_segment_map(const std::string& path, int& h, int& w);

}  // namespace mapsr
