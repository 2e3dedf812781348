#include "mapsr/tensorio.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

namespace mapsr {

namespace {

void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {
        static_cast<unsigned char>(v & 0xff),
        static_cast<unsigned char>((v >> 8) & 0xff),
        static_cast<unsigned char>((v >> 16) & 0xff),
        static_cast<unsigned char>((v >> 24) & 0xff),
    };
    os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw TruncatedFileError("unexpected end of file in header");
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) |
           (static_cast<uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& os, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(os, bits);
}

void read_f32_block(std::istream& is, float* dst, size_t n) {
    // Little-endian host assumed for the bulk path; byte-swap otherwise.
    std::vector<unsigned char> buf(n * 4);
    is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<size_t>(is.gcount()) != buf.size())
        throw TruncatedFileError("payload shorter than declared dims");
    for (size_t i = 0; i < n; ++i) {
        uint32_t bits = static_cast<uint32_t>(buf[4 * i]) |
                        (static_cast<uint32_t>(buf[4 * i + 1]) << 8) |
                        (static_cast<uint32_t>(buf[4 * i + 2]) << 16) |
                        (static_cast<uint32_t>(buf[4 * i + 3]) << 24);
        std::memcpy(&dst[i], &bits, 4);
    }
}

void write_f32_block(std::ostream& os, const float* src, size_t n) {
    std::vector<unsigned char> buf(n * 4);
    for (size_t i = 0; i < n; ++i) {
        uint32_t bits;
        std::memcpy(&bits, &src[i], 4);
        buf[4 * i] = static_cast<unsigned char>(bits & 0xff);
        buf[4 * i + 1] = static_cast<unsigned char>((bits >> 8) & 0xff);
        buf[4 * i + 2] = static_cast<unsigned char>((bits >> 16) & 0xff);
        buf[4 * i + 3] = static_cast<unsigned char>((bits >> 24) & 0xff);
    }
    os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

void check_magic(std::istream& is, const char expect[4], const std::string& path) {
    char magic[4];
    is.read(magic, 4);
    if (!is) throw TruncatedFileError(path + ": file too short for magic");
    if (std::memcmp(magic, expect, 4) != 0)
        throw BadMagicError(path + ": bad magic, expected " + std::string(expect, 4));
    uint32_t version = get_u32(is);
    if (version != 1)
        throw BadMagicError(path + ": unsupported version " + std::to_string(version));
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    return os;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path);
    return is;
}

}  // namespace

bool FeatureMap::all_finite() const {
    for (float v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

void LabelMap::validate() const {
    if (h <= 0 || w <= 0 || classes <= 0)
        throw ValidationError("label map dims/classes must be positive");
    if (data.size() != static_cast<size_t>(h) * w)
        throw ValidationError("label map payload size mismatch");
    for (uint8_t v : data) {
        if (v != kNoData && v >= classes)
            throw ValidationError("class index " + std::to_string(v) +
                                  " out of range for C=" + std::to_string(classes));
    }
}

void write_feature_map(const FeatureMap& map, const std::string& path) {
    if (map.d < 1 || map.h < 1 || map.w < 1)
        throw ValidationError("feature map dims must be >= 1");
    if (map.data.size() != static_cast<size_t>(map.d) * map.h * map.w)
        throw ValidationError("feature map payload size mismatch");
    if (!map.all_finite())
        throw ValidationError("feature map contains non-finite values");
    auto os = open_out(path);
    os.write("MSRF", 4);
    put_u32(os, 1);
    put_u32(os, static_cast<uint32_t>(map.d));
    put_u32(os, static_cast<uint32_t>(map.h));
    put_u32(os, static_cast<uint32_t>(map.w));
    write_f32_block(os, map.data.data(), map.data.size());
    if (!os) throw IoError("write failed: " + path);
}

FeatureMap read_feature_map(const std::string& path) {
    auto is = open_in(path);
    check_magic(is, "MSRF", path);
    FeatureMap map;
    map.d = static_cast<int>(get_u32(is));
    map.h = static_cast<int>(get_u32(is));
    map.w = static_cast<int>(get_u32(is));
    if (map.d < 1 || map.h < 1 || map.w < 1)
        throw ValidationError(path + ": invalid dims");
    map.data.resize(static_cast<size_t>(map.d) * map.h * map.w);
    read_f32_block(is, map.data.data(), map.data.size());
    if (!map.all_finite())
        throw ValidationError(path + ": non-finite values in payload");
    return map;
}

void write_label_map(const LabelMap& map, const std::string& path) {
    map.validate();
    auto os = open_out(path);
    os.write("MSRL", 4);
    put_u32(os, 1);
    put_u32(os, static_cast<uint32_t>(map.classes));
    put_u32(os, static_cast<uint32_t>(map.h));
    put_u32(os, static_cast<uint32_t>(map.w));
    os.write(reinterpret_cast<const char*>(map.data.data()),
             static_cast<std::streamsize>(map.data.size()));
    if (!os) throw IoError("write failed: " + path);
}

LabelMap read_label_map(const std::string& path) {
    auto is = open_in(path);
    check_magic(is, "MSRL", path);
    LabelMap map;
    map.classes = static_cast<int>(get_u32(is));
    map.h = static_cast<int>(get_u32(is));
    map.w = static_cast<int>(get_u32(is));
    if (map.classes < 1 || map.h < 1 || map.w < 1)
        throw ValidationError(path + ": invalid dims");
    map.data.resize(static_cast<size_t>(map.h) * map.w);
    is.read(reinterpret_cast<char*>(map.data.data()),
            static_cast<std::streamsize>(map.data.size()));
    if (static_cast<size_t>(is.gcount()) != map.data.size())
        throw TruncatedFileError(path + ": payload shorter than declared dims");
    map.validate();
    return map;
}

void write_image(const ImageRaster& img, const std::string& path) {
    if (img.h < 1 || img.w < 1)
        throw ValidationError("image dims must be positive");
    auto os = open_out(path);
    os << "P6\n" << img.w << " " << img.h << "\n255\n";
    std::vector<unsigned char> row(static_cast<size_t>(img.w) * 3);
    for (int u = 0; u < img.h; ++u) {
        for (int v = 0; v < img.w; ++v) {
            for (int c = 0; c < 3; ++c) {
                float x = img.at(c, u, v);
                x = std::min(1.0f, std::max(0.0f, x));
                // round half up
                row[static_cast<size_t>(v) * 3 + c] =
                    static_cast<unsigned char>(std::floor(x * 255.0f + 0.5f));
            }
        }
        os.write(reinterpret_cast<const char*>(row.data()),
                 static_cast<std::streamsize>(row.size()));
    }
    if (!os) throw IoError("write failed: " + path);
}

ImageRaster read_image(const std::string& path) {
    auto is = open_in(path);
    std::string magic;
    is >> magic;
    if (magic != "P6") throw BadMagicError(path + ": not a binary PPM (P6)");
    int w = 0, h = 0, maxval = 0;
    is >> w >> h >> maxval;
    if (!is || w < 1 || h < 1)
        throw ValidationError(path + ": malformed PPM header");
    if (maxval != 255)
        throw ValidationError(path + ": unsupported maxval " + std::to_string(maxval));
    is.get();  // single whitespace after maxval
    ImageRaster img(h, w);
    std::vector<unsigned char> row(static_cast<size_t>(w) * 3);
    for (int u = 0; u < h; ++u) {
        is.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(row.size()));
        if (static_cast<size_t>(is.gcount()) != row.size())
            throw TruncatedFileError(path + ": pixel data shorter than header dims");
        for (int v = 0; v < w; ++v)
            for (int c = 0; c < 3; ++c)
                img.at(c, u, v) = row[static_cast<size_t>(v) * 3 + c] / 255.0f;
    }
    return img;
}

void write_colormap_ppm(const LabelMap& labels, const std::vector<Rgb>& palette,
                        const std::string& path) {
    if (static_cast<int>(palette.size()) != labels.classes)
        throw ValidationError("palette size " + std::to_string(palette.size()) +
                              " != class count " + std::to_string(labels.classes));
    auto os = open_out(path);
    os << "P6\n" << labels.w << " " << labels.h << "\n255\n";
    for (int u = 0; u < labels.h; ++u) {
        for (int v = 0; v < labels.w; ++v) {
            uint8_t cls = labels.at(u, v);
            Rgb rgb = (cls == LabelMap::kNoData) ? Rgb{255, 0, 255} : palette[cls];
            os.write(reinterpret_cast<const char*>(rgb.data()), 3);
        }
    }
    if (!os) throw IoError("write failed: " + path);
}

void write_segment_map(const std::vector<uint32_t>& assignment, int h, int w,
                       const std::string& path) {
    if (assignment.size() != static_cast<size_t>(h) * w)
        throw ValidationError("segment map size mismatch");
    auto os = open_out(path);
    os.write("MSRS", 4);
    put_u32(os, 1);
    put_u32(os, static_cast<uint32_t>(h));
    put_u32(os, static_cast<uint32_t>(w));
    for (uint32_t id : assignment) put_u32(os, id);
    if (!os) throw IoError("write failed: " + path);
}

std::vector<uint32_t> read_segment_map(const std::string& path, int& h, int& w) {
    auto is = open_in(path);
    check_magic(is, "MSRS", path);
    h = static_cast<int>(get_u32(is));
    w = static_cast<int>(get_u32(is));
    if (h < 1 || w < 1) throw ValidationError(path + ": invalid dims");
    std::vector<uint32_t> out(static_cast<size_t>(h) * w);
    for (auto& id : out) id = get_u32(is);
    return out;
}

}  // namespace mapsr
