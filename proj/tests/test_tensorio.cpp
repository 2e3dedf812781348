#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "mapsr/tensorio.hpp"

using namespace mapsr;
namespace fs = std::filesystem;

namespace {
std::string tmp_path(const std::string& name) {
    return (fs::temp_directory_path() / ("mapsr_io_" + name)).string();
}
}  // namespace

TEST_CASE("feature map 1x1x1 file is 24 bytes") {
    FeatureMap m(1, 1, 1, 0.5f);
    auto path = tmp_path("single.msrf");
    write_feature_map(m, path);
    CHECK(fs::file_size(path) == 24);  // magic+version+dims+1 float
    FeatureMap back = read_feature_map(path);
    CHECK(back.at(0, 0, 0) == 0.5f);
}

TEST_CASE("feature map round-trips bit-exactly") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<float> dist(-10, 10);
    FeatureMap m(8, 16, 16);
    for (auto& v : m.data) v = dist(rng);
    auto path = tmp_path("rt.msrf");
    write_feature_map(m, path);
    FeatureMap back = read_feature_map(path);
    CHECK(back.d == 8);
    CHECK(back.h == 16);
    CHECK(back.w == 16);
    CHECK(back.data == m.data);
}

TEST_CASE("layout law: element (d,u,v) at flat index d*H*W + u*W + v") {
    FeatureMap m(2, 3, 4);
    for (size_t i = 0; i < m.data.size(); ++i) m.data[i] = static_cast<float>(i);
    auto path = tmp_path("count.msrf");
    write_feature_map(m, path);
    FeatureMap back = read_feature_map(path);
    for (int d = 0; d < 2; ++d)
        for (int u = 0; u < 3; ++u)
            for (int v = 0; v < 4; ++v)
                CHECK(back.at(d, u, v) == static_cast<float>(d * 12 + u * 4 + v));
}

TEST_CASE("NaN payload rejected on write") {
    FeatureMap m(1, 1, 2, 0.0f);
    m.data[1] = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(write_feature_map(m, tmp_path("nan.msrf")), ValidationError);
}

TEST_CASE("bad magic and truncation are distinct errors") {
    auto path = tmp_path("bad.msrf");
    {
        std::ofstream os(path, std::ios::binary);
        os.write("XXXX\x01\x00\x00\x00", 8);
    }
    CHECK_THROWS_AS(read_feature_map(path), BadMagicError);

    FeatureMap m(2, 4, 4, 1.0f);
    auto full = tmp_path("full.msrf");
    write_feature_map(m, full);
    auto trunc = tmp_path("trunc.msrf");
    {
        std::ifstream is(full, std::ios::binary);
        std::vector<char> bytes((std::istreambuf_iterator<char>(is)),
                                std::istreambuf_iterator<char>());
        std::ofstream os(trunc, std::ios::binary);
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 7));
    }
    CHECK_THROWS_AS(read_feature_map(trunc), TruncatedFileError);
}

TEST_CASE("label map round-trip with nodata") {
    LabelMap m(2, 2, 2);
    m.at(0, 0) = 0;
    m.at(0, 1) = 1;
    m.at(1, 0) = 1;
    m.at(1, 1) = LabelMap::kNoData;
    auto path = tmp_path("labels.msrl");
    write_label_map(m, path);
    LabelMap back = read_label_map(path);
    CHECK(back.data == m.data);
    CHECK(back.classes == 2);
}

TEST_CASE("label value out of class range rejected") {
    LabelMap m(1, 1, 5);
    m.at(0, 0) = 7;
    CHECK_THROWS_AS(write_label_map(m, tmp_path("range.msrl")), ValidationError);
}

TEST_CASE("ppm scaling: 0 -> 0, 255 -> 1, 128 -> 128/255") {
    ImageRaster img(1, 3);
    img.at(0, 0, 0) = 0.0f;
    img.at(0, 0, 1) = 1.0f;
    img.at(0, 0, 2) = 128.0f / 255.0f;
    auto path = tmp_path("scale.ppm");
    write_image(img, path);
    ImageRaster back = read_image(path);
    CHECK(back.at(0, 0, 0) == 0.0f);
    CHECK(back.at(0, 0, 1) == 1.0f);
    CHECK(back.at(0, 0, 2) == doctest::Approx(128.0 / 255.0));
}

TEST_CASE("all-zero ppm reads as zeros") {
    ImageRaster img(2, 2);
    auto path = tmp_path("zero.ppm");
    write_image(img, path);
    ImageRaster back = read_image(path);
    for (float v : back.data) CHECK(v == 0.0f);
}

TEST_CASE("ppm with wrong maxval rejected") {
    auto path = tmp_path("maxval.ppm");
    {
        std::ofstream os(path, std::ios::binary);
        os << "P6\n1 1\n65535\n";
        os.write("\0\0\0\0\0\0", 6);
    }
    CHECK_THROWS_AS(read_image(path), ValidationError);
}

TEST_CASE("colormap checkerboard and nodata sentinel") {
    LabelMap m(2, 2, 2);
    m.at(0, 0) = 0;
    m.at(0, 1) = 1;
    m.at(1, 0) = 1;
    m.at(1, 1) = LabelMap::kNoData;
    std::vector<Rgb> palette = {{0, 0, 0}, {255, 255, 255}};
    auto path = tmp_path("cmap.ppm");
    write_colormap_ppm(m, palette, path);
    ImageRaster img = read_image(path);
    CHECK(img.at(0, 0, 0) == 0.0f);
    CHECK(img.at(0, 0, 1) == 1.0f);
    CHECK(img.at(0, 1, 0) == 1.0f);
    // nodata -> magenta
    CHECK(img.at(0, 1, 1) == 1.0f);
    CHECK(img.at(1, 1, 1) == 0.0f);
    CHECK(img.at(2, 1, 1) == 1.0f);

    CHECK_THROWS_AS(
        write_colormap_ppm(m, {{0, 0, 0}}, tmp_path("cmap_bad.ppm")),
        ValidationError);
}

TEST_CASE("segment raster round-trips") {
    std::vector<uint32_t> ids = {0, 1, 2, 1, 0, 3};
    auto path = tmp_path("segs.msrs");
    write_segment_map(ids, 2, 3, path);
    int h = 0, w = 0;
    auto back = read_segment_map(path, h, w);
    CHECK(h == 2);
    CHECK(w == 3);
    CHECK(back == ids);
}
