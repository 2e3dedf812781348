#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "mapsr/synth.hpp"

using namespace mapsr;

TEST_CASE("majority downsample: clear majority, tie rule, identity") {
    LabelMap m(2, 2, 3);
    m.at(0, 0) = 0;
    m.at(0, 1) = 0;
    m.at(1, 0) = 1;
    m.at(1, 1) = 2;
    CHECK(majority_downsample(m, 2).at(0, 0) == 0);

    LabelMap tie(2, 2, 2);
    tie.at(0, 0) = 0;
    tie.at(0, 1) = 1;
    tie.at(1, 0) = 1;
    tie.at(1, 1) = 0;
    CHECK(majority_downsample(tie, 2).at(0, 0) == 0);  // tie -> lowest

    LabelMap id(4, 4, 3, 2);
    CHECK(majority_downsample(id, 1).data == id.data);

    CHECK_THROWS_AS(majority_downsample(m, 3), ValidationError);
}

TEST_CASE("majority downsample matches brute-force block scan") {
    SceneSpec spec;
    spec.h = 32;
    spec.w = 32;
    spec.seed = 11;
    Scene scene = generate_scene(spec);
    LabelMap down = majority_downsample(scene.truth, 4);
    for (int bu = 0; bu < down.h; ++bu)
        for (int bv = 0; bv < down.w; ++bv) {
            int counts[8] = {0};
            for (int du = 0; du < 4; ++du)
                for (int dv = 0; dv < 4; ++dv)
                    counts[scene.truth.at(bu * 4 + du, bv * 4 + dv)]++;
            int best = 0;
            for (int c = 1; c < spec.classes; ++c)
                if (counts[c] > counts[best]) best = c;
            CHECK(down.at(bu, bv) == best);
        }
}

TEST_CASE("degenerate degradation: lr == truth") {
    SceneSpec spec;
    spec.embed_noise = 0;
    spec.label_flip_rate = 0;
    spec.lr_factor = 1;
    spec.seed = 3;
    Scene scene = generate_scene(spec);
    CHECK(scene.lr_labels.data == scene.truth.data);
}

TEST_CASE("no flips: every LR cell equals block majority") {
    SceneSpec spec;
    spec.lr_factor = 8;
    spec.label_flip_rate = 0;
    spec.seed = 21;
    Scene scene = generate_scene(spec);
    LabelMap expect = majority_downsample(scene.truth, 8);
    CHECK(scene.lr_labels.data == expect.data);
}

TEST_CASE("same seed -> bit-identical outputs") {
    SceneSpec spec;
    spec.embed_noise = 0.3;
    spec.image_noise = 0.05;
    spec.label_flip_rate = 0.2;
    spec.lr_factor = 4;
    spec.seed = 99;
    Scene a = generate_scene(spec);
    Scene b = generate_scene(spec);
    CHECK(a.image.data == b.image.data);
    CHECK(a.dense_feats.data == b.dense_feats.data);
    CHECK(a.patch_feats.data == b.patch_feats.data);
    CHECK(a.truth.data == b.truth.data);
    CHECK(a.lr_labels.data == b.lr_labels.data);
}

TEST_CASE("simplex class means are unit-scaled and equidistant") {
    auto means = simplex_class_means(4, 16, 2.0);
    for (const auto& mu : means) {
        double n = 0;
        for (float v : mu) n += static_cast<double>(v) * v;
        CHECK(std::sqrt(n) == doctest::Approx(2.0));
    }
    double ref = -1;
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) {
            double d2 = 0;
            for (int j = 0; j < 16; ++j) {
                double d = means[a][j] - means[b][j];
                d2 += d * d;
            }
            if (ref < 0) ref = d2;
            CHECK(d2 == doctest::Approx(ref));
        }
}

TEST_CASE("patch features equal block means of dense features") {
    SceneSpec spec;
    spec.embed_noise = 0.5;
    spec.seed = 5;
    Scene scene = generate_scene(spec);
    int p = spec.patch;
    for (int d = 0; d < spec.feature_dim; d += 5)
        for (int bu = 0; bu < spec.h / p; bu += 3)
            for (int bv = 0; bv < spec.w / p; bv += 3) {
                double sum = 0;
                for (int du = 0; du < p; ++du)
                    for (int dv = 0; dv < p; ++dv)
                        sum += scene.dense_feats.at(d, bu * p + du, bv * p + dv);
                CHECK(scene.patch_feats.at(d, bu, bv) ==
                      doctest::Approx(sum / (p * p)).epsilon(1e-5));
            }
}

TEST_CASE("noiseless features sit exactly on the class mean") {
    SceneSpec spec;
    spec.embed_noise = 0;
    spec.seed = 17;
    Scene scene = generate_scene(spec);
    for (int u = 0; u < spec.h; u += 13)
        for (int v = 0; v < spec.w; v += 13) {
            const auto& mu = scene.class_means[scene.truth.at(u, v)];
            for (int d = 0; d < spec.feature_dim; ++d)
                CHECK(scene.dense_feats.at(d, u, v) == mu[d]);
        }
}

TEST_CASE("invalid specs are rejected") {
    SceneSpec spec;
    spec.patch = 7;  // does not divide 128
    CHECK_THROWS_AS(generate_scene(spec), ValidationError);
    spec = SceneSpec{};
    spec.lr_factor = 7;
    CHECK_THROWS_AS(generate_scene(spec), ValidationError);
    spec = SceneSpec{};
    spec.label_flip_rate = 1.0;
    CHECK_THROWS_AS(generate_scene(spec), ValidationError);
}
