#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "mapsr/prompts.hpp"
#include "mapsr/synth.hpp"

using namespace mapsr;

namespace {

FeatureMap random_feats(int d, int h, int w, uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> dist(-1, 1);
    FeatureMap f(d, h, w);
    for (auto& v : f.data) v = dist(rng);
    return f;
}

}  // namespace

TEST_CASE("high-confidence selection") {
    LabelMap pred(3, 3, 2), lr(3, 3, 2);

    SUBCASE("full agreement selects all pixels of the class") {
        for (size_t i = 0; i < pred.data.size(); ++i)
            pred.data[i] = lr.data[i] = static_cast<uint8_t>(i % 2);
        auto omega1 = select_high_confidence(pred, lr, 1);
        CHECK(omega1.size() == 4);
        for (int idx : omega1) CHECK(pred.data[idx] == 1);
    }

    SUBCASE("disjoint predictions select nothing") {
        std::fill(pred.data.begin(), pred.data.end(), 0);
        std::fill(lr.data.begin(), lr.data.end(), 1);
        CHECK(select_high_confidence(pred, lr, 0).empty());
        CHECK(select_high_confidence(pred, lr, 1).empty());
    }

    SUBCASE("exact agreeing coordinates") {
        std::fill(pred.data.begin(), pred.data.end(), 0);
        std::fill(lr.data.begin(), lr.data.end(), 0);
        pred.at(0, 1) = 1;
        lr.at(0, 1) = 1;
        pred.at(2, 2) = 1;
        lr.at(2, 2) = 1;
        pred.at(1, 1) = 1;  // probe says 1, label says 0 -> excluded
        auto omega = select_high_confidence(pred, lr, 1);
        CHECK(omega == std::vector<int>{1, 8});
    }
}

TEST_CASE("omega sets are pairwise disjoint") {
    std::mt19937 rng(3);
    LabelMap pred(8, 8, 3), lr(8, 8, 3);
    for (auto& v : pred.data) v = static_cast<uint8_t>(rng() % 3);
    for (auto& v : lr.data) v = static_cast<uint8_t>(rng() % 3);
    std::set<int> seen;
    for (int c = 0; c < 3; ++c)
        for (int idx : select_high_confidence(pred, lr, c))
            CHECK(seen.insert(idx).second);
}

TEST_CASE("aggregate: single pixel, symmetric pair, brute-force mean") {
    FeatureMap f = random_feats(4, 4, 4, 5);

    PromptSet single = aggregate_prompts(f, {{5}, {}}, nullptr, nullptr);
    for (int d = 0; d < 4; ++d)
        CHECK(single.prompts[0][d] == doctest::Approx(f.data[16 * d + 5]));
    CHECK(single.support_counts[0] == 1);
    CHECK_FALSE(single.active(1));

    // features x and -x average to ~zero, flagged inactive by norm guard
    FeatureMap sym(3, 1, 2);
    for (int d = 0; d < 3; ++d) {
        sym.at(d, 0, 0) = static_cast<float>(d + 1);
        sym.at(d, 0, 1) = -static_cast<float>(d + 1);
    }
    PromptSet degenerate = aggregate_prompts(sym, {{0, 1}});
    double norm = 0;
    for (float v : degenerate.prompts[0]) norm += static_cast<double>(v) * v;
    CHECK(std::sqrt(norm) < 1e-12);
    CHECK_FALSE(degenerate.active(0));

    std::vector<int> pixels = {1, 3, 7, 9, 14};
    PromptSet mean = aggregate_prompts(f, {pixels});
    for (int d = 0; d < 4; ++d) {
        double expect = 0;
        for (int idx : pixels) expect += f.data[16 * d + idx];
        expect /= pixels.size();
        CHECK(mean.prompts[0][d] == doctest::Approx(expect).epsilon(1e-6));
    }
}

TEST_CASE("prompt stays inside the componentwise hull of its features") {
    FeatureMap f = random_feats(5, 6, 6, 7);
    std::vector<int> pixels = {0, 5, 11, 17, 23, 29, 35};
    PromptSet ps = aggregate_prompts(f, {pixels});
    for (int d = 0; d < 5; ++d) {
        float lo = 1e30f, hi = -1e30f;
        for (int idx : pixels) {
            lo = std::min(lo, f.data[36 * d + idx]);
            hi = std::max(hi, f.data[36 * d + idx]);
        }
        CHECK(ps.prompts[0][d] >= lo - 1e-6f);
        CHECK(ps.prompts[0][d] <= hi + 1e-6f);
    }
}

TEST_CASE("all-empty classes is a hard error") {
    FeatureMap f = random_feats(2, 2, 2, 8);
    CHECK_THROWS_AS(aggregate_prompts(f, {{}, {}}), ValidationError);
}

TEST_CASE("fallback chain: lr-only, probe-only, inactive") {
    FeatureMap f = random_feats(2, 2, 2, 9);
    LabelMap lr(2, 2, 3, 0);
    lr.at(1, 1) = 1;  // class 1 exists only in lr
    LabelMap pred(2, 2, 3, 0);
    pred.at(0, 1) = 2;  // class 2 exists only in probe prediction

    // omega_0 nonempty; omega_1, omega_2 empty
    std::vector<std::vector<int>> omegas = {{0}, {}, {}};
    PromptSet ps = aggregate_prompts(f, omegas, &lr, &pred);
    CHECK(ps.provenance[0] == PromptProvenance::probe_agreement);
    CHECK(ps.provenance[1] == PromptProvenance::fallback_lr_only);
    CHECK(ps.provenance[2] == PromptProvenance::fallback_probe_only);

    LabelMap lr_no1(2, 2, 3, 0);
    LabelMap pred_no1(2, 2, 3, 0);
    PromptSet inactive = aggregate_prompts(f, omegas, &lr_no1, &pred_no1);
    CHECK(inactive.provenance[1] == PromptProvenance::inactive);
    CHECK_FALSE(inactive.active(1));
}

TEST_CASE("oracle prompts on a noiseless scene recover the class means") {
    SceneSpec spec;
    spec.h = 32;
    spec.w = 32;
    spec.patch = 4;
    spec.embed_noise = 0;
    spec.seed = 10;
    Scene scene = generate_scene(spec);
    PromptSet ps = oracle_prompts(scene.dense_feats, scene.truth);
    for (int c = 0; c < spec.classes; ++c) {
        REQUIRE(ps.active(c));
        CHECK(ps.provenance[c] == PromptProvenance::oracle_hr);
        for (int d = 0; d < spec.feature_dim; ++d)
            CHECK(ps.prompts[c][d] ==
                  doctest::Approx(scene.class_means[c][d]).epsilon(1e-5));
    }
}

TEST_CASE("oracle equals aggregate over truth-label sets") {
    FeatureMap f = random_feats(3, 4, 4, 11);
    LabelMap y(4, 4, 2);
    std::mt19937 rng(12);
    for (auto& v : y.data) v = static_cast<uint8_t>(rng() % 2);
    PromptSet oracle = oracle_prompts(f, y);
    std::vector<std::vector<int>> omegas(2);
    for (int i = 0; i < 16; ++i) omegas[y.data[i]].push_back(i);
    PromptSet agg = aggregate_prompts(f, omegas);
    for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 3; ++d)
            CHECK(oracle.prompts[c][d] == agg.prompts[c][d]);
}

TEST_CASE("one-class truth leaves other prompts unsupported") {
    FeatureMap f = random_feats(2, 2, 2, 13);
    LabelMap y(2, 2, 3, 1);
    PromptSet ps = oracle_prompts(f, y);
    CHECK(ps.active(1));
    CHECK_FALSE(ps.active(0));
    CHECK_FALSE(ps.active(2));
}

TEST_CASE("prompt file round-trips") {
    FeatureMap f = random_feats(4, 4, 4, 14);
    LabelMap y(4, 4, 3);
    std::mt19937 rng(15);
    for (auto& v : y.data) v = static_cast<uint8_t>(rng() % 3);
    PromptSet ps = oracle_prompts(f, y);
    auto path = std::string("/tmp/mapsr_prompts_rt.msrp");
    write_prompts(ps, path);
    PromptSet back = read_prompts(path);
    CHECK(back.classes == ps.classes);
    CHECK(back.feature_dim == ps.feature_dim);
    CHECK(back.prompts == ps.prompts);
    CHECK(back.support_counts == ps.support_counts);
    CHECK(back.provenance == ps.provenance);
}
