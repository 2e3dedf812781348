#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "mapsr/eval.hpp"

using namespace mapsr;

namespace {

LabelMap make_labels(int h, int w, int classes,
                     const std::vector<uint8_t>& data) {
    LabelMap m(h, w, classes);
    m.data = data;
    return m;
}

}  // namespace

TEST_CASE("identical maps fill only the diagonal") {
    std::mt19937 rng(1);
    LabelMap y(6, 6, 3);
    for (auto& v : y.data) v = static_cast<uint8_t>(rng() % 3);
    ConfusionMatrix cm(3);
    accumulate_confusion(y, y, cm);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j) CHECK(cm.at(i, j) == 0);
    CHECK(cm.total() == 36);
    CHECK(miou(cm).mean == doctest::Approx(1.0));
}

TEST_CASE("all-zeros predicted on all-ones truth lands in counts[1][0]") {
    LabelMap pred(4, 5, 2, 0), truth(4, 5, 2, 1);
    ConfusionMatrix cm(2);
    accumulate_confusion(pred, truth, cm);
    CHECK(cm.at(1, 0) == 20);
    CHECK(cm.at(0, 0) == 0);
    CHECK(cm.at(0, 1) == 0);
    CHECK(cm.at(1, 1) == 0);
}

TEST_CASE("worked 3-pixel confusion matrix") {
    // truth [0,0,1], pred [0,1,1]:
    // class 0: inter 1, union 2 -> 0.5; class 1: inter 1, union 2 -> 0.5
    LabelMap pred = make_labels(1, 3, 2, {0, 1, 1});
    LabelMap truth = make_labels(1, 3, 2, {0, 0, 1});
    ConfusionMatrix cm(2);
    accumulate_confusion(pred, truth, cm);
    CHECK(cm.at(0, 0) == 1);
    CHECK(cm.at(0, 1) == 1);
    CHECK(cm.at(1, 1) == 1);
    CHECK(cm.at(1, 0) == 0);
    IouResult r = miou(cm);
    CHECK(r.per_class[0] == doctest::Approx(0.5));
    CHECK(r.per_class[1] == doctest::Approx(0.5));
    CHECK(r.mean == doctest::Approx(0.5));
    CHECK(r.included == std::vector<bool>{true, true});
}

TEST_CASE("fully disjoint maps give mIoU 0") {
    LabelMap pred(3, 3, 2, 0), truth(3, 3, 2, 1);
    ConfusionMatrix cm(2);
    accumulate_confusion(pred, truth, cm);
    IouResult r = miou(cm);
    CHECK(r.per_class[0] == doctest::Approx(0.0));
    CHECK(r.per_class[1] == doctest::Approx(0.0));
    CHECK(r.mean == doctest::Approx(0.0));
}

TEST_CASE("IoU values stay in [0,1]") {
    std::mt19937 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        LabelMap pred(8, 8, 4), truth(8, 8, 4);
        for (auto& v : pred.data) v = static_cast<uint8_t>(rng() % 4);
        for (auto& v : truth.data) v = static_cast<uint8_t>(rng() % 4);
        ConfusionMatrix cm(4);
        accumulate_confusion(pred, truth, cm);
        IouResult r = miou(cm);
        CHECK(r.mean >= 0.0);
        CHECK(r.mean <= 1.0);
        for (int c = 0; c < 4; ++c)
            if (!std::isnan(r.per_class[c])) {
                CHECK(r.per_class[c] >= 0.0);
                CHECK(r.per_class[c] <= 1.0);
            }
    }
}

TEST_CASE("consistent relabeling leaves the mIoU unchanged") {
    std::mt19937 rng(3);
    LabelMap pred(10, 10, 3), truth(10, 10, 3);
    for (auto& v : pred.data) v = static_cast<uint8_t>(rng() % 3);
    for (auto& v : truth.data) v = static_cast<uint8_t>(rng() % 3);
    ConfusionMatrix cm(3);
    accumulate_confusion(pred, truth, cm);
    double base = miou(cm).mean;

    const uint8_t perm[3] = {2, 0, 1};
    LabelMap pred2 = pred, truth2 = truth;
    for (auto& v : pred2.data) v = perm[v];
    for (auto& v : truth2.data) v = perm[v];
    ConfusionMatrix cm2(3);
    accumulate_confusion(pred2, truth2, cm2);
    CHECK(miou(cm2).mean == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("absent classes: excluded by default, zero when requested") {
    // class 2 never appears in truth or prediction
    LabelMap pred = make_labels(1, 4, 3, {0, 1, 0, 1});
    LabelMap truth = make_labels(1, 4, 3, {0, 1, 1, 0});
    ConfusionMatrix cm(3);
    accumulate_confusion(pred, truth, cm);
    IouResult r = miou(cm);
    CHECK(std::isnan(r.per_class[2]));
    CHECK_FALSE(r.included[2]);
    CHECK(r.mean == doctest::Approx((1.0 / 3 + 1.0 / 3) / 2));

    IouResult z = miou(cm, true);
    CHECK(z.per_class[2] == doctest::Approx(0.0));
    CHECK(z.included[2]);
    CHECK(z.mean == doctest::Approx((1.0 / 3 + 1.0 / 3) / 3));
}

TEST_CASE("all classes absent is a hard error") {
    ConfusionMatrix cm(2);
    CHECK_THROWS_AS(miou(cm), ValidationError);
}

TEST_CASE("nodata truth pixels are ignored and counted") {
    LabelMap pred = make_labels(1, 4, 2, {0, 1, 0, 1});
    LabelMap truth(1, 4, 2);
    truth.data = {0, LabelMap::kNoData, 1, LabelMap::kNoData};
    ConfusionMatrix cm(2);
    accumulate_confusion(pred, truth, cm);
    CHECK(cm.total() == 2);
    CHECK(cm.ignored == 2);
    CHECK(cm.total() + cm.ignored == 4);
    CHECK(cm.at(0, 0) == 1);
    CHECK(cm.at(1, 0) == 1);
}

TEST_CASE("accumulation over multiple tiles equals the whole image") {
    std::mt19937 rng(4);
    LabelMap pred(6, 8, 3), truth(6, 8, 3);
    for (auto& v : pred.data) v = static_cast<uint8_t>(rng() % 3);
    for (auto& v : truth.data) v = static_cast<uint8_t>(rng() % 3);
    ConfusionMatrix whole(3);
    accumulate_confusion(pred, truth, whole);

    ConfusionMatrix tiles(3);
    for (int half = 0; half < 2; ++half) {
        LabelMap p(3, 8, 3), t(3, 8, 3);
        for (int u = 0; u < 3; ++u)
            for (int v = 0; v < 8; ++v) {
                p.at(u, v) = pred.at(half * 3 + u, v);
                t.at(u, v) = truth.at(half * 3 + u, v);
            }
        accumulate_confusion(p, t, tiles);
    }
    CHECK(tiles.counts == whole.counts);
}
