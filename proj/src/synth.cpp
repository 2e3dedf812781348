#include "mapsr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mapsr {

namespace {

// Uniform draws built directly on the mt19937_64 output stream; the
// standard distributions are implementation-defined, these are not.
double uniform01(std::mt19937_64& rng) {
    return (rng() >> 11) * 0x1.0p-53;
}

uint64_t uniform_below(std::mt19937_64& rng, uint64_t n) {
    // Modulo bias is negligible for n << 2^64 and irrelevant here;
    // determinism is what matters.
    return rng() % n;
}

// Distinct per-class base colors on a hue wheel.
void class_base_color(int cls, int classes, float rgb[3]) {
    double hue = 6.0 * cls / classes;
    double s = 0.8, v = 0.9;
    int i = static_cast<int>(hue) % 6;
    double f = hue - std::floor(hue);
    double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
    double r, g, b;
    switch (i) {
        case 0: r = v; g = t; b = p; break;
        case 1: r = q; g = v; b = p; break;
        case 2: r = p; g = v; b = t; break;
        case 3: r = p; g = q; b = v; break;
        case 4: r = t; g = p; b = v; break;
        default: r = v; g = p; b = q; break;
    }
    rgb[0] = static_cast<float>(r);
    rgb[1] = static_cast<float>(g);
    rgb[2] = static_cast<float>(b);
}

}  // namespace

double GaussianGen::operator()() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1, u2;
    do {
        u1 = uniform01(rng_);
    } while (u1 <= 0.0);
    u2 = uniform01(rng_);
    double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * M_PI * u2);
    has_spare_ = true;
    return mag * std::cos(2.0 * M_PI * u2);
}

void SceneSpec::validate() const {
    if (h < 1 || w < 1 || classes < 2 || feature_dim < 1)
        throw ValidationError("scene dims/classes invalid");
    if (feature_dim < classes)
        throw ValidationError("feature_dim must be >= classes for simplex means");
    if (patch < 1 || h % patch != 0 || w % patch != 0)
        throw ValidationError("patch must divide scene dims");
    if (lr_factor < 1 || h % lr_factor != 0 || w % lr_factor != 0)
        throw ValidationError("lr_factor must divide scene dims");
    if (n_regions < 1) throw ValidationError("n_regions must be >= 1");
    if (embed_separation < 0 || embed_noise < 0 || image_noise < 0)
        throw ValidationError("noise parameters must be >= 0");
    if (label_flip_rate < 0 || label_flip_rate >= 1)
        throw ValidationError("label_flip_rate must be in [0,1)");
}

std::vector<std::vector<float>> simplex_class_means(int classes, int feature_dim,
                                                    double separation) {
    // v_c = sqrt(C/(C-1)) * (e_c - 1/C) in the first C coordinates; unit
    // norm, pairwise dot -1/(C-1), then scaled by `separation`.
    std::vector<std::vector<float>> means(
        classes, std::vector<float>(feature_dim, 0.0f));
    double scale = std::sqrt(static_cast<double>(classes) / (classes - 1));
    for (int c = 0; c < classes; ++c) {
        for (int j = 0; j < classes; ++j) {
            double v = scale * ((j == c ? 1.0 : 0.0) - 1.0 / classes);
            means[c][j] = static_cast<float>(separation * v);
        }
    }
    return means;
}

LabelMap majority_downsample(const LabelMap& labels, int factor) {
    if (factor < 1 || labels.h % factor != 0 || labels.w % factor != 0)
        throw ValidationError("downsample factor must divide label dims");
    LabelMap out(labels.h / factor, labels.w / factor, labels.classes);
    std::vector<int> counts(labels.classes);
    for (int bu = 0; bu < out.h; ++bu) {
        for (int bv = 0; bv < out.w; ++bv) {
            std::fill(counts.begin(), counts.end(), 0);
            for (int du = 0; du < factor; ++du)
                for (int dv = 0; dv < factor; ++dv) {
                    uint8_t c = labels.at(bu * factor + du, bv * factor + dv);
                    if (c != LabelMap::kNoData) counts[c]++;
                }
            int best = 0;
            for (int c = 1; c < labels.classes; ++c)
                if (counts[c] > counts[best]) best = c;  // ties -> lowest index
            out.at(bu, bv) = static_cast<uint8_t>(best);
        }
    }
    return out;
}

Scene generate_scene(const SceneSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    GaussianGen gauss(rng);

    Scene scene;
    scene.class_means =
        simplex_class_means(spec.classes, spec.feature_dim, spec.embed_separation);

    // Voronoi seeds. Classes are assigned round-robin then shuffled so every
    // class appears whenever n_regions >= classes.
    std::vector<int> seed_r(spec.n_regions), seed_c(spec.n_regions),
        seed_cls(spec.n_regions);
    for (int i = 0; i < spec.n_regions; ++i) {
        seed_r[i] = static_cast<int>(uniform_below(rng, spec.h));
        seed_c[i] = static_cast<int>(uniform_below(rng, spec.w));
        seed_cls[i] = i % spec.classes;
    }
    for (int i = spec.n_regions - 1; i > 0; --i) {
        int j = static_cast<int>(uniform_below(rng, i + 1));
        std::swap(seed_cls[i], seed_cls[j]);
    }

    scene.truth = LabelMap(spec.h, spec.w, spec.classes);
    for (int u = 0; u < spec.h; ++u) {
        for (int v = 0; v < spec.w; ++v) {
            int64_t best_d = std::numeric_limits<int64_t>::max();
            int best = 0;
            for (int i = 0; i < spec.n_regions; ++i) {
                int64_t du = u - seed_r[i], dv = v - seed_c[i];
                int64_t d = du * du + dv * dv;
                if (d < best_d) {
                    best_d = d;
                    best = i;
                }
            }
            scene.truth.at(u, v) = static_cast<uint8_t>(seed_cls[best]);
        }
    }

    // Dense oracle features: class mean + Gaussian noise.
    scene.dense_feats = FeatureMap(spec.feature_dim, spec.h, spec.w);
    for (int u = 0; u < spec.h; ++u)
        for (int v = 0; v < spec.w; ++v) {
            const auto& mu = scene.class_means[scene.truth.at(u, v)];
            for (int d = 0; d < spec.feature_dim; ++d) {
                double noise =
                    spec.embed_noise > 0 ? spec.embed_noise * gauss() : 0.0;
                scene.dense_feats.at(d, u, v) =
                    static_cast<float>(mu[d] + noise);
            }
        }

    // Patch-grid features: block means of the dense oracle.
    int hp = spec.h / spec.patch, wp = spec.w / spec.patch;
    scene.patch_feats = FeatureMap(spec.feature_dim, hp, wp);
    double inv = 1.0 / (spec.patch * spec.patch);
    for (int d = 0; d < spec.feature_dim; ++d)
        for (int bu = 0; bu < hp; ++bu)
            for (int bv = 0; bv < wp; ++bv) {
                double sum = 0;
                for (int du = 0; du < spec.patch; ++du)
                    for (int dv = 0; dv < spec.patch; ++dv)
                        sum += scene.dense_feats.at(d, bu * spec.patch + du,
                                                    bv * spec.patch + dv);
                scene.patch_feats.at(d, bu, bv) = static_cast<float>(sum * inv);
            }

    // Image: per-class base color + noise, clipped to [0,1].
    scene.image = ImageRaster(spec.h, spec.w);
    for (int u = 0; u < spec.h; ++u)
        for (int v = 0; v < spec.w; ++v) {
            float base[3];
            class_base_color(scene.truth.at(u, v), spec.classes, base);
            for (int c = 0; c < 3; ++c) {
                double x = base[c];
                if (spec.image_noise > 0) x += spec.image_noise * gauss();
                scene.image.at(c, u, v) =
                    static_cast<float>(std::min(1.0, std::max(0.0, x)));
            }
        }

    // LR product: majority pool, then independent uniform-wrong-class flips.
    scene.lr_labels = majority_downsample(scene.truth, spec.lr_factor);
    if (spec.label_flip_rate > 0) {
        for (auto& cls : scene.lr_labels.data) {
            if (uniform01(rng) < spec.label_flip_rate) {
                int wrong =
                    static_cast<int>(uniform_below(rng, spec.classes - 1));
                if (wrong >= cls) wrong++;
                cls = static_cast<uint8_t>(wrong);
            }
        }
    }
    return scene;
}

}  // namespace mapsr
