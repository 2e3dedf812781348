#include "mapsr/probe.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

namespace mapsr {

void ProbeTrainConfig::validate() const {
    if (learning_rate <= 0) throw ValidationError("learning_rate must be > 0");
    if (epochs < 1) throw ValidationError("epochs must be >= 1");
    if (batch_pixels < 0) throw ValidationError("batch_pixels must be >= 0");
    if (l2_reg < 0) throw ValidationError("l2_reg must be >= 0");
}

LabelMap upsample_labels_nn(const LabelMap& y_lr, int H, int W) {
    if (y_lr.h < 1 || y_lr.w < 1 || H < 1 || W < 1)
        throw ValidationError("zero dims in label upsampling");
    LabelMap out(H, W, y_lr.classes);
    for (int u = 0; u < H; ++u) {
        int su = static_cast<int>(static_cast<int64_t>(u) * y_lr.h / H);
        for (int v = 0; v < W; ++v) {
            int sv = static_cast<int>(static_cast<int64_t>(v) * y_lr.w / W);
            out.at(u, v) = y_lr.at(su, sv);
        }
    }
    return out;
}

void probe_loss_and_grad(const LinearProbe& probe, const FeatureMap& feats,
                         const LabelMap& labels,
                         const std::vector<int>& pixel_subset, double l2_reg,
                         double& loss, std::vector<double>& grad) {
    const int C = probe.classes, D = probe.feature_dim;
    if (feats.d != D || feats.h != labels.h || feats.w != labels.w)
        throw ValidationError("probe/features/labels dims disagree");
    if (pixel_subset.empty()) throw ValidationError("empty pixel subset");

    const size_t plane = static_cast<size_t>(feats.h) * feats.w;
    loss = 0.0;
    grad.assign(static_cast<size_t>(C) * D, 0.0);
    std::vector<double> logits(C), probs(C);

    for (int idx : pixel_subset) {
        uint8_t target = labels.data[idx];
        if (target == LabelMap::kNoData) continue;
        double max_logit = -1e300;
        for (int c = 0; c < C; ++c) {
            double z = 0;
            const float* wrow = &probe.weights[static_cast<size_t>(c) * D];
            for (int d = 0; d < D; ++d)
                z += static_cast<double>(wrow[d]) * feats.data[plane * d + idx];
            logits[c] = z;
            max_logit = std::max(max_logit, z);
        }
        double denom = 0;
        for (int c = 0; c < C; ++c) {
            probs[c] = std::exp(logits[c] - max_logit);
            denom += probs[c];
        }
        loss += std::log(denom) + max_logit - logits[target];
        for (int c = 0; c < C; ++c) {
            double coef = probs[c] / denom - (c == target ? 1.0 : 0.0);
            double* grow = &grad[static_cast<size_t>(c) * D];
            for (int d = 0; d < D; ++d)
                grow[d] += coef * feats.data[plane * d + idx];
        }
    }
    if (l2_reg > 0) {
        double sq = 0;
        for (size_t i = 0; i < probe.weights.size(); ++i) {
            sq += static_cast<double>(probe.weights[i]) * probe.weights[i];
            grad[i] += l2_reg * probe.weights[i];
        }
        loss += 0.5 * l2_reg * sq;
    }
}

LinearProbe train_probe(const FeatureMap& feats, const LabelMap& labels,
                        const ProbeTrainConfig& cfg,
                        std::vector<double>* loss_history) {
    cfg.validate();
    if (feats.h != labels.h || feats.w != labels.w)
        throw ValidationError("features/labels dims disagree");

    const int C = labels.classes, D = feats.d;
    LinearProbe probe(C, D);  // zero init: the objective is convex

    std::vector<int> pixels;
    pixels.reserve(labels.data.size());
    for (int i = 0; i < static_cast<int>(labels.data.size()); ++i)
        if (labels.data[i] != LabelMap::kNoData) pixels.push_back(i);
    if (pixels.empty()) throw ValidationError("no supervised pixels");

    std::mt19937_64 rng(cfg.seed);
    const int batch =
        cfg.batch_pixels == 0
            ? static_cast<int>(pixels.size())
            : std::min<int>(cfg.batch_pixels, static_cast<int>(pixels.size()));

    double loss = 0;
    std::vector<double> grad;
    std::vector<int> chunk;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (int i = static_cast<int>(pixels.size()) - 1; i > 0; --i) {
            int j = static_cast<int>(rng() % (i + 1));
            std::swap(pixels[i], pixels[j]);
        }
        for (size_t start = 0; start < pixels.size(); start += batch) {
            size_t end = std::min(pixels.size(), start + batch);
            chunk.assign(pixels.begin() + start, pixels.begin() + end);
            probe_loss_and_grad(probe, feats, labels, chunk, cfg.l2_reg, loss,
                                grad);
            double step = cfg.learning_rate / static_cast<double>(chunk.size());
            for (size_t i = 0; i < probe.weights.size(); ++i)
                probe.weights[i] -= static_cast<float>(step * grad[i]);
        }
        if (loss_history) {
            probe_loss_and_grad(probe, feats, labels, pixels, cfg.l2_reg, loss,
                                grad);
            loss_history->push_back(loss);
        }
    }
    return probe;
}

LabelMap probe_predict(const LinearProbe& probe, const FeatureMap& feats) {
    if (feats.d != probe.feature_dim)
        throw ValidationError("feature dim mismatch");
    const int C = probe.classes, D = probe.feature_dim;
    const size_t plane = static_cast<size_t>(feats.h) * feats.w;
    LabelMap out(feats.h, feats.w, C);
    for (size_t idx = 0; idx < plane; ++idx) {
        double best = -1e300;
        int best_c = 0;
        for (int c = 0; c < C; ++c) {
            double z = 0;
            const float* wrow = &probe.weights[static_cast<size_t>(c) * D];
            for (int d = 0; d < D; ++d)
                z += static_cast<double>(wrow[d]) * feats.data[plane * d + idx];
            if (z > best) {
                best = z;
                best_c = c;
            }
        }
        out.data[idx] = static_cast<uint8_t>(best_c);
    }
    return out;
}

void write_probe(const LinearProbe& probe, const std::string& path) {
    FeatureMap as_map(1, probe.classes, probe.feature_dim);
    as_map.data = probe.weights;
    // Reuse the f32 block writer via a private container: magic differs, so
    // write directly here.
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os.write("MSRW", 4);
    auto put = [&](uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>((v >> 8) & 0xff),
                              static_cast<unsigned char>((v >> 16) & 0xff),
                              static_cast<unsigned char>((v >> 24) & 0xff)};
        os.write(reinterpret_cast<const char*>(b), 4);
    };
    put(1);
    put(static_cast<uint32_t>(probe.classes));
    put(static_cast<uint32_t>(probe.feature_dim));
    for (float v : probe.weights) {
        uint32_t bits;
        std::memcpy(&bits, &v, 4);
        put(bits);
    }
    if (!os) throw IoError("write failed: " + path);
}

LinearProbe read_probe(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "MSRW", 4) != 0)
        throw BadMagicError(path + ": bad magic, expected MSRW");
    auto get = [&]() -> uint32_t {
        unsigned char b[4];
        is.read(reinterpret_cast<char*>(b), 4);
        if (!is) throw TruncatedFileError(path + ": truncated");
        return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
               (static_cast<uint32_t>(b[2]) << 16) |
               (static_cast<uint32_t>(b[3]) << 24);
    };
    if (get() != 1) throw BadMagicError(path + ": unsupported version");
    int C = static_cast<int>(get());
    int D = static_cast<int>(get());
    if (C < 1 || D < 1) throw ValidationError(path + ": invalid dims");
    LinearProbe probe(C, D);
    for (auto& v : probe.weights) {
        uint32_t bits = get();
        std::memcpy(&v, &bits, 4);
    }
    return probe;
}

}  // namespace mapsr
