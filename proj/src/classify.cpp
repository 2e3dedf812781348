#include "mapsr/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace mapsr {

void KMeansConfig::validate() const {
    if (k < 2) throw ValidationError("k must be >= 2");
    if (max_iters < 1) throw ValidationError("max_iters must be >= 1");
    if (tol <= 0) throw ValidationError("tol must be > 0");
}

ScoreMap cosine_scores(const FeatureMap& feats, const PromptSet& prompts) {
    if (feats.d != prompts.feature_dim)
        throw ValidationError("feature dim mismatch with prompts");
    const int C = prompts.classes, D = feats.d;
    const size_t plane = static_cast<size_t>(feats.h) * feats.w;

    std::vector<double> pnorm(C, 0.0);
    std::vector<bool> act(C, false);
    int n_active = 0;
    for (int c = 0; c < C; ++c) {
        act[c] = prompts.active(c);
        if (act[c]) {
            double s = 0;
            for (float v : prompts.prompts[c]) s += static_cast<double>(v) * v;
            pnorm[c] = std::sqrt(s);
            n_active++;
        }
    }
    if (n_active == 0) throw ValidationError("no active prompts");

    ScoreMap scores(C, feats.h, feats.w, kInactiveScore);
    for (size_t idx = 0; idx < plane; ++idx) {
        double fnorm = 0;
        for (int d = 0; d < D; ++d) {
            double v = feats.data[plane * d + idx];
            fnorm += v * v;
        }
        fnorm = std::sqrt(fnorm);
        for (int c = 0; c < C; ++c) {
            if (!act[c]) continue;
            if (fnorm < 1e-12) {
                scores.data[plane * c + idx] = 0.0f;
                continue;
            }
            double dot = 0;
            const auto& p = prompts.prompts[c];
            for (int d = 0; d < D; ++d)
                dot += static_cast<double>(p[d]) * feats.data[plane * d + idx];
            scores.data[plane * c + idx] =
                static_cast<float>(dot / (pnorm[c] * fnorm));
        }
    }
    return scores;
}

LabelMap argmax_labels(const ScoreMap& scores) {
    if (scores.classes < 1) throw ValidationError("need at least one class");
    const size_t plane = static_cast<size_t>(scores.h) * scores.w;
    LabelMap out(scores.h, scores.w, scores.classes);
    for (size_t idx = 0; idx < plane; ++idx) {
        float best = scores.data[idx];
        int best_c = 0;
        for (int c = 1; c < scores.classes; ++c) {
            float s = scores.data[plane * c + idx];
            if (s > best) {
                best = s;
                best_c = c;
            }
        }
        out.data[idx] = static_cast<uint8_t>(best_c);
    }
    return out;
}

namespace {

double sq_dist(const float* a, const std::vector<double>& b, size_t plane,
               size_t idx, int D) {
    double s = 0;
    for (int d = 0; d < D; ++d) {
        double diff = a[plane * d + idx] - b[d];
        s += diff * diff;
    }
    return s;
}

}  // namespace

LabelMap kmeans_voting_baseline(const FeatureMap& feats, const LabelMap& lr_up,
                                const KMeansConfig& cfg,
                                std::vector<double>* objective_history) {
    cfg.validate();
    if (feats.h != lr_up.h || feats.w != lr_up.w)
        throw ValidationError("features/labels dims disagree");
    const int D = feats.d, k = cfg.k;
    const size_t plane = static_cast<size_t>(feats.h) * feats.w;
    if (static_cast<size_t>(k) > plane)
        throw ValidationError("k exceeds pixel count");

    std::mt19937_64 rng(cfg.seed);
    auto uniform01 = [&]() { return (rng() >> 11) * 0x1.0p-53; };

    // k-means++ init.
    std::vector<std::vector<double>> centers(k, std::vector<double>(D));
    std::vector<double> min_d2(plane, std::numeric_limits<double>::max());
    size_t first = rng() % plane;
    for (int d = 0; d < D; ++d) centers[0][d] = feats.data[plane * d + first];
    for (int c = 1; c < k; ++c) {
        double total = 0;
        for (size_t i = 0; i < plane; ++i) {
            double d2 = sq_dist(feats.data.data(), centers[c - 1], plane, i, D);
            min_d2[i] = std::min(min_d2[i], d2);
            total += min_d2[i];
        }
        size_t pick = 0;
        if (total > 0) {
            double r = uniform01() * total, cum = 0;
            for (size_t i = 0; i < plane; ++i) {
                cum += min_d2[i];
                if (cum >= r) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng() % plane;
        }
        for (int d = 0; d < D; ++d) centers[c][d] = feats.data[plane * d + pick];
    }

    std::vector<int> assign(plane, 0);
    std::vector<double> dist_to_center(plane, 0.0);
    std::vector<std::vector<double>> sums(k, std::vector<double>(D));
    std::vector<size_t> counts(k);
    double prev_obj = std::numeric_limits<double>::max();

    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        double obj = 0;
        for (size_t i = 0; i < plane; ++i) {
            double best = std::numeric_limits<double>::max();
            int best_c = 0;
            for (int c = 0; c < k; ++c) {
                double d2 = sq_dist(feats.data.data(), centers[c], plane, i, D);
                if (d2 < best) {
                    best = d2;
                    best_c = c;
                }
            }
            assign[i] = best_c;
            dist_to_center[i] = best;
            obj += best;
        }
        if (objective_history) objective_history->push_back(obj);

        for (int c = 0; c < k; ++c) {
            std::fill(sums[c].begin(), sums[c].end(), 0.0);
            counts[c] = 0;
        }
        for (size_t i = 0; i < plane; ++i) {
            counts[assign[i]]++;
            for (int d = 0; d < D; ++d)
                sums[assign[i]][d] += feats.data[plane * d + i];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // re-seed from the farthest point
                size_t far = 0;
                double far_d = -1;
                for (size_t i = 0; i < plane; ++i)
                    if (dist_to_center[i] > far_d) {
                        far_d = dist_to_center[i];
                        far = i;
                    }
                for (int d = 0; d < D; ++d)
                    centers[c][d] = feats.data[plane * d + far];
                dist_to_center[far] = 0;
            } else {
                for (int d = 0; d < D; ++d)
                    centers[c][d] = sums[c][d] / counts[c];
            }
        }
        if (prev_obj - obj < cfg.tol * std::max(1.0, prev_obj)) break;
        prev_obj = obj;
    }

    // Final assignment with converged centers, then per-cluster majority
    // vote over upsampled LR labels (ties -> lowest class).
    std::vector<std::vector<size_t>> votes(
        k, std::vector<size_t>(lr_up.classes, 0));
    for (size_t i = 0; i < plane; ++i) {
        double best = std::numeric_limits<double>::max();
        int best_c = 0;
        for (int c = 0; c < k; ++c) {
            double d2 = sq_dist(feats.data.data(), centers[c], plane, i, D);
            if (d2 < best) {
                best = d2;
                best_c = c;
            }
        }
        assign[i] = best_c;
        uint8_t lbl = lr_up.data[i];
        if (lbl != LabelMap::kNoData) votes[best_c][lbl]++;
    }
    std::vector<uint8_t> cluster_class(k, 0);
    for (int c = 0; c < k; ++c) {
        int best = 0;
        for (int y = 1; y < lr_up.classes; ++y)
            if (votes[c][y] > votes[c][best]) best = y;
        cluster_class[c] = static_cast<uint8_t>(best);
    }
    LabelMap out(feats.h, feats.w, lr_up.classes);
    for (size_t i = 0; i < plane; ++i) out.data[i] = cluster_class[assign[i]];
    return out;
}

}  // namespace mapsr
