#include "mapsr/superpixel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>

namespace mapsr {

void SlicConfig::validate(int h, int w) const {
    if (n_segments < 1) throw ValidationError("n_segments must be >= 1");
    if (n_segments > h * w)
        throw ValidationError("n_segments exceeds pixel count");
    if (compactness <= 0) throw ValidationError("compactness must be > 0");
    if (max_iters < 1) throw ValidationError("max_iters must be >= 1");
}

void rgb_to_lab(float r, float g, float b, double& L, double& A, double& B) {
    // sRGB -> linear
    auto lin = [](double c) {
        return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
    };
    double rl = lin(r), gl = lin(g), bl = lin(b);
    // linear RGB -> XYZ (D65)
    double X = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl;
    double Y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl;
    double Z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl;
    // XYZ -> Lab, D65 white point
    const double Xn = 0.95047, Yn = 1.0, Zn = 1.08883;
    auto f = [](double t) {
        const double eps = 216.0 / 24389.0, kappa = 24389.0 / 27.0;
        return t > eps ? std::cbrt(t) : (kappa * t + 16.0) / 116.0;
    };
    double fx = f(X / Xn), fy = f(Y / Yn), fz = f(Z / Zn);
    L = 116.0 * fy - 16.0;
    A = 500.0 * (fx - fy);
    B = 200.0 * (fy - fz);
}

namespace {

struct Center {
    double l, a, b, r, c;
};

std::vector<uint32_t> enforce_connectivity_pass(std::vector<uint32_t> labels,
                                                int h, int w) {
    const size_t plane = static_cast<size_t>(h) * w;
    // 4-connected components of equal-label pixels.
    std::vector<int> comp(plane, -1);
    std::vector<size_t> comp_size;
    std::vector<uint32_t> comp_label;
    std::vector<size_t> queue_buf;
    for (size_t start = 0; start < plane; ++start) {
        if (comp[start] >= 0) continue;
        int id = static_cast<int>(comp_size.size());
        comp_size.push_back(0);
        comp_label.push_back(labels[start]);
        queue_buf.clear();
        queue_buf.push_back(start);
        comp[start] = id;
        while (!queue_buf.empty()) {
            size_t i = queue_buf.back();
            queue_buf.pop_back();
            comp_size[id]++;
            int u = static_cast<int>(i / w), v = static_cast<int>(i % w);
            const int du[4] = {-1, 1, 0, 0}, dv[4] = {0, 0, -1, 1};
            for (int k = 0; k < 4; ++k) {
                int nu = u + du[k], nv = v + dv[k];
                if (nu < 0 || nu >= h || nv < 0 || nv >= w) continue;
                size_t ni = static_cast<size_t>(nu) * w + nv;
                if (comp[ni] < 0 && labels[ni] == labels[start]) {
                    comp[ni] = id;
                    queue_buf.push_back(ni);
                }
            }
        }
    }

    const int n_comps = static_cast<int>(comp_size.size());
    // Largest component per label keeps the label; others are orphans.
    std::vector<int> keeper_for_label;
    {
        uint32_t max_label = 0;
        for (uint32_t l : labels) max_label = std::max(max_label, l);
        keeper_for_label.assign(max_label + 1, -1);
        for (int cid = 0; cid < n_comps; ++cid) {
            int& keep = keeper_for_label[comp_label[cid]];
            if (keep < 0 || comp_size[cid] > comp_size[keep]) keep = cid;
        }
    }

    // Orphans take the label of the largest adjacent resolved component;
    // iterate until everything touches a keeper region.
    std::vector<uint32_t> final_label(n_comps, 0);
    std::vector<bool> resolved(n_comps, false);
    for (int cid = 0; cid < n_comps; ++cid) {
        if (keeper_for_label[comp_label[cid]] == cid) {
            final_label[cid] = comp_label[cid];
            resolved[cid] = true;
        }
    }
    bool progress = true;
    while (progress) {
        progress = false;
        for (size_t i = 0; i < plane; ++i) {
            int cid = comp[i];
            if (resolved[cid]) continue;
            int u = static_cast<int>(i / w), v = static_cast<int>(i % w);
            const int du[4] = {-1, 1, 0, 0}, dv[4] = {0, 0, -1, 1};
            size_t best_size = 0;
            uint32_t best_label = 0;
            bool found = false;
            for (int k = 0; k < 4; ++k) {
                int nu = u + du[k], nv = v + dv[k];
                if (nu < 0 || nu >= h || nv < 0 || nv >= w) continue;
                int ncid = comp[static_cast<size_t>(nu) * w + nv];
                if (ncid == cid || !resolved[ncid]) continue;
                int keep = keeper_for_label[final_label[ncid]];
                size_t sz = keep >= 0 ? comp_size[keep] : 0;
                if (!found || sz > best_size) {
                    best_size = sz;
                    best_label = final_label[ncid];
                    found = true;
                }
            }
            if (found) {
                final_label[cid] = best_label;
                resolved[cid] = true;
                progress = true;
            }
        }
    }
    for (size_t i = 0; i < plane; ++i) labels[i] = final_label[comp[i]];
    return labels;
}

std::vector<uint32_t> relabel_contiguous(std::vector<uint32_t> labels, int* n_out) {
    uint32_t max_label = 0;
    for (uint32_t l : labels) max_label = std::max(max_label, l);
    std::vector<int> remap(max_label + 1, -1);
    int next = 0;
    for (auto& l : labels) {
        if (remap[l] < 0) remap[l] = next++;
        l = static_cast<uint32_t>(remap[l]);
    }
    if (n_out) *n_out = next;
    return labels;
}

}  // namespace

std::vector<uint32_t> slic_segment(const ImageRaster& image,
                                   const SlicConfig& cfg, int* n_out) {
    const int h = image.h, w = image.w;
    cfg.validate(h, w);
    const size_t plane = static_cast<size_t>(h) * w;

    std::vector<double> lab(3 * plane);
    for (size_t i = 0; i < plane; ++i) {
        double L, A, B;
        rgb_to_lab(image.data[i], image.data[plane + i], image.data[2 * plane + i],
                   L, A, B);
        lab[i] = L;
        lab[plane + i] = A;
        lab[2 * plane + i] = B;
    }

    const double S = std::sqrt(static_cast<double>(h) * w / cfg.n_segments);
    std::vector<Center> centers;
    for (double r = S / 2; r < h; r += S)
        for (double c = S / 2; c < w; c += S) {
            int ri = std::min(h - 1, static_cast<int>(r));
            int ci = std::min(w - 1, static_cast<int>(c));
            // perturb to the lowest-gradient pixel in a 3x3 neighborhood
            double best_grad = std::numeric_limits<double>::max();
            int br = ri, bc = ci;
            for (int dr = -1; dr <= 1; ++dr)
                for (int dc = -1; dc <= 1; ++dc) {
                    int u = ri + dr, v = ci + dc;
                    if (u < 1 || u >= h - 1 || v < 1 || v >= w - 1) continue;
                    size_t i = static_cast<size_t>(u) * w + v;
                    double gx = lab[i + 1] - lab[i - 1];
                    double gy = lab[i + w] - lab[i - w];
                    double g = gx * gx + gy * gy;
                    if (g < best_grad) {
                        best_grad = g;
                        br = u;
                        bc = v;
                    }
                }
            size_t i = static_cast<size_t>(br) * w + bc;
            centers.push_back({lab[i], lab[plane + i], lab[2 * plane + i],
                               static_cast<double>(br), static_cast<double>(bc)});
        }
    if (centers.empty()) {
        size_t i = plane / 2;
        centers.push_back({lab[i], lab[plane + i], lab[2 * plane + i],
                           (h - 1) / 2.0, (w - 1) / 2.0});
    }

    const int K = static_cast<int>(centers.size());
    const double spatial_w = (cfg.compactness / S) * (cfg.compactness / S);
    std::vector<uint32_t> labels(plane, 0);
    std::vector<double> best_d(plane);

    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        std::fill(best_d.begin(), best_d.end(),
                  std::numeric_limits<double>::max());
        for (int k = 0; k < K; ++k) {
            const Center& ct = centers[k];
            int r0 = std::max(0, static_cast<int>(ct.r - 2 * S));
            int r1 = std::min(h - 1, static_cast<int>(ct.r + 2 * S));
            int c0 = std::max(0, static_cast<int>(ct.c - 2 * S));
            int c1 = std::min(w - 1, static_cast<int>(ct.c + 2 * S));
            for (int u = r0; u <= r1; ++u)
                for (int v = c0; v <= c1; ++v) {
                    size_t i = static_cast<size_t>(u) * w + v;
                    double dl = lab[i] - ct.l, da = lab[plane + i] - ct.a,
                           db = lab[2 * plane + i] - ct.b;
                    double dr = u - ct.r, dc = v - ct.c;
                    double d = dl * dl + da * da + db * db +
                               spatial_w * (dr * dr + dc * dc);
                    if (d < best_d[i]) {
                        best_d[i] = d;
                        labels[i] = static_cast<uint32_t>(k);
                    }
                }
        }
        // update step
        std::vector<std::array<double, 6>> acc(K, {0, 0, 0, 0, 0, 0});
        for (size_t i = 0; i < plane; ++i) {
            auto& a = acc[labels[i]];
            a[0] += lab[i];
            a[1] += lab[plane + i];
            a[2] += lab[2 * plane + i];
            a[3] += static_cast<double>(i / w);
            a[4] += static_cast<double>(i % w);
            a[5] += 1;
        }
        for (int k = 0; k < K; ++k)
            if (acc[k][5] > 0)
                centers[k] = {acc[k][0] / acc[k][5], acc[k][1] / acc[k][5],
                              acc[k][2] / acc[k][5], acc[k][3] / acc[k][5],
                              acc[k][4] / acc[k][5]};
    }

    if (cfg.enforce_connectivity)
        labels = enforce_connectivity_pass(std::move(labels), h, w);
    return relabel_contiguous(std::move(labels), n_out);
}

std::vector<uint32_t> pixels_as_nodes(int h, int w, int* n_out) {
    std::vector<uint32_t> out(static_cast<size_t>(h) * w);
    for (size_t i = 0; i < out.size(); ++i) out[i] = static_cast<uint32_t>(i);
    if (n_out) *n_out = h * w;
    return out;
}

SuperpixelPartition summarize_segments(const std::vector<uint32_t>& assignment,
                                       int h, int w, const FeatureMap& feats,
                                       const ScoreMap& scores) {
    const size_t plane = static_cast<size_t>(h) * w;
    if (assignment.size() != plane || feats.h != h || feats.w != w ||
        scores.h != h || scores.w != w)
        throw ValidationError("summarize_segments dims disagree");

    uint32_t max_id = 0;
    for (uint32_t id : assignment) max_id = std::max(max_id, id);
    const int n = static_cast<int>(max_id) + 1;
    const int D = feats.d, C = scores.classes;

    SuperpixelPartition part;
    part.h = h;
    part.w = w;
    part.n = n;
    part.assignment = assignment;
    part.sizes.assign(n, 0);
    part.centroids.assign(n, {0.0, 0.0});
    part.mean_embeddings.assign(n, std::vector<float>(D, 0.0f));
    part.zero_embedding.assign(n, false);
    part.mean_scores.assign(n, std::vector<double>(C, 0.0));

    std::vector<std::vector<double>> emb_acc(n, std::vector<double>(D, 0.0));
    for (size_t i = 0; i < plane; ++i) {
        uint32_t id = assignment[i];
        part.sizes[id]++;
        part.centroids[id][0] += static_cast<double>(i / w);
        part.centroids[id][1] += static_cast<double>(i % w);
        for (int d = 0; d < D; ++d) emb_acc[id][d] += feats.data[plane * d + i];
        for (int c = 0; c < C; ++c)
            part.mean_scores[id][c] += scores.data[plane * c + i];
    }
    for (int s = 0; s < n; ++s) {
        if (part.sizes[s] == 0)
            throw ValidationError("segment " + std::to_string(s) + " is empty");
        double inv = 1.0 / part.sizes[s];
        part.centroids[s][0] *= inv;
        part.centroids[s][1] *= inv;
        for (int c = 0; c < C; ++c) part.mean_scores[s][c] *= inv;
        double norm = 0;
        for (int d = 0; d < D; ++d) {
            emb_acc[s][d] *= inv;
            norm += emb_acc[s][d] * emb_acc[s][d];
        }
        norm = std::sqrt(norm);
        if (norm < 1e-12) {
            part.zero_embedding[s] = true;
        } else {
            for (int d = 0; d < D; ++d)
                part.mean_embeddings[s][d] =
                    static_cast<float>(emb_acc[s][d] / norm);
        }
    }
    return part;
}

}  // namespace mapsr
