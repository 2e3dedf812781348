#include "mapsr/upsample.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace mapsr {

void UpsampleConfig::validate() const {
    if (window_radius < 0) throw ValidationError("window_radius must be >= 0");
    if (color_bandwidth <= 0 || spatial_bandwidth <= 0)
        throw ValidationError("bandwidths must be > 0");
}

UpsampleMode parse_upsample_mode(const std::string& s) {
    if (s == "attention") return UpsampleMode::attention;
    if (s == "bilinear") return UpsampleMode::bilinear;
    if (s == "nearest") return UpsampleMode::nearest;
    throw ValidationError("unknown upsample mode: " + s);
}

std::string to_string(UpsampleMode m) {
    switch (m) {
        case UpsampleMode::attention: return "attention";
        case UpsampleMode::bilinear: return "bilinear";
        default: return "nearest";
    }
}

FeatureMap block_mean_colors(const ImageRaster& image, int p) {
    if (p < 1 || image.h % p != 0 || image.w % p != 0)
        throw ValidationError("block size must divide image dims");
    int hp = image.h / p, wp = image.w / p;
    FeatureMap out(3, hp, wp);
    double inv = 1.0 / (p * p);
    for (int c = 0; c < 3; ++c)
        for (int bu = 0; bu < hp; ++bu)
            for (int bv = 0; bv < wp; ++bv) {
                double sum = 0;
                for (int du = 0; du < p; ++du)
                    for (int dv = 0; dv < p; ++dv)
                        sum += image.at(c, bu * p + du, bv * p + dv);
                out.at(c, bu, bv) = static_cast<float>(sum * inv);
            }
    return out;
}

namespace {

FeatureMap upsample_nearest(const FeatureMap& f_lr, int p, int H, int W) {
    FeatureMap out(f_lr.d, H, W);
    for (int d = 0; d < f_lr.d; ++d)
        for (int u = 0; u < H; ++u)
            for (int v = 0; v < W; ++v)
                out.at(d, u, v) = f_lr.at(d, u / p, v / p);
    return out;
}

FeatureMap upsample_bilinear(const FeatureMap& f_lr, int p, int H, int W) {
    FeatureMap out(f_lr.d, H, W);
    for (int u = 0; u < H; ++u) {
        double fu = (u - (p - 1) * 0.5) / p;  // cell-center alignment
        fu = std::min(std::max(fu, 0.0), static_cast<double>(f_lr.h - 1));
        int i0 = static_cast<int>(fu);
        int i1 = std::min(i0 + 1, f_lr.h - 1);
        double wu = fu - i0;
        for (int v = 0; v < W; ++v) {
            double fv = (v - (p - 1) * 0.5) / p;
            fv = std::min(std::max(fv, 0.0), static_cast<double>(f_lr.w - 1));
            int j0 = static_cast<int>(fv);
            int j1 = std::min(j0 + 1, f_lr.w - 1);
            double wv = fv - j0;
            for (int d = 0; d < f_lr.d; ++d) {
                double top = (1 - wv) * f_lr.at(d, i0, j0) + wv * f_lr.at(d, i0, j1);
                double bot = (1 - wv) * f_lr.at(d, i1, j0) + wv * f_lr.at(d, i1, j1);
                out.at(d, u, v) = static_cast<float>((1 - wu) * top + wu * bot);
            }
        }
    }
    return out;
}

FeatureMap upsample_attention(const FeatureMap& f_lr, const ImageRaster& image,
                              const UpsampleConfig& cfg, int p) {
    const int H = image.h, W = image.w;
    const int hp = f_lr.h, wp = f_lr.w;
    FeatureMap keys = block_mean_colors(image, p);
    FeatureMap out(f_lr.d, H, W);

    const int r = cfg.window_radius;
    const double inv_tc = 1.0 / cfg.color_bandwidth;
    const double inv_ts = 1.0 / (cfg.spatial_bandwidth * p * p);
    std::vector<double> logits((2 * r + 1) * (2 * r + 1));
    std::vector<double> acc(f_lr.d);

    for (int u = 0; u < H; ++u) {
        int i0 = u / p;
        int ia = std::max(0, i0 - r), ib = std::min(hp - 1, i0 + r);
        for (int v = 0; v < W; ++v) {
            int j0 = v / p;
            int ja = std::max(0, j0 - r), jb = std::min(wp - 1, j0 + r);

            double q0 = image.at(0, u, v), q1 = image.at(1, u, v),
                   q2 = image.at(2, u, v);
            double max_logit = -1e300;
            int n = 0;
            for (int i = ia; i <= ib; ++i) {
                double cu = i * p + (p - 1) * 0.5;
                for (int j = ja; j <= jb; ++j) {
                    double cv = j * p + (p - 1) * 0.5;
                    double d0 = q0 - keys.at(0, i, j), d1 = q1 - keys.at(1, i, j),
                           d2 = q2 - keys.at(2, i, j);
                    double color = (d0 * d0 + d1 * d1 + d2 * d2) * inv_tc;
                    double du = u - cu, dv = v - cv;
                    double spatial = (du * du + dv * dv) * inv_ts;
                    double logit = -color - spatial;
                    logits[n++] = logit;
                    max_logit = std::max(max_logit, logit);
                }
            }
            std::fill(acc.begin(), acc.end(), 0.0);
            double denom = 0;
            n = 0;
            for (int i = ia; i <= ib; ++i)
                for (int j = ja; j <= jb; ++j) {
                    double a = std::exp(logits[n++] - max_logit);
                    denom += a;
                    for (int d = 0; d < f_lr.d; ++d)
                        acc[d] += a * f_lr.at(d, i, j);
                }
            for (int d = 0; d < f_lr.d; ++d)
                out.at(d, u, v) = static_cast<float>(acc[d] / denom);
        }
    }
    return out;
}

}  // namespace

FeatureMap upsample_features(const FeatureMap& f_lr, const ImageRaster& image,
                             const UpsampleConfig& cfg) {
    cfg.validate();
    if (f_lr.h < 1 || f_lr.w < 1) throw ValidationError("empty LR grid");
    if (image.h % f_lr.h != 0 || image.w % f_lr.w != 0)
        throw ValidationError("image dims not an integer multiple of LR grid");
    int p = image.h / f_lr.h;
    if (image.w / f_lr.w != p)
        throw ValidationError("non-square patch factor");
    switch (cfg.mode) {
        case UpsampleMode::nearest:
            return upsample_nearest(f_lr, p, image.h, image.w);
        case UpsampleMode::bilinear:
            return upsample_bilinear(f_lr, p, image.h, image.w);
        default:
            return upsample_attention(f_lr, image, cfg, p);
    }
}

}  // namespace mapsr
