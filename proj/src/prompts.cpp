#include "mapsr/prompts.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace mapsr {

namespace {
constexpr double kNormGuard = 1e-12;

std::vector<float> mean_over(const FeatureMap& feats,
                             const std::vector<int>& pixels) {
    const size_t plane = static_cast<size_t>(feats.h) * feats.w;
    std::vector<double> acc(feats.d, 0.0);
    for (int idx : pixels)
        for (int d = 0; d < feats.d; ++d)
            acc[d] += feats.data[plane * d + idx];
    std::vector<float> out(feats.d);
    for (int d = 0; d < feats.d; ++d)
        out[d] = static_cast<float>(acc[d] / pixels.size());
    return out;
}

double norm(const std::vector<float>& v) {
    double s = 0;
    for (float x : v) s += static_cast<double>(x) * x;
    return std::sqrt(s);
}

std::vector<int> pixels_with_label(const LabelMap& labels, int c) {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(labels.data.size()); ++i)
        if (labels.data[i] == c) out.push_back(i);
    return out;
}

}  // namespace

bool PromptSet::active(int c) const {
    return provenance[c] != PromptProvenance::inactive &&
           support_counts[c] > 0 && norm(prompts[c]) >= kNormGuard;
}

std::vector<int> select_high_confidence(const LabelMap& probe_pred,
                                        const LabelMap& lr_up, int c) {
    if (probe_pred.h != lr_up.h || probe_pred.w != lr_up.w)
        throw ValidationError("label map dims disagree");
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(probe_pred.data.size()); ++i) {
        uint8_t p = probe_pred.data[i], l = lr_up.data[i];
        if (p == LabelMap::kNoData || l == LabelMap::kNoData) continue;
        if (p == c && l == c) out.push_back(i);
    }
    return out;
}

PromptSet aggregate_prompts(const FeatureMap& feats,
                            const std::vector<std::vector<int>>& omegas,
                            const LabelMap* lr_up, const LabelMap* probe_pred) {
    const int C = static_cast<int>(omegas.size());
    PromptSet ps;
    ps.classes = C;
    ps.feature_dim = feats.d;
    ps.prompts.assign(C, std::vector<float>(feats.d, 0.0f));
    ps.support_counts.assign(C, 0);
    ps.provenance.assign(C, PromptProvenance::inactive);

    int n_active = 0;
    for (int c = 0; c < C; ++c) {
        const std::vector<int>* pixels = &omegas[c];
        PromptProvenance prov = PromptProvenance::probe_agreement;
        std::vector<int> fallback;
        if (pixels->empty() && lr_up) {
            fallback = pixels_with_label(*lr_up, c);
            if (!fallback.empty()) {
                pixels = &fallback;
                prov = PromptProvenance::fallback_lr_only;
            }
        }
        if (pixels->empty() && probe_pred) {
            fallback = pixels_with_label(*probe_pred, c);
            if (!fallback.empty()) {
                pixels = &fallback;
                prov = PromptProvenance::fallback_probe_only;
            }
        }
        if (pixels->empty()) continue;  // stays inactive
        ps.prompts[c] = mean_over(feats, *pixels);
        ps.support_counts[c] = static_cast<uint32_t>(pixels->size());
        ps.provenance[c] = prov;
        n_active++;
    }
    if (n_active == 0)
        throw ValidationError("no class has any supervised pixels");
    return ps;
}

PromptSet oracle_prompts(const FeatureMap& feats, const LabelMap& y_star) {
    if (feats.h != y_star.h || feats.w != y_star.w)
        throw ValidationError("features/truth dims disagree");
    std::vector<std::vector<int>> omegas(y_star.classes);
    for (int i = 0; i < static_cast<int>(y_star.data.size()); ++i) {
        uint8_t c = y_star.data[i];
        if (c != LabelMap::kNoData) omegas[c].push_back(i);
    }
    PromptSet ps = aggregate_prompts(feats, omegas);
    for (int c = 0; c < ps.classes; ++c)
        if (ps.provenance[c] == PromptProvenance::probe_agreement)
            ps.provenance[c] = PromptProvenance::oracle_hr;
    return ps;
}

PromptSet build_agreement_prompts(const FeatureMap& feats,
                                  const LabelMap& probe_pred,
                                  const LabelMap& lr_up) {
    std::vector<std::vector<int>> omegas(lr_up.classes);
    for (int c = 0; c < lr_up.classes; ++c)
        omegas[c] = select_high_confidence(probe_pred, lr_up, c);
    return aggregate_prompts(feats, omegas, &lr_up, &probe_pred);
}

void write_prompts(const PromptSet& prompts, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os.write("MSRP", 4);
    auto put = [&](uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>((v >> 8) & 0xff),
                              static_cast<unsigned char>((v >> 16) & 0xff),
                              static_cast<unsigned char>((v >> 24) & 0xff)};
        os.write(reinterpret_cast<const char*>(b), 4);
    };
    put(1);
    put(static_cast<uint32_t>(prompts.classes));
    put(static_cast<uint32_t>(prompts.feature_dim));
    for (const auto& p : prompts.prompts)
        for (float v : p) {
            uint32_t bits;
            std::memcpy(&bits, &v, 4);
            put(bits);
        }
    for (uint32_t n : prompts.support_counts) put(n);
    for (auto prov : prompts.provenance) {
        char b = static_cast<char>(prov);
        os.write(&b, 1);
    }
    if (!os) throw IoError("write failed: " + path);
}

PromptSet read_prompts(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "MSRP", 4) != 0)
        throw BadMagicError(path + ": bad magic, expected MSRP");
    auto get = [&]() -> uint32_t {
        unsigned char b[4];
        is.read(reinterpret_cast<char*>(b), 4);
        if (!is) throw TruncatedFileError(path + ": truncated");
        return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
               (static_cast<uint32_t>(b[2]) << 16) |
               (static_cast<uint32_t>(b[3]) << 24);
    };
    if (get() != 1) throw BadMagicError(path + ": unsupported version");
    PromptSet ps;
    ps.classes = static_cast<int>(get());
    ps.feature_dim = static_cast<int>(get());
    if (ps.classes < 1 || ps.feature_dim < 1)
        throw ValidationError(path + ": invalid dims");
    ps.prompts.assign(ps.classes, std::vector<float>(ps.feature_dim));
    for (auto& p : ps.prompts)
        for (auto& v : p) {
            uint32_t bits = get();
            std::memcpy(&v, &bits, 4);
        }
    ps.support_counts.resize(ps.classes);
    for (auto& n : ps.support_counts) n = get();
    ps.provenance.resize(ps.classes);
    for (auto& prov : ps.provenance) {
        char b;
        is.read(&b, 1);
        if (!is) throw TruncatedFileError(path + ": truncated");
        prov = static_cast<PromptProvenance>(b);
    }
    return ps;
}

}  // namespace mapsr
