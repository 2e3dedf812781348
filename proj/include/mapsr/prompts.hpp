#pragma once

#include <string>
#include <vector>

#include "mapsr/tensorio.hpp"

namespace mapsr {

// How each class prompt was obtained. The first three are the regular
// outcomes; the fallback codes record which relaxation of the empty-set
// chain produced the prompt.
enum class PromptProvenance : uint8_t {
    probe_agreement = 0,
    oracle_hr = 1,
    fallback_lr_only = 2,
    fallback_probe_only = 3,
    inactive = 4,
};

struct PromptSet {
    int classes = 0;
    int feature_dim = 0;
    std::vector<std::vector<float>> prompts;  // C vectors in R^D
    std::vector<uint32_t> support_counts;     // |Omega_c|
    std::vector<PromptProvenance> provenance;

    // Inactive when support is zero or the prompt norm is below the cosine
    // division guard.
    bool active(int c) const;
};

// Omega_c = {(u,v) : probe_pred = c and lr_up = c}, nodata excluded.
// Returned as flat pixel indices (u*W + v).
std::vector<int> select_high_confidence(const LabelMap& probe_pred,
                                        const LabelMap& lr_up, int c);

// Empirical mean of features over each class's pixel set. Empty sets go
// through the fallback chain: LR label alone, then probe prediction alone,
// then inactive. The fallback label maps may be null when unavailable.
PromptSet aggregate_prompts(const FeatureMap& feats,
                            const std::vector<std::vector<int>>& omegas,
                            const LabelMap* lr_up = nullptr,
                            const LabelMap* probe_pred = nullptr);

// Prompts from HR ground truth: mean feature over {Y* = c}.
PromptSet oracle_prompts(const FeatureMap& feats, const LabelMap& y_star);

// Convenience: select + aggregate for all classes.
PromptSet build_agreement_prompts(const FeatureMap& feats,
                                  const LabelMap& probe_pred,
                                  const LabelMap& lr_up);

// "MSRP" v1: magic, u32 version, u32 C, u32 D, f32 prompts row-major,
// u32 support counts, u8 provenance codes.
void write_prompts(const PromptSet& prompts, const std::string& path);
PromptSet read_prompts(const std::string& path);

}  // namespace mapsr
