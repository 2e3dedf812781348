#pragma once

#include <cstdint>

#include "mapsr/prompts.hpp"
#include "mapsr/tensorio.hpp"

namespace mapsr {

// Sentinel score for inactive classes; keeps the ScoreMap dense while
// guaranteeing they never win argmax.
constexpr float kInactiveScore = -1e30f;

struct KMeansConfig {
    int k = 8;
    int max_iters = 50;
    uint64_t seed = 0;
    double tol = 1e-6;

    void validate() const;
};

// s_c(u,v) = <p_c, F(u,v)> / (|p_c| |F(u,v)|). Inactive classes get the
// sentinel; zero-norm feature pixels get 0 for all active classes.
ScoreMap cosine_scores(const FeatureMap& feats, const PromptSet& prompts);

// Per-pixel argmax; ties -> lowest class index.
LabelMap argmax_labels(const ScoreMap& scores);

// Lloyd's algorithm with k-means++ init on pixel features; each cluster
// votes with the modal upsampled-LR class of its members. Empty clusters
// are re-seeded from the farthest point. `objective_history`, when given,
// receives the within-cluster sum of squares after every iteration.
LabelMap kmeans_voting_baseline(const FeatureMap& feats, const LabelMap& lr_up,
                                const KMeansConfig& cfg,
                                std::vector<double>* objective_history = nullptr);

}  // namespace mapsr
