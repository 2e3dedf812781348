#pragma once

#include <cstdint>
#include <vector>

#include "mapsr/tensorio.hpp"

namespace mapsr {

// Rows = ground truth, cols = prediction; nodata truth pixels counted in
// `ignored`.
struct ConfusionMatrix {
    int classes = 0;
    std::vector<uint64_t> counts;  // classes * classes
    uint64_t ignored = 0;

    ConfusionMatrix() = default;
    explicit ConfusionMatrix(int c)
        : classes(c), counts(static_cast<size_t>(c) * c, 0) {}

    uint64_t& at(int truth, int pred) {
        return counts[static_cast<size_t>(truth) * classes + pred];
    }
    uint64_t at(int truth, int pred) const {
        return counts[static_cast<size_t>(truth) * classes + pred];
    }
    uint64_t total() const;
};

void accumulate_confusion(const LabelMap& pred, const LabelMap& truth,
                          ConfusionMatrix& cm);

struct IouResult {
    std::vector<double> per_class;  // NaN for zero-union classes
    double mean = 0.0;
    std::vector<bool> included;
};

// IoU_c = TP / (TP + FP + FN). Zero-union classes are excluded from the
// mean by default; absent_as_zero counts them as 0 instead.
IouResult miou(const ConfusionMatrix& cm, bool absent_as_zero = false);

}  // namespace mapsr
