#include "mapsr/eval.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace mapsr {

uint64_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), uint64_t{0});
}

void accumulate_confusion(const LabelMap& pred, const LabelMap& truth,
                          ConfusionMatrix& cm) {
    if (pred.h != truth.h || pred.w != truth.w)
        throw ValidationError("pred/truth dims disagree");
    if (cm.classes == 0) cm = ConfusionMatrix(truth.classes);
    for (size_t i = 0; i < truth.data.size(); ++i) {
        uint8_t t = truth.data[i];
        if (t == LabelMap::kNoData) {
            cm.ignored++;
            continue;
        }
        uint8_t p = pred.data[i];
        if (t >= cm.classes || p >= cm.classes)
            throw ValidationError("class index exceeds confusion matrix size");
        cm.at(t, p)++;
    }
}

IouResult miou(const ConfusionMatrix& cm, bool absent_as_zero) {
    const int C = cm.classes;
    IouResult res;
    res.per_class.assign(C, std::numeric_limits<double>::quiet_NaN());
    res.included.assign(C, false);
    double sum = 0;
    int n_included = 0;
    for (int c = 0; c < C; ++c) {
        uint64_t tp = cm.at(c, c);
        uint64_t fp = 0, fn = 0;
        for (int o = 0; o < C; ++o) {
            if (o == c) continue;
            fp += cm.at(o, c);
            fn += cm.at(c, o);
        }
        uint64_t uni = tp + fp + fn;
        if (uni == 0) {
            if (absent_as_zero) {
                res.per_class[c] = 0.0;
                res.included[c] = true;
                n_included++;
            }
            continue;
        }
        res.per_class[c] = static_cast<double>(tp) / static_cast<double>(uni);
        res.included[c] = true;
        sum += res.per_class[c];
        n_included++;
    }
    if (n_included == 0)
        throw ValidationError("all classes have zero union");
    res.mean = sum / n_included;
    return res;
}

}  // namespace mapsr
