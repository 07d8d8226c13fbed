#include <cmath>

#include "rtt/baselines.hpp"

namespace rtt {

std::vector<Identification> identify_after_warp(const std::vector<double>& warped_rts,
                                                const PeakList& reference_labeled, double tol) {
    if (!(tol >= 0.0)) throw ValidationError("identification tolerance must be >= 0");
    for (const auto& p : reference_labeled.peaks) {
        if (!p.label) throw ValidationError("reference peaks must all be labeled");
    }
    std::vector<Identification> out;
    out.reserve(warped_rts.size());
    for (double rt : warped_rts) {
        Identification id{rt, kInterferent, false};
        int hits = 0;
        for (const auto& p : reference_labeled.peaks) {
            if (std::abs(p.rt - rt) <= tol) {
                ++hits;
                id.label = *p.label;
            }
        }
        if (hits > 1) {
            id.label = kInterferent;
            id.ambiguous = true;
        }
        out.push_back(id);
    }
    return out;
}

double identification_accuracy(const std::vector<Identification>& ids, const std::vector<CompoundId>& truth) {
    if (ids.size() != truth.size()) throw ValidationError("identification and truth lengths differ");
    if (ids.empty()) return 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (!ids[i].ambiguous && ids[i].label == truth[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(ids.size());
}

}  // namespace rtt
