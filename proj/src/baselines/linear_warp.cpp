#include <algorithm>

#include "rtt/baselines.hpp"

namespace rtt {

LinearWarp::LinearWarp(const std::vector<double>& sample_stds, const std::vector<double>& ref_stds) {
    if (sample_stds.empty() || sample_stds.size() != ref_stds.size()) {
        throw ValidationError("linear warp needs the same non-zero number of sample and reference standards");
    }
    anchors_.emplace_back(0.0, 0.0);
    for (std::size_t k = 0; k < sample_stds.size(); ++k) {
        const auto& [ps, pr] = anchors_.back();
        if (!(sample_stds[k] > ps) || !(ref_stds[k] > pr)) {
            throw ValidationError("linear warp standards must be positive and strictly increasing");
        }
        anchors_.emplace_back(sample_stds[k], ref_stds[k]);
    }
}

double LinearWarp::operator()(double rt) const {
    // First segment whose right anchor is at or past rt; past the end the
    // last segment is used.
    auto it = std::lower_bound(anchors_.begin() + 1, anchors_.end(), rt,
                               [](const std::pair<double, double>& a, double v) { return a.first < v; });
    if (it == anchors_.end()) --it;
    const auto& [x1, y1] = *it;
    const auto& [x0, y0] = *(it - 1);
    if (rt == x1) return y1;
    return y0 + (rt - x0) * (y1 - y0) / (x1 - x0);
}

std::vector<double> linear_warp(const std::vector<double>& rts, const std::vector<double>& sample_stds,
                                const std::vector<double>& ref_stds) {
    const LinearWarp warp(sample_stds, ref_stds);
    std::vector<double> out;
    out.reserve(rts.size());
    for (double rt : rts) out.push_back(warp(rt));
    return out;
}

}  // namespace rtt
