#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "rtt/error.hpp"
#include "rtt/library.hpp"
#include "rtt/preprocess.hpp"

namespace rtt {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool markers = false;   // a circle per point
    bool dashed = false;
    std::string css_class = "measured";
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<PlotSeries> series;
    int width = 800;
    int height = 520;
};

/// Standalone SVG document. Each series becomes one <polyline>; markers
/// become <circle> elements.
std::string render_svg(const PlotSpec& spec);

/// Trajectory rt against reference rt, one polyline per trajectory; hybrids
/// are dashed. Throws ValidationError for a missing reference index.
PlotSpec rtt_diagram(const RttLibrary& lib, std::size_t reference);

/// rt - reference rt against reference rt, one polyline per trajectory.
PlotSpec delta_rt_plot(const RttLibrary& lib, std::size_t reference);

PlotSpec chromatogram_plot(const std::vector<std::pair<std::string, Chromatogram>>& traces);

}  // namespace rtt
