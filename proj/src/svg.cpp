#include "rtt/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace rtt {

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

/// Rounds the data span out to a "nice" tick step.
double tick_step(double span) {
    if (!(span > 0.0)) return 1.0;
    const double raw = span / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (raw <= m * mag) return m * mag;
    }
    return 10.0 * mag;
}

}  // namespace

std::string render_svg(const PlotSpec& spec) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : spec.series) {
        for (double v : s.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
        for (double v : s.y) y0 = std::min(y0, v), y1 = std::max(y1, v);
    }
    if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
    if (x1 == x0) x0 -= 0.5, x1 += 0.5;
    if (y1 == y0) y0 -= 0.5, y1 += 0.5;
    const double pad_y = 0.05 * (y1 - y0);
    y0 -= pad_y;
    y1 += pad_y;

    const double left = 70, right = 170, top = 40, bottom = 55;
    const double pw = spec.width - left - right, ph = spec.height - top - bottom;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

    std::ostringstream o;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
      << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << spec.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(spec.title)
      << "</text>\n";

    o << "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n"
      << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
      << "\"/>\n</g>\n<g class=\"ticks\" font-size=\"11\">\n";
    const double xs = tick_step(x1 - x0), ys = tick_step(y1 - y0);
    for (double t = std::ceil(x0 / xs) * xs; t <= x1 + 1e-9 * xs; t += xs) {
        o << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(px(t)) << "\" y2=\""
          << num(top + ph + 5) << "\" stroke=\"black\"/><text x=\"" << num(px(t)) << "\" y=\"" << num(top + ph + 18)
          << "\" text-anchor=\"middle\">" << num(t == 0.0 ? 0.0 : t) << "</text>\n";
    }
    for (double t = std::ceil(y0 / ys) * ys; t <= y1 + 1e-9 * ys; t += ys) {
        o << "<line x1=\"" << num(left - 5) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(left) << "\" y2=\""
          << num(py(t)) << "\" stroke=\"black\"/><text x=\"" << num(left - 8) << "\" y=\"" << num(py(t) + 4)
          << "\" text-anchor=\"end\">" << num(std::abs(t) < 1e-12 ? 0.0 : t) << "</text>\n";
    }
    o << "</g>\n"
      << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << spec.height - 12 << "\" text-anchor=\"middle\">"
      << escape(spec.x_label) << "</text>\n"
      << "<text transform=\"translate(16," << num(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(spec.y_label) << "</text>\n";

    for (std::size_t i = 0; i < spec.series.size(); ++i) {
        const auto& s = spec.series[i];
        const char* color = kPalette[i % (sizeof kPalette / sizeof kPalette[0])];
        o << "<g class=\"series " << escape(s.css_class) << "\">\n<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.5\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"";
        for (std::size_t k = 0; k < s.x.size(); ++k) o << (k ? " " : "") << num(px(s.x[k])) << ',' << num(py(s.y[k]));
        o << "\"/>\n";
        if (s.markers) {
            for (std::size_t k = 0; k < s.x.size(); ++k) {
                o << "<circle cx=\"" << num(px(s.x[k])) << "\" cy=\"" << num(py(s.y[k])) << "\" r=\"2.5\" fill=\""
                  << color << "\"/>\n";
            }
        }
        o << "</g>\n";
        const double ly = top + 14.0 + 16.0 * static_cast<double>(i);
        o << "<g class=\"legend\"><line x1=\"" << num(left + pw + 12) << "\" y1=\"" << num(ly - 4) << "\" x2=\""
          << num(left + pw + 32) << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << color << "\" stroke-width=\"1.5\""
          << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/><text x=\"" << num(left + pw + 36) << "\" y=\""
          << num(ly) << "\">" << escape(s.label) << "</text></g>\n";
    }
    o << "</svg>\n";
    return o.str();
}

namespace {

PlotSpec trajectory_plot(const RttLibrary& lib, std::size_t reference, bool delta) {
    if (reference >= lib.n_lib()) {
        throw ValidationError("reference trajectory #" + std::to_string(reference) + " is not in the library");
    }
    const auto& ref = lib.trajectories[reference].rts;
    PlotSpec spec;
    spec.title = delta ? "Retention time deviation" : "Retention time trajectories";
    spec.x_label = "Reference retention time (s)";
    spec.y_label = delta ? "Delta RT (s)" : "Retention time (s)";
    for (std::size_t i = 0; i < lib.n_lib(); ++i) {
        const auto& t = lib.trajectories[i];
        PlotSeries s;
        s.label = "#" + std::to_string(i) + " " + t.provenance.describe();
        s.markers = true;
        s.dashed = !t.provenance.is_measured();
        s.css_class = t.provenance.is_measured() ? "measured" : "hybrid";
        s.x = ref;
        for (std::size_t k = 0; k < ref.size(); ++k) s.y.push_back(delta ? t.rts[k] - ref[k] : t.rts[k]);
        spec.series.push_back(std::move(s));
    }
    return spec;
}

}  // namespace

PlotSpec rtt_diagram(const RttLibrary& lib, std::size_t reference) { return trajectory_plot(lib, reference, false); }

PlotSpec delta_rt_plot(const RttLibrary& lib, std::size_t reference) { return trajectory_plot(lib, reference, true); }

PlotSpec chromatogram_plot(const std::vector<std::pair<std::string, Chromatogram>>& traces) {
    PlotSpec spec;
    spec.title = "Chromatogram";
    spec.x_label = "Retention time (s)";
    spec.y_label = "Signal";
    for (const auto& [name, c] : traces) {
        PlotSeries s;
        s.label = name;
        s.css_class = "trace";
        for (std::size_t i = 0; i < c.size(); ++i) {
            s.x.push_back(c.time(i));
            s.y.push_back(c.signal[i]);
        }
        spec.series.push_back(std::move(s));
    }
    return spec;
}

}  // namespace rtt
