#include <doctest.h>

#include <regex>
#include <sstream>

#include "fixtures.hpp"
#include "rtt/error.hpp"
#include "rtt/report.hpp"
#include "rtt/svg.hpp"

using namespace rtt;

namespace {

std::size_t count(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
    return n;
}

RttLibrary three_runs() {
    return RttLibrary{fixtures::gc_catalog(),
                      {Rtt{fixtures::kChrom1, Provenance::measured("chrom1")},
                       Rtt{fixtures::kChrom8, Provenance::measured("chrom8")},
                       Rtt{fixtures::kChrom9, Provenance::measured("chrom9")}}};
}

}  // namespace

TEST_CASE("match report lists ranked entries with per-peak labels") {
    const auto lib = three_runs();
    const auto t7 = fixtures::test7();
    const auto r = match(t7.sample, lib, MatchConfig{});
    const auto doc = match_report(r, t7.sample, lib);
    REQUIRE(doc.at("ranked").size() == r.ranked.size());
    const auto& top = doc.at("ranked").at(0);
    CHECK(top.at("rank") == 1);
    CHECK(top.at("msr") == 0.0);
    CHECK(top.at("provenance") == "chrom8");
    REQUIRE(top.at("peaks").size() == 6);
    CHECK(top.at("peaks").at(3).at("label") == "INTERFERENT");
    CHECK(top.at("peaks").at(3).at("residual").is_null());
    CHECK(top.at("peaks").at(0).at("label") == "cis-1,3-Dichloropropene");

    std::ostringstream text;
    write_match_text(text, r, t7.sample, lib);
    const auto s = text.str();
    CHECK(s.find("Rank 1") != std::string::npos);
    CHECK(s.find("340") != std::string::npos);
}

TEST_CASE("eval report is stable without timing") {
    const auto lib = three_runs();
    const auto rep = evaluate(lib, {fixtures::test5(), fixtures::test7()}, MatchConfig{});
    const auto a = eval_report(rep).dump();
    const auto b = eval_report(evaluate(lib, {fixtures::test5(), fixtures::test7()}, MatchConfig{})).dump();
    CHECK(a == b);
    CHECK(a.find("seconds") == std::string::npos);
    CHECK(eval_report(rep, true).dump().find("seconds") != std::string::npos);
    std::ostringstream text;
    write_eval_text(text, rep);
    CHECK(text.str().find("top-1") != std::string::npos);
}

TEST_CASE("rtt diagram draws one polyline per trajectory") {
    const auto base = three_runs();
    const auto rich = enrich(base).library;
    const auto spec = rtt_diagram(rich, 0);
    CHECK(spec.series.size() == rich.n_lib());
    const auto svg = render_svg(spec);
    CHECK(count(svg, "<polyline") == rich.n_lib());
    CHECK(count(svg, "class=\"series hybrid\"") == rich.n_lib() - base.n_lib());
    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(count(svg, "<circle") >= 22 * base.n_lib());

    // The reference against itself is the unit diagonal.
    const auto& self = spec.series[0];
    for (std::size_t i = 0; i < self.x.size(); ++i) CHECK(self.x[i] == self.y[i]);
    CHECK_THROWS_AS(rtt_diagram(rich, 99), ValidationError);
}

TEST_CASE("delta-rt of the reference is flat zero") {
    const auto lib = three_runs();
    const auto spec = delta_rt_plot(lib, 0);
    REQUIRE(spec.series.size() == 3);
    for (double y : spec.series[0].y) CHECK(y == 0.0);
    CHECK(spec.series[1].y[6] == doctest::Approx(87.9 - 86.2));
    CHECK(count(render_svg(spec), "<polyline") == 3);
}

TEST_CASE("chromatogram plot and escaping") {
    Chromatogram c{0.0, 1.0, {0.0, 1.0, 4.0, 1.0, 0.0}};
    auto spec = chromatogram_plot({{"a<b & c", c}, {"second", c}});
    const auto svg = render_svg(spec);
    CHECK(count(svg, "<polyline") == 2);
    CHECK(svg.find("a&lt;b &amp; c") != std::string::npos);
    CHECK(svg.find("a<b") == std::string::npos);
}
