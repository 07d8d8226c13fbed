#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "oracle.hpp"
#include "rtt/error.hpp"
#include "rtt/library.hpp"
#include "rtt/matcher.hpp"

using namespace rtt;

namespace {

PeakList run_of(const std::vector<double>& rts, const std::string& id) {
    PeakList p;
    p.source_id = id;
    for (double rt : rts) p.peaks.push_back({rt, std::nullopt, std::nullopt});
    return p;
}

RttLibrary chrom18() {
    const auto c = fixtures::gc_catalog();
    return build_library({run_of(fixtures::kChrom1, "chrom1"), run_of(fixtures::kChrom8, "chrom8")}, c);
}

bool increasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1])) return false;
    return true;
}

}  // namespace

TEST_CASE("build_library from one run keeps the published std2 rt") {
    const auto c = fixtures::gc_catalog();
    const auto lib = build_library({run_of(fixtures::kChrom1, "chrom1")}, c);
    REQUIRE(lib.n_lib() == 1);
    CHECK(lib.trajectories[0].rt(20) == 490.5);
    CHECK(lib.trajectories[0].provenance == Provenance::measured("chrom1"));
}

TEST_CASE("build_library edge cases") {
    const auto c = fixtures::gc_catalog();
    const auto empty = build_library({}, c);
    CHECK_FALSE(empty.usable());
    CHECK_THROWS_AS(match(SamplePeaks{{{15, 281.4}, {20, 494.5}}, {87.9}}, empty, MatchConfig{}), EmptyLibraryError);

    const auto dup = build_library({run_of(fixtures::kChrom1, "a"), run_of(fixtures::kChrom1, "b")}, c);
    CHECK(dup.trajectories[0].rts == dup.trajectories[1].rts);

    auto short_run = run_of(fixtures::kChrom1, "short");
    short_run.peaks.pop_back();
    try {
        build_library({short_run}, c);
        FAIL("expected failure");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("short") != std::string::npos);
    }
}

TEST_CASE("hybridize matches hand arithmetic on compound 7") {
    const auto lib = chrom18();
    const auto id = fixtures::target(7);
    CHECK(hybridize(lib, {{0, 0.5}, {1, 0.5}}).rt(id) == doctest::Approx(87.05).epsilon(1e-12));
    CHECK(hybridize(lib, {{0, 2.0}, {1, -1.0}}).rt(id) == doctest::Approx(84.5).epsilon(1e-12));
    const auto h = hybridize(lib, {{0, 0.5}, {1, 0.5}});
    CHECK(h.provenance.kind == Provenance::Kind::Hybridized);
    CHECK(h.provenance.terms.size() == 2);
}

TEST_CASE("hybridize with all weight on one trajectory is that trajectory") {
    const auto lib = chrom18();
    CHECK(hybridize(lib, {{1, 1.0}}).rts == lib.trajectories[1].rts);
    CHECK(hybridize(lib, {{0, 1.0}, {1, 0.0}}).rts == lib.trajectories[0].rts);
}

TEST_CASE("hybridize rejects bad terms") {
    const auto lib = chrom18();
    CHECK_THROWS_AS(hybridize(lib, {}), ValidationError);
    CHECK_THROWS_AS(hybridize(lib, {{0, 0.6}, {1, 0.6}}), ValidationError);
    CHECK_THROWS_AS(hybridize(lib, {{5, 1.0}}), ValidationError);
}

TEST_CASE("midpoint hybrids lie strictly between differing parents") {
    const auto c = fixtures::gc_catalog();
    const auto lib = build_library({run_of(fixtures::kChrom1, "1"), run_of(fixtures::kChrom9, "9")}, c);
    const auto h = hybridize(lib, {{0, 0.5}, {1, 0.5}});
    CHECK(increasing(h.rts));
    for (std::size_t i = 0; i < h.rts.size(); ++i) {
        const double a = lib.trajectories[0].rts[i], b = lib.trajectories[1].rts[i];
        if (a != b) {
            CHECK(h.rts[i] > std::min(a, b));
            CHECK(h.rts[i] < std::max(a, b));
        }
    }
}

TEST_CASE("enrich appends three hybrids per pair") {
    const auto c = fixtures::gc_catalog();
    const auto base = fixtures::drift_library(c, fixtures::kChrom1, 6, 11, 0.002);
    const auto res = enrich(base);
    std::size_t expected = 6;
    for (std::size_t a = 0; a < 6; ++a)
        for (std::size_t b = a + 1; b < 6; ++b) expected += 3;
    CHECK(res.library.n_lib() + res.rejected == expected);
    CHECK(expected == 51);
    CHECK(res.rejected == 0);
    for (std::size_t i = 0; i < 6; ++i) CHECK(res.library.trajectories[i] == base.trajectories[i]);
    // Pair (0,1) leads, formulas in fixed order.
    const auto& t = res.library.trajectories;
    CHECK(t[6].provenance.terms == std::vector<HybridTerm>{{0, 0.5}, {1, 0.5}});
    CHECK(t[7].provenance.terms == std::vector<HybridTerm>{{0, 2.0}, {1, -1.0}});
    CHECK(t[8].provenance.terms == std::vector<HybridTerm>{{0, -1.0}, {1, 2.0}});
    CHECK(t[9].provenance.terms == std::vector<HybridTerm>{{0, 0.5}, {2, 0.5}});
}

TEST_CASE("enrich with one trajectory changes nothing") {
    const auto c = fixtures::gc_catalog();
    const auto lib = build_library({run_of(fixtures::kChrom1, "1")}, c);
    const auto res = enrich(lib);
    CHECK(res.library == lib);
    CHECK(res.rejected == 0);
}

TEST_CASE("enrich skips extrapolating hybrids that break order") {
    const CompoundCatalog c({{0, "a", Role::Target}, {1, "b", Role::Target}, {2, "c", Role::Target}});
    RttLibrary lib{c, {{{10.0, 20.0, 30.0}, Provenance::measured("a")}, {{10.0, 11.0, 30.0}, Provenance::measured("b")}}};
    // (2,-1): 10, 29, 30 fine. (-1,2): 10, 2, 30 inverts.
    const auto res = enrich(lib);
    CHECK(res.rejected == 1);
    REQUIRE(res.library.n_lib() == 4);
    for (const auto& t : res.library.trajectories) CHECK(increasing(t.rts));
    CHECK(res.library.trajectories[2].provenance.terms[0].coefficient == 0.5);
    CHECK(res.library.trajectories[3].provenance.terms[0].coefficient == 2.0);
}

TEST_CASE("enrichment never worsens the best msr") {
    const auto c = fixtures::gc_catalog();
    const auto lib = fixtures::drift_library(c, fixtures::kChrom1, 4, 21, 0.01);
    const auto rich = enrich(lib).library;
    const auto t5 = fixtures::test5();
    MatchConfig cfg;
    cfg.screen_keep = ScreenKeep::all();
    const auto a = match(t5.sample, lib, cfg);
    const auto b = match(t5.sample, rich, cfg);
    REQUIRE_FALSE(a.empty());
    REQUIRE_FALSE(b.empty());
    CHECK(b.ranked.front().score.msr <= a.ranked.front().score.msr);
}

TEST_CASE("library json round trip") {
    const auto lib = enrich(chrom18()).library;
    const auto doc = save_library(lib);
    CHECK(doc.at("version") == kLibraryFormatVersion);
    CHECK(load_library(doc) == lib);
    CHECK(load_library(nlohmann::json::parse(doc.dump())) == lib);
}

TEST_CASE("tampered library documents fail to load") {
    auto doc = save_library(chrom18());
    auto bad = doc;
    bad["trajectories"][0]["rts"][3] = 1.0;
    CHECK_THROWS_AS(load_library(bad), ValidationError);
    auto version = doc;
    version["version"] = 99;
    CHECK_THROWS_AS(load_library(version), Error);
    auto shorter = doc;
    shorter["trajectories"][1]["rts"].erase(0);
    CHECK_THROWS_AS(load_library(shorter), Error);
}

TEST_CASE("empty trajectory list loads but is unusable") {
    const auto c = fixtures::gc_catalog();
    const RttLibrary empty{c, {}};
    const auto back = load_library(save_library(empty));
    CHECK(back.n_lib() == 0);
    CHECK_FALSE(back.usable());
}
