#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "oracle.hpp"
#include "rtt/matcher.hpp"
#include "rtt/preprocess.hpp"

using namespace rtt;

namespace {

Chromatogram trace(double t0, double dt, std::size_t n, const std::function<double(double)>& f) {
    Chromatogram c{t0, dt, std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) c.signal[i] = f(c.time(i));
    return c;
}

double gauss(double t, double mu, double sigma, double h) { return h * std::exp(-0.5 * (t - mu) * (t - mu) / (sigma * sigma)); }

double rms(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s / double(v.size()));
}

double stddev(const std::vector<double>& v) {
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / double(v.size() - 1));
}

std::size_t argmax(const Chromatogram& c) {
    return static_cast<std::size_t>(std::max_element(c.signal.begin(), c.signal.end()) - c.signal.begin());
}

}  // namespace

TEST_CASE("chromatogram csv round trip and validation") {
    const auto c = trace(1.0, 0.5, 40, [](double t) { return std::sin(t); });
    std::ostringstream out;
    write_chromatogram(out, c);
    std::istringstream in(out.str());
    const auto back = parse_chromatogram(in);
    REQUIRE(back.size() == c.size());
    CHECK(back.dt == doctest::Approx(0.5));
    CHECK(back.t0 == doctest::Approx(1.0));
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(back.signal[i] == doctest::Approx(c.signal[i]).epsilon(1e-9));

    std::istringstream ragged("t,signal\n0,1\n1,2\n2.5,3\n");
    CHECK_THROWS_AS(parse_chromatogram(ragged), InputError);
    CHECK_THROWS_AS((Chromatogram{0.0, 1.0, {1.0}}).validate(), ValidationError);
    CHECK_THROWS_AS((Chromatogram{0.0, 0.0, {1.0, 2.0}}).validate(), ValidationError);
}

TEST_CASE("baseline of a constant signal is the signal") {
    for (double c : {0.0, 3.0, -250.0}) {
        const auto chrom = trace(0.0, 1.0, 300, [c](double) { return c; });
        const auto r = baseline_correct(chrom);
        for (double v : r.corrected.signal) CHECK(std::abs(v) < 1e-6 * std::abs(c) + 1e-9);
    }
}

TEST_CASE("baseline removes a ramp under a peak") {
    const auto chrom = trace(0.0, 0.5, 1200, [](double t) { return 5.0 + 0.02 * t + gauss(t, 300.0, 4.0, 100.0); });
    const auto r = baseline_correct(chrom, 1e5, 30);
    const auto apex = argmax(r.corrected);
    CHECK(r.corrected.signal[apex] == doctest::Approx(100.0).epsilon(0.02));
    // Peak-free regions sit near zero.
    double far = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < chrom.size(); ++i) {
        if (std::abs(chrom.time(i) - 300.0) > 40.0) {
            far += r.corrected.signal[i];
            ++n;
        }
    }
    CHECK(std::abs(far / double(n)) < 0.5);
}

TEST_CASE("baseline correction is nearly idempotent") {
    const auto chrom = trace(0.0, 0.5, 1000, [](double t) {
        return 2.0 + 0.01 * t + gauss(t, 150.0, 3.0, 40.0) + gauss(t, 350.0, 5.0, 60.0);
    });
    const auto once = baseline_correct(chrom).corrected;
    const auto twice = baseline_correct(once).corrected;
    std::vector<double> diff(once.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = twice.signal[i] - once.signal[i];
    CHECK(rms(diff) < 0.01 * rms(once.signal));
}

TEST_CASE("smoothing reproduces low-order polynomials") {
    const auto quad = trace(0.0, 0.1, 400, [](double t) { return 1.0 + 0.5 * t - 0.03 * t * t; });
    const auto s = smooth(quad, 0.1);
    for (std::size_t i = 0; i < quad.size(); ++i)
        CHECK(s.signal[i] == doctest::Approx(quad.signal[i]).epsilon(1e-6).scale(1.0));

    const auto line = trace(0.0, 1.0, 50, [](double t) { return 3.0 - 2.0 * t; });
    const auto whole = smooth(line, 1.0, SmoothOptions{1, 0});
    for (std::size_t i = 0; i < line.size(); ++i) CHECK(whole.signal[i] == doctest::Approx(line.signal[i]));
}

TEST_CASE("smoothing halves white noise") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> n(0.0, 1.0);
    auto flat = trace(0.0, 1.0, 2000, [&](double) { return 10.0 + n(rng); });
    const auto s = smooth(flat, 0.05);
    CHECK(stddev(s.signal) < 0.5 * stddev(flat.signal));
}

TEST_CASE("smoothing rejects a span below three points") {
    const auto c = trace(0.0, 1.0, 100, [](double t) { return t; });
    CHECK_THROWS_AS(smooth(c, 0.01), ValidationError);
    CHECK_THROWS_AS(smooth(c, 0.0), ValidationError);
    CHECK_THROWS_AS(smooth(c, 1.5), ValidationError);
}

TEST_CASE("noise estimate tracks gaussian sigma") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 0.3);
    const auto c = trace(0.0, 1.0, 5000, [&](double) { return n(rng); });
    CHECK(estimate_noise(c) == doctest::Approx(0.3).epsilon(0.1));
}

TEST_CASE("peak detection on simple traces") {
    CHECK(detect_peaks(trace(0.0, 0.5, 200, [](double) { return 1.0; })).empty());

    const auto two = trace(0.0, 0.5, 600, [](double t) { return gauss(t, 100.0, 3.0, 1.0) + gauss(t, 200.0, 3.0, 1.0); });
    const auto peaks = detect_peaks(two);
    REQUIRE(peaks.size() == 2);
    CHECK(std::abs(peaks[0].apex_rt - 100.0) <= 0.25);
    CHECK(std::abs(peaks[1].apex_rt - 200.0) <= 0.25);
    CHECK(peaks[0].left < peaks[0].apex);
    CHECK(peaks[0].right > peaks[0].apex);

    const EmgPeak emg{10.0, 50.0, 1.0, 2.0};
    const auto single = trace(0.0, 0.1, 1500, [&](double t) { return emg(t); });
    const auto one = detect_peaks(single);
    REQUIRE(one.size() == 1);
    CHECK(std::abs(one[0].apex_rt - oracle::emg_mode_grid(emg)) <= 0.25);
    CHECK(std::abs(emg.mode() - oracle::emg_mode_grid(emg)) <= 1e-3);
}

TEST_CASE("minimum separation keeps the taller peak") {
    const auto c = trace(0.0, 0.5, 400, [](double t) { return gauss(t, 90.0, 1.5, 1.0) + gauss(t, 100.0, 1.5, 2.0); });
    CHECK(detect_peaks(c, 3.0, 0.0).size() == 2);
    const auto kept = detect_peaks(c, 3.0, 15.0);
    REQUIRE(kept.size() == 1);
    CHECK(std::abs(kept[0].apex_rt - 100.0) <= 0.25);
}

TEST_CASE("emg density integrates to its area and has a stable tail") {
    const EmgPeak p{7.0, 100.0, 2.0, 5.0};
    const auto c = trace(0.0, 0.05, 8000, [&](double t) { return p(t); });
    CHECK(oracle::trapezoid(c) == doctest::Approx(7.0).epsilon(1e-6));
    const EmgPeak narrow{1.0, 10.0, 0.05, 10.0};
    for (double t = -50.0; t < 200.0; t += 0.5) {
        CHECK(std::isfinite(narrow(t)));
        CHECK(narrow(t) >= 0.0);
    }
    const EmgPeak sharp{1.0, 10.0, 3.0, 1e-4};
    CHECK(std::isfinite(sharp(10.0)));
    CHECK(sharp.mode() == doctest::Approx(10.0).epsilon(1e-3));
}

TEST_CASE("emg fit recovers generating parameters") {
    for (const EmgPeak truth : {EmgPeak{50.0, 120.0, 2.0, 3.0}, EmgPeak{8.0, 60.0, 1.0, 0.8}, EmgPeak{30.0, 200.0, 3.0, 6.0}}) {
        const auto c = trace(0.0, 0.2, 2000, [&](double t) { return truth(t); });
        const auto peaks = detect_peaks(c);
        REQUIRE(peaks.size() == 1);
        const auto fit = fit_emg(c, peaks[0]);
        CHECK(fit.peak.area == doctest::Approx(truth.area).epsilon(0.01));
        CHECK(fit.peak.mu == doctest::Approx(truth.mu).epsilon(0.01));
        CHECK(fit.peak.sigma == doctest::Approx(truth.sigma).epsilon(0.01));
        CHECK(fit.peak.tau == doctest::Approx(truth.tau).epsilon(0.01));
        CHECK(std::abs(fit.peak.mode() - peaks[0].apex_rt) <= c.dt);
    }
}

TEST_CASE("emg fit of a gaussian gives a short tail") {
    const auto c = trace(0.0, 0.2, 1000, [](double t) { return gauss(t, 100.0, 2.0, 5.0); });
    const auto peaks = detect_peaks(c);
    REQUIRE(peaks.size() == 1);
    const auto fit = fit_emg(c, peaks[0]);
    CHECK(fit.peak.tau < 0.25 * fit.peak.sigma);
    CHECK(std::abs(fit.peak.mode() - 100.0) <= c.dt);
}

TEST_CASE("emg fit of an empty region fails") {
    const auto c = trace(0.0, 1.0, 100, [](double) { return 0.0; });
    DetectedPeak p{50.0, 0.0, 50, 40, 60};
    CHECK_THROWS_AS(fit_emg(c, p), FitError);
}

TEST_CASE("reconstruction basics") {
    const Grid g{0.0, 0.1, 3000};
    const auto zero = reconstruct({}, g);
    REQUIRE(zero.size() == 3000);
    CHECK(std::all_of(zero.signal.begin(), zero.signal.end(), [](double v) { return v == 0.0; }));

    const EmgPeak a{10.0, 80.0, 1.5, 2.5}, b{4.0, 200.0, 2.0, 1.0};
    const auto ra = reconstruct({a}, g);
    CHECK(std::abs(ra.time(argmax(ra)) - oracle::emg_mode_grid(a)) <= g.dt);
    const auto rb = reconstruct({b}, g);
    const auto rab = reconstruct({a, b}, g);
    for (std::size_t i = 0; i < g.n; ++i) CHECK(rab.signal[i] == doctest::Approx(ra.signal[i] + rb.signal[i]));
}

TEST_CASE("well separated peaks survive a reconstruct-detect round trip") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> sig(0.5, 2.0), tau(0.2, 3.0), area(5.0, 50.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<EmgPeak> peaks;
        double t = 30.0;
        for (int k = 0; k < 5; ++k) {
            EmgPeak p{area(rng), t, sig(rng), tau(rng)};
            peaks.push_back(p);
            t += 6.0 * (p.sigma + p.tau) + 20.0 + 10.0 * k;
        }
        const Grid g{0.0, 0.2, static_cast<std::size_t>((t + 50.0) / 0.2)};
        const auto c = reconstruct(peaks, g);
        const auto found = detect_peaks(c);
        REQUIRE(found.size() == peaks.size());
        for (std::size_t k = 0; k < peaks.size(); ++k) {
            CHECK(std::abs(found[k].apex_rt - oracle::emg_mode_grid(peaks[k])) <= g.dt);
            const auto fit = fit_emg(c, found[k]);
            CHECK(fit.peak.area == doctest::Approx(peaks[k].area).epsilon(0.01));
        }
    }
}

TEST_CASE("alignment moves identified peaks onto reference rts") {
    const auto catalog = fixtures::synthetic_catalog(4, 1);
    // ids 0 1 [2 std] 3 4
    const Rtt ref{{40, 80, 120, 160, 200}, Provenance::measured("ref")};
    const Rtt drifted{{45, 85, 125, 165, 205}, Provenance::measured("drift")};
    RttLibrary lib{catalog, {ref}};
    std::vector<EmgPeak> peaks;
    for (double rt : drifted.rts) peaks.push_back({20.0, rt, 1.2, 1.0});
    // Shift mu so the apex sits on the drifted rt.
    for (auto& p : peaks) p.mu += p.mu - p.mode();
    const Grid g{0.0, 0.1, 2600};
    const auto chrom = reconstruct(peaks, g);

    const SamplePeaks s{{{2, 125.0}}, {45, 85, 165, 205}};
    MatchConfig cfg;
    cfg.delta_t = 10.0;
    const auto r = match(s, lib, cfg);
    REQUIRE_FALSE(r.empty());
    const auto aligned = align_chromatogram(chrom, s, r, ref, g);
    const auto found = detect_peaks(aligned);
    REQUIRE(found.size() == 5);
    for (std::size_t k = 0; k < 5; ++k) CHECK(std::abs(found[k].apex_rt - ref.rts[k]) <= g.dt);
    CHECK(oracle::trapezoid(aligned) == doctest::Approx(oracle::trapezoid(chrom)).epsilon(0.01));
}

TEST_CASE("self alignment leaves apexes in place") {
    const auto catalog = fixtures::synthetic_catalog(3, 0);
    const Rtt ref{{50, 100, 150}, Provenance::measured("ref")};
    RttLibrary lib{catalog, {ref}};
    std::vector<EmgPeak> peaks;
    for (double rt : ref.rts) {
        EmgPeak p{10.0, rt, 1.0, 1.5};
        p.mu += rt - p.mode();
        peaks.push_back(p);
    }
    const Grid g{0.0, 0.1, 2000};
    const auto chrom = reconstruct(peaks, g);
    MatchConfig cfg;
    cfg.require_standards = false;
    const SamplePeaks s{{}, {50, 100, 150}};
    const auto r = match(s, lib, cfg);
    const auto aligned = align_chromatogram(chrom, s, r, ref, g);
    const auto before = detect_peaks(chrom), after = detect_peaks(aligned);
    REQUIRE(after.size() == before.size());
    for (std::size_t k = 0; k < after.size(); ++k) CHECK(std::abs(after[k].apex_rt - before[k].apex_rt) <= g.dt);
}

TEST_CASE("subset alignment keeps only the subset's peaks") {
    const auto catalog = fixtures::gc_catalog();
    const auto t5 = fixtures::test5();
    const Rtt ref{fixtures::kChrom1, Provenance::measured("chrom1")};
    RttLibrary lib{catalog, {ref, Rtt{fixtures::kChrom8, Provenance::measured("chrom8")}}};
    std::vector<EmgPeak> peaks;
    std::vector<double> rts(t5.sample.unknowns);
    for (const auto& [id, rt] : t5.sample.standards) rts.push_back(rt);
    std::sort(rts.begin(), rts.end());
    for (double rt : rts) {
        EmgPeak p{15.0, rt, 1.0, 1.0};
        p.mu += rt - p.mode();
        peaks.push_back(p);
    }
    const Grid g{0.0, 0.1, 6000};
    const auto chrom = reconstruct(peaks, g);
    const auto r = match(t5.sample, lib, MatchConfig{});
    const auto aligned = align_chromatogram(chrom, t5.sample, r, ref, g);
    const auto found = detect_peaks(aligned);
    REQUIRE(found.size() == 7);
    std::vector<double> expect;
    for (auto id : t5.truth) expect.push_back(ref.rt(id));
    expect.push_back(ref.rt(15));
    expect.push_back(ref.rt(20));
    std::sort(expect.begin(), expect.end());
    for (std::size_t k = 0; k < 7; ++k) CHECK(std::abs(found[k].apex_rt - expect[k]) <= g.dt);
}
