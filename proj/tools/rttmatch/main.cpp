// rttmatch: command-line front end for retention-time trajectory matching.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rtt/baselines.hpp"
#include "rtt/error.hpp"
#include "rtt/library.hpp"
#include "rtt/matcher.hpp"
#include "rtt/peaklist.hpp"
#include "rtt/preprocess.hpp"
#include "rtt/report.hpp"
#include "rtt/svg.hpp"
#include "rtt/testgen.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

/// Where results go: a file named by --out, or stdout.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (path.empty() || path == "-") return;
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw rtt::InputError("cannot write '" + path + "'");
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

struct MatchFlags {
    std::string lib;
    std::string sample;
    std::string catalog;
    double delta_t = 30.0;
    std::string screen_keep = "default";
    double kappa = 2.0;
    bool iterate = false;
    bool branch = false;
    std::size_t max_results = 10;
    bool no_standards = false;
    unsigned jobs = 1;
    std::uint64_t seed = 0;
    std::string format = "text";
    std::string out;
    double std_window = 10.0;
};

void add_match_flags(CLI::App* sub, MatchFlags& f, const std::string& sample_help) {
    sub->add_option("--lib", f.lib, "Library file (JSON)")->required();
    sub->add_option("--sample", f.sample, sample_help)->required();
    sub->add_option("--catalog", f.catalog, "Catalog CSV; must agree with the library's catalog");
    sub->add_option("--delta-t", f.delta_t, "Candidate window half-width in seconds (inf disables)")
        ->capture_default_str();
    sub->add_option("--screen-keep", f.screen_keep,
                    "Trajectories kept after standard screening: all, default, a fraction or a count")
        ->capture_default_str();
    sub->add_option("--kappa", f.kappa, "Interferent threshold: squared residual > kappa * msr")->capture_default_str();
    sub->add_flag("--iterate-interferents", f.iterate, "Repeat interferent reflagging to a fixed point");
    sub->add_flag("--branch-interferents", f.branch, "Also try INTERFERENT for peaks that have candidates");
    sub->add_option("--max-results", f.max_results, "Ranked entries to keep (0 = all)")->capture_default_str();
    sub->add_flag("--no-standards", f.no_standards, "Match without internal standards");
    sub->add_option("--jobs", f.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--seed", f.seed, "Seed (matching is deterministic; kept for a uniform interface)")
        ->capture_default_str();
    sub->add_option("--format", f.format, "Output format")
        ->check(CLI::IsMember({"text", "structured"}))
        ->capture_default_str();
    sub->add_option("--out", f.out, "Output file (default stdout)");
    sub->add_option("--std-window", f.std_window, "Search window (s) for unlabeled standard peaks")
        ->capture_default_str();
}

rtt::MatchConfig make_config(const MatchFlags& f) {
    rtt::MatchConfig cfg;
    cfg.delta_t = f.delta_t;
    cfg.screen_keep = rtt::ScreenKeep::parse(f.screen_keep);
    cfg.kappa = f.kappa;
    cfg.iterate_interferents = f.iterate;
    cfg.branch_interferents = f.branch;
    cfg.max_results = f.max_results;
    cfg.require_standards = !f.no_standards;
    cfg.jobs = f.jobs;
    cfg.validate();
    return cfg;
}

rtt::RttLibrary load_checked_library(const MatchFlags& f) {
    rtt::RttLibrary lib = rtt::load_library_file(f.lib);
    if (!f.catalog.empty() && !(rtt::load_catalog_file(f.catalog) == lib.catalog)) {
        throw rtt::InputError("catalog '" + f.catalog + "' differs from the library's catalog");
    }
    if (!lib.usable()) throw rtt::EmptyLibraryError("empty library: no trajectories to match against");
    return lib;
}

/// Splits a peak list into standards and unknowns. Unlabeled standards are
/// found near the mean library rt of each standard.
rtt::SamplePeaks sample_from_peaks(const rtt::PeakList& peaks, const rtt::RttLibrary& lib, bool no_standards,
                                   double std_window) {
    if (no_standards) {
        rtt::SamplePeaks s;
        for (const auto& p : peaks.peaks) {
            if (p.label && *p.label != rtt::kInterferent && lib.catalog.is_standard(*p.label)) continue;
            s.unknowns.push_back(p.rt);
        }
        return s;
    }
    std::map<rtt::CompoundId, double> hints;
    for (rtt::CompoundId id : lib.catalog.standards()) {
        double sum = 0.0;
        for (const auto& t : lib.trajectories) sum += t.rt(id);
        if (lib.usable()) hints[id] = sum / static_cast<double>(lib.n_lib());
    }
    return rtt::extract_sample(peaks, lib.catalog, hints, std_window);
}

std::vector<std::size_t> parse_sizes(const std::string& text, std::size_t n_tgt) {
    std::vector<std::size_t> sizes;
    if (text == "all") {
        for (std::size_t s = 1; s <= n_tgt; ++s) sizes.push_back(s);
        return sizes;
    }
    std::stringstream in(text);
    std::string part;
    while (std::getline(in, part, ',')) {
        try {
            const auto dash = part.find('-');
            if (dash == std::string::npos) {
                sizes.push_back(std::stoul(part));
            } else {
                const std::size_t lo = std::stoul(part.substr(0, dash)), hi = std::stoul(part.substr(dash + 1));
                for (std::size_t s = lo; s <= hi; ++s) sizes.push_back(s);
            }
        } catch (const std::logic_error&) {
            throw rtt::InputError("cannot read subset sizes '" + text + "'");
        }
    }
    return sizes;
}

std::string fmt(double v, int decimals) {
    std::ostringstream o;
    o << std::fixed << std::setprecision(decimals) << v;
    return o.str();
}

// ---------------------------------------------------------------------------

int run_build_lib(const std::string& catalog_path, const std::vector<std::string>& runs, const std::string& out) {
    const auto catalog = rtt::load_catalog_file(catalog_path);
    std::vector<rtt::PeakList> lists;
    for (const auto& path : runs) {
        auto list = rtt::load_peaklist_file(path, &catalog);
        list.source_id = path.substr(path.find_last_of('/') + 1);
        lists.push_back(std::move(list));
    }
    const auto lib = rtt::build_library(lists, catalog);
    if (out.empty()) {
        std::cout << rtt::save_library(lib).dump(2) << '\n';
    } else {
        rtt::save_library_file(lib, out);
    }
    std::cerr << "library: " << lib.n_lib() << " trajectories, " << catalog.size() << " compounds\n";
    return kExitOk;
}

int run_enrich(const std::string& lib_path, const std::string& out) {
    const auto lib = rtt::load_library_file(lib_path);
    const auto res = rtt::enrich(lib);
    if (out.empty()) {
        std::cout << rtt::save_library(res.library).dump(2) << '\n';
    } else {
        rtt::save_library_file(res.library, out);
    }
    std::cerr << "enriched: " << lib.n_lib() << " -> " << res.library.n_lib() << " trajectories, " << res.rejected
              << " hybrids rejected for breaking elution order\n";
    return kExitOk;
}

struct AlignFlags {
    std::string chrom;
    std::string chrom_out;
    std::string peaks_out;
    std::size_t reference = 0;
};

int run_match(const MatchFlags& f, bool batch, const AlignFlags& align) {
    const auto lib = load_checked_library(f);
    const auto cfg = make_config(f);
    Sink sink(f.out);
    auto& out = sink.stream();

    if (batch) {
        const auto tests = rtt::load_test_suite_file(f.sample, lib.catalog);
        nlohmann::ordered_json all = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < tests.size(); ++i) {
            const auto sample = f.no_standards ? rtt::without_standards(tests[i].sample) : tests[i].sample;
            const auto result = rtt::match(sample, lib, cfg);
            if (f.format == "structured") {
                auto doc = rtt::match_report(result, sample, lib);
                doc["source"] = tests[i].source;
                all.push_back(doc);
            } else {
                out << "# test " << i << (tests[i].source.empty() ? "" : " " + tests[i].source) << '\n';
                rtt::write_match_text(out, result, sample, lib);
                out << '\n';
            }
        }
        if (f.format == "structured") out << all.dump(2) << '\n';
        return kExitOk;
    }

    const auto peaks = rtt::load_peaklist_file(f.sample, &lib.catalog);
    const auto sample = sample_from_peaks(peaks, lib, f.no_standards, f.std_window);
    const auto result = rtt::match(sample, lib, cfg);
    if (f.format == "structured") {
        out << rtt::match_report(result, sample, lib).dump(2) << '\n';
    } else {
        rtt::write_match_text(out, result, sample, lib);
    }
    if (result.empty()) {
        std::cerr << "no identification: " << result.diagnostic << '\n';
        return kExitDomain;
    }

    if (align.reference >= lib.n_lib()) {
        throw rtt::ValidationError("reference trajectory #" + std::to_string(align.reference) + " is not in the library");
    }
    const auto& reference = lib.trajectories[align.reference];
    if (!align.peaks_out.empty()) {
        std::ofstream po(align.peaks_out);
        if (!po) throw rtt::InputError("cannot write '" + align.peaks_out + "'");
        rtt::write_peaklist(po, rtt::align_to_reference(sample, result, reference), &lib.catalog);
    }
    if (!align.chrom.empty()) {
        if (align.chrom_out.empty()) throw rtt::InputError("--align-chrom needs --align-out");
        const auto chrom = rtt::load_chromatogram_file(align.chrom);
        const rtt::Grid grid{chrom.t0, chrom.dt, chrom.size()};
        rtt::save_chromatogram_file(rtt::align_chromatogram(chrom, sample, result, reference, grid), align.chrom_out);
    }
    return kExitOk;
}

struct PreprocessFlags {
    std::string chrom;
    std::string out;
    double lambda = 1e5;
    int max_iter = 15;
    bool no_baseline = false;
    double span = 0.0;
    int degree = 2;
    int robust = 0;
    double snr = 3.0;
    double min_sep = 0.0;
    std::string fit_out;
    std::string reconstruct_out;
    std::string corrected_out;
};

int run_preprocess(const PreprocessFlags& f) {
    auto chrom = rtt::load_chromatogram_file(f.chrom);
    if (!f.no_baseline) {
        const auto base = rtt::baseline_correct(chrom, f.lambda, f.max_iter);
        if (!base.converged) {
            std::cerr << "warning: baseline did not converge in " << base.iterations << " iterations\n";
        }
        chrom = base.corrected;
    }
    if (f.span > 0.0) chrom = rtt::smooth(chrom, f.span, {f.degree, f.robust});
    if (!f.corrected_out.empty()) rtt::save_chromatogram_file(chrom, f.corrected_out);

    const auto detected = rtt::detect_peaks(chrom, f.snr, f.min_sep);
    Sink sink(f.out);
    rtt::write_peaklist(sink.stream(), rtt::to_peaklist(detected, f.chrom));

    if (!f.fit_out.empty() || !f.reconstruct_out.empty()) {
        std::vector<rtt::EmgPeak> fitted;
        std::ostringstream table;
        table << "apex_rt,area,mu,sigma,tau,rms,status\n";
        for (const auto& d : detected) {
            rtt::EmgFit fit;
            std::string status = "ok";
            try {
                fit = rtt::fit_emg(chrom, d);
            } catch (const rtt::FitError& e) {
                fit = e.best();
                status = "failed";
                std::cerr << "warning: peak at " << fmt(d.apex_rt, 3) << " s: " << e.what() << '\n';
            }
            fitted.push_back(fit.peak);
            table << fmt(d.apex_rt, 4) << ',' << fit.peak.area << ',' << fit.peak.mu << ',' << fit.peak.sigma << ','
                  << fit.peak.tau << ',' << fit.rms << ',' << status << '\n';
        }
        if (!f.fit_out.empty()) {
            std::ofstream fo(f.fit_out);
            if (!fo) throw rtt::InputError("cannot write '" + f.fit_out + "'");
            fo << table.str();
        }
        if (!f.reconstruct_out.empty()) {
            rtt::save_chromatogram_file(rtt::reconstruct(fitted, {chrom.t0, chrom.dt, chrom.size()}), f.reconstruct_out);
        }
    }
    std::cerr << detected.size() << " peaks detected\n";
    return kExitOk;
}

struct WarpFlags {
    std::string method = "linear";
    std::string sample;
    std::string reference;
    std::string reference_peaks;
    std::string catalog;
    std::size_t slack = 5;
    int power = 1;
    std::size_t segment = 50;
    double tol = 0.01;
    double std_window = 10.0;
    double snr = 3.0;
    std::string format = "text";
    std::string out;
};

rtt::PeakList load_reference_peaks(const std::string& path, const rtt::CompoundCatalog& catalog) {
    auto ref = rtt::load_peaklist_file(path, &catalog);
    const bool labeled = std::all_of(ref.peaks.begin(), ref.peaks.end(), [](const rtt::Peak& p) { return p.label.has_value(); });
    return labeled ? ref : rtt::assign_by_elution(ref, catalog);
}

void write_identifications(std::ostream& out, const std::string& format, const std::vector<double>& before,
                           const std::vector<rtt::Identification>& ids, const std::vector<rtt::CompoundId>* truth,
                           const rtt::CompoundCatalog& catalog, nlohmann::ordered_json doc) {
    auto label = [&](rtt::CompoundId id) { return id == rtt::kInterferent ? std::string("INTERFERENT") : catalog.label_of(id); };
    std::optional<double> accuracy;
    if (truth) accuracy = rtt::identification_accuracy(ids, *truth);
    if (format == "structured") {
        nlohmann::ordered_json peaks = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < ids.size(); ++i) {
            nlohmann::ordered_json p;
            p["rt"] = before[i];
            p["warped_rt"] = ids[i].rt;
            p["label"] = label(ids[i].label);
            p["ambiguous"] = ids[i].ambiguous;
            if (truth) p["truth"] = label((*truth)[i]);
            peaks.push_back(p);
        }
        doc["peaks"] = peaks;
        if (accuracy) doc["accuracy"] = *accuracy;
        out << doc.dump(2) << '\n';
        return;
    }
    out << "rt (s)      warped (s)  identification" << (truth ? "     truth" : "") << '\n';
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out << std::left << std::setw(12) << fmt(before[i], 2) << std::setw(12) << fmt(ids[i].rt, 2) << std::setw(19)
            << (label(ids[i].label) + (ids[i].ambiguous ? " (ambiguous)" : ""));
        if (truth) {
            const bool ok = !ids[i].ambiguous && ids[i].label == (*truth)[i];
            out << label((*truth)[i]) << (ok ? "" : " *");
        }
        out << '\n';
    }
    if (accuracy) out << "accuracy " << fmt(100.0 * *accuracy, 1) << "%\n";
}

int run_warp(const WarpFlags& f) {
    if (f.catalog.empty()) throw rtt::InputError("warp needs --catalog");
    const auto catalog = rtt::load_catalog_file(f.catalog);
    Sink sink(f.out);

    if (f.method == "linear") {
        const auto ref = load_reference_peaks(f.reference, catalog);
        std::map<rtt::CompoundId, double> ref_std;
        for (const auto& p : ref.peaks) {
            if (p.label && *p.label != rtt::kInterferent && catalog.is_standard(*p.label)) ref_std[*p.label] = p.rt;
        }
        const auto sample_peaks = rtt::load_peaklist_file(f.sample, &catalog);
        const auto sample = rtt::extract_sample(sample_peaks, catalog, ref_std, f.std_window);
        std::vector<double> s_std, r_std;
        for (rtt::CompoundId id : catalog.standards()) {
            if (!ref_std.count(id)) throw rtt::ValidationError("reference lacks standard " + catalog.label_of(id));
            s_std.push_back(sample.standards.at(id));
            r_std.push_back(ref_std.at(id));
        }
        const rtt::LinearWarp warp(s_std, r_std);
        std::vector<double> before, after;
        std::vector<rtt::CompoundId> truth;
        bool has_truth = true;
        for (const auto& p : sample_peaks.peaks) {
            before.push_back(p.rt);
            after.push_back(warp(p.rt));
            if (p.label) {
                truth.push_back(*p.label);
            } else if (sample.standards.size() && std::any_of(sample.standards.begin(), sample.standards.end(),
                                                              [&](const auto& kv) { return kv.second == p.rt; })) {
                for (const auto& [id, rt] : sample.standards) {
                    if (rt == p.rt) truth.push_back(id);
                }
            } else {
                has_truth = false;
            }
        }
        const auto ids = rtt::identify_after_warp(after, ref, f.tol);
        nlohmann::ordered_json doc;
        doc["method"] = "linear";
        nlohmann::ordered_json anchors = nlohmann::ordered_json::array();
        for (const auto& [s, r] : warp.anchors()) anchors.push_back({s, r});
        doc["anchors"] = anchors;
        write_identifications(sink.stream(), f.format, before, ids, has_truth ? &truth : nullptr, catalog, doc);
        return kExitOk;
    }

    const auto sample = rtt::load_chromatogram_file(f.sample);
    const auto reference = rtt::load_chromatogram_file(f.reference);
    const rtt::CowConfig cfg{f.segment, f.slack, f.power};
    const auto res = rtt::cow_align(sample, reference, cfg);
    nlohmann::ordered_json doc;
    doc["method"] = "cow";
    doc["benefit"] = res.benefit;
    nlohmann::ordered_json path = nlohmann::ordered_json::array();
    for (const auto& b : res.path) path.push_back({b.reference, b.sample});
    doc["path"] = path;
    if (f.reference_peaks.empty()) {
        rtt::write_chromatogram(sink.stream(), res.warped);
        return kExitOk;
    }
    const auto ref = load_reference_peaks(f.reference_peaks, catalog);
    const auto detected = rtt::detect_peaks(sample, f.snr);
    std::vector<double> before, after;
    for (const auto& d : detected) {
        before.push_back(d.apex_rt);
        after.push_back(rtt::cow_map_time(sample, reference, res.path, d.apex_rt));
    }
    const auto ids = rtt::identify_after_warp(after, ref, f.tol);
    write_identifications(sink.stream(), f.format, before, ids, nullptr, catalog, doc);
    return kExitOk;
}

struct GenFlags {
    std::string lib;
    std::string catalog;
    std::string run;
    std::size_t trajectory = 0;
    std::string sizes = "all";
    std::size_t random = 0;
    std::uint64_t seed = 0;
    std::size_t interferents = 0;
    double min_gap = 5.0;
    bool near_targets = false;
    double budget = 1e7;
    std::string out;
};

int run_gen_tests(const GenFlags& f) {
    rtt::CompoundCatalog catalog;
    rtt::Rtt run;
    if (!f.run.empty()) {
        if (f.catalog.empty()) throw rtt::InputError("--run needs --catalog");
        catalog = rtt::load_catalog_file(f.catalog);
        auto list = load_reference_peaks(f.run, catalog);
        run.rts.assign(catalog.size(), 0.0);
        for (const auto& p : list.peaks) {
            if (p.label && *p.label != rtt::kInterferent) run.rts[static_cast<std::size_t>(*p.label)] = p.rt;
        }
        run.provenance = rtt::Provenance::measured(f.run.substr(f.run.find_last_of('/') + 1));
    } else if (!f.lib.empty()) {
        const auto lib = rtt::load_library_file(f.lib);
        if (f.trajectory >= lib.n_lib()) {
            throw rtt::ValidationError("trajectory #" + std::to_string(f.trajectory) + " is not in the library");
        }
        catalog = lib.catalog;
        run = lib.trajectories[f.trajectory];
    } else {
        throw rtt::InputError("gen-tests needs --lib or --run");
    }

    const auto sizes = parse_sizes(f.sizes, catalog.n_tgt());
    const auto sampling = f.random > 0 ? rtt::Sampling::random(f.random, f.seed) : rtt::Sampling::exhaustive();
    if (f.random == 0) {
        const auto total = rtt::count_tests(catalog.n_tgt(), sizes, 1);
        if (total > rtt::BigCount(static_cast<std::uint64_t>(f.budget))) {
            throw rtt::InputError("exhaustive generation would emit " + total.str() + " tests, above the budget of " +
                                  fmt(f.budget, 0) + "; use --random N or raise --budget");
        }
    }
    Sink sink(f.out);
    std::uint64_t index = 0;
    const auto stats = rtt::subset_tests(run, catalog, sizes, sampling, [&](const rtt::TestCase& t) {
        rtt::TestCase test = t;
        if (f.interferents > 0) {
            const auto rts = rtt::random_interferents(t, run, f.interferents, f.seed + index, f.min_gap, f.near_targets);
            test = rtt::inject_interferents(t, rts);
        }
        rtt::write_test_case(sink.stream(), test, catalog);
        ++index;
    });
    for (const auto& w : stats.warnings) std::cerr << "warning: " << w << '\n';
    std::cerr << stats.emitted << " tests written\n";
    return kExitOk;
}

int run_count_tests(std::size_t n_tgt, const std::string& sizes, std::size_t n_chroms) {
    std::cout << rtt::count_tests(n_tgt, parse_sizes(sizes, n_tgt), n_chroms).str() << '\n';
    return kExitOk;
}

int run_evaluate(const MatchFlags& f, bool timing) {
    const auto lib = load_checked_library(f);
    const auto cfg = make_config(f);
    auto tests = rtt::load_test_suite_file(f.sample, lib.catalog);
    if (f.no_standards) {
        for (auto& t : tests) t.sample = rtt::without_standards(t.sample);
    }
    const auto report = rtt::evaluate(lib, tests, cfg);
    Sink sink(f.out);
    if (f.format == "structured") {
        sink.stream() << rtt::eval_report(report, timing).dump(2) << '\n';
    } else {
        rtt::write_eval_text(sink.stream(), report);
    }
    std::cerr << "evaluated " << report.tests << " tests in " << fmt(report.total_seconds, 3) << " s (slowest "
              << fmt(report.max_seconds * 1e3, 2) << " ms)\n";
    return kExitOk;
}

int run_plot(const std::string& kind, const std::string& lib_path, std::size_t reference,
             const std::vector<std::string>& chroms, const std::string& out) {
    rtt::PlotSpec spec;
    if (kind == "chromatogram") {
        if (chroms.empty()) throw rtt::InputError("plot chromatogram needs --chrom");
        std::vector<std::pair<std::string, rtt::Chromatogram>> traces;
        for (const auto& c : chroms) traces.emplace_back(c.substr(c.find_last_of('/') + 1), rtt::load_chromatogram_file(c));
        spec = rtt::chromatogram_plot(traces);
    } else {
        if (lib_path.empty()) throw rtt::InputError("plot " + kind + " needs --lib");
        const auto lib = rtt::load_library_file(lib_path);
        spec = kind == "rtt-diagram" ? rtt::rtt_diagram(lib, reference) : rtt::delta_rt_plot(lib, reference);
    }
    Sink sink(out);
    sink.stream() << rtt::render_svg(spec);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Retention-time trajectory matching for chromatographic peak identification"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "rttmatch 1.0");

    // build-lib
    std::string bl_catalog, bl_out;
    std::vector<std::string> bl_runs;
    auto* build = app.add_subcommand("build-lib", "Build a library from full-composition peak lists");
    build->add_option("--catalog", bl_catalog, "Catalog CSV")->required()->check(CLI::ExistingFile);
    build->add_option("--out", bl_out, "Library file to write (default stdout)");
    build->add_option("runs", bl_runs, "Peak lists, one per reference run")->required()->check(CLI::ExistingFile);

    // enrich
    std::string en_lib, en_out;
    auto* enrich = app.add_subcommand("enrich", "Append hybrid trajectories to a library");
    enrich->add_option("--lib", en_lib, "Library file")->required()->check(CLI::ExistingFile);
    enrich->add_option("--out", en_out, "Library file to write (default stdout)");

    // match
    MatchFlags mf;
    bool batch = false;
    AlignFlags af;
    auto* match = app.add_subcommand("match", "Identify the peaks of a sample");
    add_match_flags(match, mf, "Sample peak list (or test suite with --batch)");
    match->add_flag("--batch", batch, "Treat --sample as a test-suite file and match every test");
    match->add_option("--reference", af.reference, "Library trajectory used for aligned outputs")->capture_default_str();
    match->add_option("--aligned-peaks", af.peaks_out, "Write the sample peak list moved onto reference rts");
    match->add_option("--align-chrom", af.chrom, "Sample chromatogram to align");
    match->add_option("--align-out", af.chrom_out, "Aligned chromatogram output");

    // preprocess
    PreprocessFlags pf;
    auto* pre = app.add_subcommand("preprocess", "Turn a chromatogram into a peak list");
    pre->add_option("--chrom", pf.chrom, "Chromatogram CSV (t,signal)")->required()->check(CLI::ExistingFile);
    pre->add_option("--out", pf.out, "Peak list output (default stdout)");
    pre->add_option("--lambda", pf.lambda, "Baseline smoothness (samples^4)")->capture_default_str();
    pre->add_option("--max-iter", pf.max_iter, "Baseline iterations")->capture_default_str();
    pre->add_flag("--no-baseline", pf.no_baseline, "Skip baseline removal");
    pre->add_option("--span", pf.span, "LOESS span as a fraction of points (0 disables)")->capture_default_str();
    pre->add_option("--degree", pf.degree, "LOESS degree (1 or 2)")->capture_default_str();
    pre->add_option("--robust", pf.robust, "LOESS robustness iterations")->capture_default_str();
    pre->add_option("--snr", pf.snr, "Minimum peak height over noise")->capture_default_str();
    pre->add_option("--min-separation", pf.min_sep, "Minimum apex spacing in seconds")->capture_default_str();
    pre->add_option("--corrected-out", pf.corrected_out, "Write the corrected chromatogram");
    pre->add_option("--fit-out", pf.fit_out, "Write EMG fit parameters per peak");
    pre->add_option("--reconstruct-out", pf.reconstruct_out, "Write the EMG reconstruction");

    // warp
    WarpFlags wf;
    auto* warp = app.add_subcommand("warp", "Baseline aligners: internal-standard linear warping or COW");
    warp->add_option("--method", wf.method, "linear or cow")->check(CLI::IsMember({"linear", "cow"}))->capture_default_str();
    warp->add_option("--sample", wf.sample, "Sample peak list (linear) or chromatogram (cow)")->required()->check(CLI::ExistingFile);
    warp->add_option("--reference", wf.reference, "Reference peak list (linear) or chromatogram (cow)")->required()->check(CLI::ExistingFile);
    warp->add_option("--reference-peaks", wf.reference_peaks, "Labeled reference peaks for identification after COW");
    warp->add_option("--catalog", wf.catalog, "Catalog CSV")->required()->check(CLI::ExistingFile);
    warp->add_option("--slack", wf.slack, "COW boundary slack in samples")->capture_default_str();
    warp->add_option("--power", wf.power, "COW correlation power")->capture_default_str();
    warp->add_option("--segment", wf.segment, "COW segment length in samples")->capture_default_str();
    warp->add_option("--tol", wf.tol, "Identification tolerance in seconds")->capture_default_str();
    warp->add_option("--std-window", wf.std_window, "Search window (s) for unlabeled standards")->capture_default_str();
    warp->add_option("--snr", wf.snr, "Peak detection threshold for COW identification")->capture_default_str();
    warp->add_option("--format", wf.format, "Output format")->check(CLI::IsMember({"text", "structured"}))->capture_default_str();
    warp->add_option("--out", wf.out, "Output file (default stdout)");

    // gen-tests
    GenFlags gf;
    auto* gen = app.add_subcommand("gen-tests", "Generate a validation suite from one run");
    gen->add_option("--lib", gf.lib, "Library holding the source trajectory");
    gen->add_option("--trajectory", gf.trajectory, "Source trajectory index in --lib")->capture_default_str();
    gen->add_option("--run", gf.run, "Labeled full-composition peak list instead of --lib");
    gen->add_option("--catalog", gf.catalog, "Catalog CSV (with --run)");
    gen->add_option("--sizes", gf.sizes, "Subset sizes: all, 5, 1-8, 5,10,20")->capture_default_str();
    gen->add_option("--random", gf.random, "Draw this many subsets per size instead of all")->capture_default_str();
    gen->add_option("--seed", gf.seed, "Seed for random draws and interferents")->capture_default_str();
    gen->add_option("--interferents", gf.interferents, "Interferent peaks injected per test")->capture_default_str();
    gen->add_option("--min-gap", gf.min_gap, "Minimum distance (s) from any compound rt")->capture_default_str();
    gen->add_flag("--near-targets", gf.near_targets, "Allow interferents close to compound rts");
    gen->add_option("--budget", gf.budget, "Refuse exhaustive suites larger than this")->capture_default_str();
    gen->add_option("--out", gf.out, "Suite file (JSON Lines; default stdout)");

    // count-tests
    std::size_t ct_n = 0, ct_chroms = 1;
    std::string ct_sizes = "all";
    auto* count = app.add_subcommand("count-tests", "Exact number of subset tests");
    count->add_option("--n-tgt", ct_n, "Number of targets")->required();
    count->add_option("--sizes", ct_sizes, "Subset sizes: all, 5, 1-8, 5,10,20")->capture_default_str();
    count->add_option("--n-chroms", ct_chroms, "Number of source chromatograms")->capture_default_str();

    // evaluate
    MatchFlags ef;
    bool ev_timing = false;
    auto* eval = app.add_subcommand("evaluate", "Match a test suite and report accuracy");
    add_match_flags(eval, ef, "Test-suite file (JSON Lines)");
    eval->add_flag("--timing", ev_timing, "Include timings in structured output");

    // plot
    std::string pl_kind, pl_lib, pl_out;
    std::size_t pl_ref = 0;
    std::vector<std::string> pl_chroms;
    auto* plot = app.add_subcommand("plot", "Write an SVG plot");
    plot->add_option("kind", pl_kind, "rtt-diagram, delta-rt or chromatogram")
        ->required()
        ->check(CLI::IsMember({"rtt-diagram", "delta-rt", "chromatogram"}));
    plot->add_option("--lib", pl_lib, "Library file");
    plot->add_option("--reference", pl_ref, "Reference trajectory index")->capture_default_str();
    plot->add_option("--chrom", pl_chroms, "Chromatogram CSV (repeatable)");
    plot->add_option("--out", pl_out, "SVG file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        if (app.get_subcommands().empty()) std::cerr << app.help();
        return kExitUsage;
    }

    try {
        if (*build) return run_build_lib(bl_catalog, bl_runs, bl_out);
        if (*enrich) return run_enrich(en_lib, en_out);
        if (*match) return run_match(mf, batch, af);
        if (*pre) return run_preprocess(pf);
        if (*warp) return run_warp(wf);
        if (*gen) return run_gen_tests(gf);
        if (*count) return run_count_tests(ct_n, ct_sizes, ct_chroms);
        if (*eval) return run_evaluate(ef, ev_timing);
        if (*plot) return run_plot(pl_kind, pl_lib, pl_ref, pl_chroms, pl_out);
    } catch (const rtt::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const rtt::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDomain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDomain;
    }
    return kExitUsage;
}
