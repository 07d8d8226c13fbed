#include "rtt/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace rtt {

namespace {

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

nlohmann::ordered_json number_or_null(double v) {
    return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

std::string label_text(CompoundId id, const CompoundCatalog& catalog) {
    return id == kInterferent ? "INTERFERENT" : catalog.label_of(id);
}

}  // namespace

nlohmann::ordered_json match_report(const MatchResult& result, const SamplePeaks& sample, const RttLibrary& lib) {
    nlohmann::ordered_json doc;
    doc["screened"] = result.screened;
    doc["assignments_scored"] = result.assignments;
    if (!result.diagnostic.empty()) doc["diagnostic"] = result.diagnostic;
    nlohmann::ordered_json stds = nlohmann::ordered_json::object();
    for (const auto& [id, rt] : sample.standards) stds[lib.catalog.label_of(id)] = rt;
    doc["standards"] = stds;
    nlohmann::ordered_json ranked = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < result.ranked.size(); ++k) {
        const auto& e = result.ranked[k];
        nlohmann::ordered_json row;
        row["rank"] = k + 1;
        row["msr"] = e.score.msr;
        row["ssr_std"] = e.score.ssr_std;
        row["n_paired"] = e.score.n_paired;
        row["trajectory"] = e.score.lib_index;
        row["provenance"] = lib.trajectories.at(e.score.lib_index).provenance.describe();
        row["reflagged"] = e.reflagged;
        nlohmann::ordered_json peaks = nlohmann::ordered_json::array();
        for (std::size_t j = 0; j < sample.unknowns.size(); ++j) {
            nlohmann::ordered_json p;
            p["rt"] = sample.unknowns[j];
            p["label"] = label_text(e.assignment.mapping[j], lib.catalog);
            p["residual"] = number_or_null(e.score.residuals[j]);
            peaks.push_back(p);
        }
        row["peaks"] = peaks;
        ranked.push_back(row);
    }
    doc["ranked"] = ranked;
    return doc;
}

void write_match_text(std::ostream& out, const MatchResult& result, const SamplePeaks& sample,
                      const RttLibrary& lib) {
    constexpr std::size_t kLead = 22;
    constexpr std::size_t kCol = 13;
    out << pad("Retention time (s)", kLead);
    for (const auto& [id, rt] : sample.standards) out << pad(fixed(rt, 1) + "*", kCol);
    for (double rt : sample.unknowns) out << pad(fixed(rt, 1), kCol);
    out << "MSR (s^2)  trajectory\n";
    if (result.empty()) {
        out << "no identification: " << result.diagnostic << '\n';
        return;
    }
    for (std::size_t k = 0; k < result.ranked.size(); ++k) {
        const auto& e = result.ranked[k];
        out << pad("Rank " + std::to_string(k + 1) + (e.reflagged ? " (reflagged)" : ""), kLead);
        for (const auto& [id, rt] : sample.standards) out << pad(lib.catalog.label_of(id), kCol);
        for (CompoundId id : e.assignment.mapping) {
            std::string text = id == kInterferent ? "INTERF" : lib.catalog.label_of(id);
            if (text.size() >= kCol) text = text.substr(0, kCol - 2) + "~";
            out << pad(text, kCol);
        }
        out << pad(fixed(e.score.msr, 4), 11) << '#' << e.score.lib_index << ' '
            << lib.trajectories.at(e.score.lib_index).provenance.describe() << '\n';
    }
    out << "(* internal standard)\n";
}

nlohmann::ordered_json eval_report(const EvalReport& report, bool include_timing) {
    nlohmann::ordered_json doc;
    doc["tests"] = report.tests;
    doc["top1_accuracy"] = report.top1();
    doc["topk_accuracy"] = report.topk_accuracy;
    doc["rank_accuracy"] = report.rank_accuracy;
    doc["peak_accuracy"] = report.peak_accuracy;
    doc["interferent_precision"] = report.interferent_precision;
    doc["interferent_recall"] = report.interferent_recall;
    doc["starved"] = report.starved;
    if (include_timing) {
        doc["total_seconds"] = report.total_seconds;
        doc["max_seconds"] = report.max_seconds;
    }
    nlohmann::ordered_json tests = nlohmann::ordered_json::array();
    for (const auto& o : report.outcomes) {
        nlohmann::ordered_json t;
        t["index"] = o.index;
        t["source"] = o.source;
        t["correct_rank"] = o.correct_rank;
        t["ranked"] = o.n_ranked;
        t["top_msr"] = number_or_null(o.top_msr);
        t["peaks_correct"] = o.peaks_correct;
        t["peaks"] = o.peaks;
        t["starved"] = o.starved;
        if (include_timing) t["seconds"] = o.seconds;
        tests.push_back(t);
    }
    doc["outcomes"] = tests;
    return doc;
}

void write_eval_text(std::ostream& out, const EvalReport& report) {
    out << "tests                  " << report.tests << '\n';
    out << "top-1 accuracy         " << fixed(report.top1(), 4) << '\n';
    for (std::size_t k = 0; k < report.rank_accuracy.size(); ++k) {
        out << pad("  rank " + std::to_string(k + 1), 23) << fixed(report.rank_accuracy[k], 4) << "   top-"
            << k + 1 << ' ' << fixed(report.topk_accuracy[k], 4) << '\n';
    }
    out << "peak accuracy          " << fixed(report.peak_accuracy, 4) << '\n';
    out << "interferent precision  " << fixed(report.interferent_precision, 4) << '\n';
    out << "interferent recall     " << fixed(report.interferent_recall, 4) << '\n';
    if (report.starved > 0) {
        out << "window-starved tests   " << report.starved
            << "  (nothing identified; consider a wider --delta-t or a larger library)\n";
    }
}

}  // namespace rtt
