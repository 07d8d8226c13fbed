#include "rtt/peaklist.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "csv.hpp"
#include "rtt/error.hpp"

namespace rtt {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string format_fixed(double v, int decimals) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(decimals) << v;
    return os.str();
}

}  // namespace

CompoundCatalog::CompoundCatalog(std::vector<CatalogEntry> entries) : entries_(std::move(entries)) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].id != static_cast<CompoundId>(i)) {
            throw ValidationError("catalog ids must be 0..n-1 in elution order; entry " +
                                  std::to_string(i) + " has id " + std::to_string(entries_[i].id));
        }
        (entries_[i].role == Role::Standard ? standards_ : targets_).push_back(entries_[i].id);
    }
    if (targets_.empty()) throw ValidationError("catalog needs at least one target compound");
}

const CatalogEntry& CompoundCatalog::at(CompoundId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= entries_.size()) {
        throw ValidationError("compound id " + std::to_string(id) + " outside catalog");
    }
    return entries_[static_cast<std::size_t>(id)];
}

bool CompoundCatalog::is_standard(CompoundId id) const { return at(id).role == Role::Standard; }

std::optional<CompoundId> CompoundCatalog::resolve(std::string_view token) const {
    token = csv::trim(token);
    if (token.empty()) return std::nullopt;
    const std::string low = lower(token);
    if (low == "interferent") return kInterferent;
    if (low.size() > 3 && low.compare(0, 3, "std") == 0) {
        if (auto k = csv::to_int(std::string_view(low).substr(3))) {
            if (*k >= 1 && static_cast<std::size_t>(*k) <= standards_.size()) {
                return standards_[static_cast<std::size_t>(*k - 1)];
            }
            return std::nullopt;
        }
    }
    if (auto id = csv::to_int(token)) {
        if (*id >= 0 && static_cast<std::size_t>(*id) < entries_.size()) {
            return static_cast<CompoundId>(*id);
        }
        return std::nullopt;
    }
    std::optional<CompoundId> found;
    for (const auto& e : entries_) {
        if (e.name == token) {
            if (found) return std::nullopt;  // ambiguous name
            found = e.id;
        }
    }
    return found;
}

std::string CompoundCatalog::label_of(CompoundId id) const {
    if (id == kInterferent) return "INTERFERENT";
    const auto& e = at(id);
    if (e.role == Role::Standard) {
        const auto pos = std::find(standards_.begin(), standards_.end(), id) - standards_.begin();
        return "std" + std::to_string(pos + 1);
    }
    const auto same = std::count_if(entries_.begin(), entries_.end(),
                                    [&](const CatalogEntry& o) { return o.name == e.name; });
    const bool numeric = csv::to_int(e.name).has_value();
    if (same == 1 && !e.name.empty() && !numeric && lower(e.name) != "interferent" &&
        !(lower(e.name).rfind("std", 0) == 0)) {
        return e.name;
    }
    return std::to_string(id);
}

bool operator==(const CatalogEntry& a, const CatalogEntry& b) {
    return a.id == b.id && a.name == b.name && a.role == b.role;
}

bool operator==(const CompoundCatalog& a, const CompoundCatalog& b) { return a.entries_ == b.entries_; }

std::vector<double> PeakList::rts() const {
    std::vector<double> out;
    out.reserve(peaks.size());
    for (const auto& p : peaks) out.push_back(p.rt);
    return out;
}

void validate_peaklist(const PeakList& list) {
    for (std::size_t i = 0; i < list.peaks.size(); ++i) {
        const double rt = list.peaks[i].rt;
        if (!std::isfinite(rt) || rt <= 0.0) {
            throw ValidationError("peak " + std::to_string(i) + " has invalid rt " + std::to_string(rt));
        }
        if (i > 0 && !(list.peaks[i - 1].rt < rt)) {
            throw OrderViolationError("peak list '" + list.source_id + "': rt " + format_fixed(rt, 4) +
                                      " does not follow " + format_fixed(list.peaks[i - 1].rt, 4) +
                                      " (duplicate or out of order)");
        }
    }
}

void validate_sample(const SamplePeaks& sample, const CompoundCatalog& catalog,
                     bool require_all_standards) {
    for (std::size_t i = 0; i < sample.unknowns.size(); ++i) {
        const double rt = sample.unknowns[i];
        if (!std::isfinite(rt) || rt <= 0.0) throw ValidationError("sample peak with invalid rt");
        if (i > 0 && !(sample.unknowns[i - 1] < rt)) {
            throw OrderViolationError("sample unknowns are not strictly increasing at index " +
                                      std::to_string(i));
        }
    }
    double prev = -1.0;
    for (CompoundId id : catalog.standards()) {
        const auto it = sample.standards.find(id);
        if (it == sample.standards.end()) {
            if (require_all_standards) {
                throw ValidationError("sample lacks standard " + catalog.label_of(id));
            }
            continue;
        }
        if (!std::isfinite(it->second) || it->second <= 0.0) {
            throw ValidationError("standard " + catalog.label_of(id) + " has invalid rt");
        }
        if (!(prev < it->second)) {
            throw OrderViolationError("sample standards do not follow catalog elution order");
        }
        prev = it->second;
        if (std::binary_search(sample.unknowns.begin(), sample.unknowns.end(), it->second)) {
            throw ValidationError("standard rt coincides with an unknown peak");
        }
    }
    for (const auto& [id, rt] : sample.standards) {
        if (!catalog.is_standard(id)) {
            throw ValidationError("compound " + std::to_string(id) + " bound as standard is a target");
        }
    }
}

PeakList parse_peaklist(std::istream& in, PeakListFormat format, const CompoundCatalog* catalog,
                        std::string source_id) {
    PeakList list;
    list.source_id = std::move(source_id);

    int col_rt = 0, col_height = 1, col_label = 2;
    bool header_seen = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (csv::skippable(line)) continue;
        if (format == PeakListFormat::Plain) {
            auto v = csv::to_double(line);
            if (!v) throw ParseError(lineno, "expected a retention time, got '" + line + "'");
            list.peaks.push_back(Peak{*v, std::nullopt, std::nullopt});
            continue;
        }
        auto fields = csv::split(line);
        if (!header_seen) {
            header_seen = true;
            if (lower(fields.front()) == "rt") {
                col_rt = col_height = col_label = -1;
                for (std::size_t i = 0; i < fields.size(); ++i) {
                    const auto name = lower(fields[i]);
                    if (name == "rt") col_rt = static_cast<int>(i);
                    else if (name == "height") col_height = static_cast<int>(i);
                    else if (name == "label") col_label = static_cast<int>(i);
                    else throw ParseError(lineno, "unknown column '" + fields[i] + "'");
                }
                continue;
            }
        }
        auto field = [&](int col) -> std::string_view {
            if (col < 0 || static_cast<std::size_t>(col) >= fields.size()) return {};
            return fields[static_cast<std::size_t>(col)];
        };
        Peak p;
        auto rt = csv::to_double(field(col_rt));
        if (!rt) throw ParseError(lineno, "missing or malformed rt");
        p.rt = *rt;
        if (!std::isfinite(p.rt) || p.rt <= 0.0) throw ParseError(lineno, "rt must be finite and > 0");
        if (auto h = field(col_height); !h.empty()) {
            auto hv = csv::to_double(h);
            if (!hv || *hv < 0.0) throw ParseError(lineno, "malformed height '" + std::string(h) + "'");
            p.height = *hv;
        }
        if (auto lab = field(col_label); !lab.empty()) {
            if (catalog) {
                p.label = catalog->resolve(lab);
            } else if (lower(lab) == "interferent") {
                p.label = kInterferent;
            } else if (auto id = csv::to_int(lab); id && *id >= 0) {
                p.label = static_cast<CompoundId>(*id);
            }
            if (!p.label) throw ParseError(lineno, "unresolvable label '" + std::string(lab) + "'");
        }
        if (fields.size() > 3) throw ParseError(lineno, "too many columns");
        list.peaks.push_back(std::move(p));
    }
    std::stable_sort(list.peaks.begin(), list.peaks.end(),
                     [](const Peak& a, const Peak& b) { return a.rt < b.rt; });
    validate_peaklist(list);
    return list;
}

void write_peaklist(std::ostream& out, const PeakList& list, const CompoundCatalog* catalog) {
    out << "rt,height,label\n";
    for (const auto& p : list.peaks) {
        out << format_fixed(p.rt, 4) << ',';
        if (p.height) out << format_fixed(*p.height, 4);
        out << ',';
        if (p.label) {
            if (catalog) out << csv::quote(catalog->label_of(*p.label));
            else if (*p.label == kInterferent) out << "INTERFERENT";
            else out << *p.label;
        }
        out << '\n';
    }
}

CompoundCatalog parse_catalog(std::istream& in) {
    std::vector<CatalogEntry> entries;
    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (csv::skippable(line)) continue;
        auto fields = csv::split(line);
        if (first) {
            first = false;
            if (lower(fields.front()) == "id") continue;
        }
        if (fields.size() != 3) throw ParseError(lineno, "catalog rows are id,name,role");
        auto id = csv::to_int(fields[0]);
        if (!id) throw ParseError(lineno, "malformed id '" + fields[0] + "'");
        const auto role = lower(fields[2]);
        Role r;
        if (role == "target") r = Role::Target;
        else if (role == "standard" || role == "std") r = Role::Standard;
        else throw ParseError(lineno, "role must be target or standard, got '" + fields[2] + "'");
        entries.push_back(CatalogEntry{static_cast<CompoundId>(*id), fields[1], r});
    }
    return CompoundCatalog(std::move(entries));
}

void write_catalog(std::ostream& out, const CompoundCatalog& catalog) {
    out << "id,name,role\n";
    for (const auto& e : catalog.entries()) {
        out << e.id << ',' << csv::quote(e.name) << ','
            << (e.role == Role::Standard ? "standard" : "target") << '\n';
    }
}

PeakList load_peaklist_file(const std::string& path, const CompoundCatalog* catalog) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open peak list '" + path + "'");
    try {
        return parse_peaklist(in, PeakListFormat::Csv, catalog, path);
    } catch (const ParseError& e) {
        throw InputError(path + ": " + e.what());
    }
}

CompoundCatalog load_catalog_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open catalog '" + path + "'");
    try {
        return parse_catalog(in);
    } catch (const ParseError& e) {
        throw InputError(path + ": " + e.what());
    }
}

SamplePeaks extract_sample(const PeakList& peaks, const CompoundCatalog& catalog,
                           const std::map<CompoundId, double>& std_hints, double std_window) {
    validate_peaklist(peaks);
    std::vector<bool> bound(peaks.size(), false);
    SamplePeaks sample;

    for (std::size_t i = 0; i < peaks.size(); ++i) {
        const auto& label = peaks.peaks[i].label;
        if (!label || *label == kInterferent || !catalog.is_standard(*label)) continue;
        if (!sample.standards.emplace(*label, peaks.peaks[i].rt).second) {
            throw AmbiguousStandardError("standard " + catalog.label_of(*label) +
                                         " is labeled on more than one peak");
        }
        bound[i] = true;
    }

    for (CompoundId id : catalog.standards()) {
        if (sample.standards.count(id)) continue;
        const auto hint = std_hints.find(id);
        if (hint == std_hints.end()) {
            throw AmbiguousStandardError("standard " + catalog.label_of(id) +
                                         " is neither labeled nor given a nominal rt");
        }
        std::vector<std::size_t> hits;
        for (std::size_t i = 0; i < peaks.size(); ++i) {
            if (bound[i] || peaks.peaks[i].label) continue;
            if (std::abs(peaks.peaks[i].rt - hint->second) <= std_window) hits.push_back(i);
        }
        if (hits.size() != 1) {
            throw AmbiguousStandardError("standard " + catalog.label_of(id) + " near " +
                                         format_fixed(hint->second, 2) + " s: " +
                                         std::to_string(hits.size()) + " candidate peaks within ±" +
                                         format_fixed(std_window, 2) + " s");
        }
        bound[hits.front()] = true;
        sample.standards.emplace(id, peaks.peaks[hits.front()].rt);
    }

    for (std::size_t i = 0; i < peaks.size(); ++i) {
        if (!bound[i]) sample.unknowns.push_back(peaks.peaks[i].rt);
    }
    validate_sample(sample, catalog, true);
    return sample;
}

PeakList assign_by_elution(const PeakList& peaks, const CompoundCatalog& catalog) {
    if (peaks.size() != catalog.size()) {
        throw ValidationError("run '" + peaks.source_id + "' has " + std::to_string(peaks.size()) +
                              " peaks but the catalog lists " + std::to_string(catalog.size()) +
                              " compounds");
    }
    validate_peaklist(peaks);
    PeakList out = peaks;
    for (std::size_t i = 0; i < out.peaks.size(); ++i) out.peaks[i].label = static_cast<CompoundId>(i);
    return out;
}

}  // namespace rtt
