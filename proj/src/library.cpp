#include "rtt/library.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "rtt/error.hpp"

namespace rtt {

using nlohmann::json;

std::string Provenance::describe() const {
    if (kind == Kind::Measured) return source_id;
    std::ostringstream os;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const double c = terms[i].coefficient;
        if (i > 0) os << (c < 0 ? " - " : " + ");
        else if (c < 0) os << '-';
        os << std::abs(c) << "*#" << terms[i].index;
    }
    return os.str();
}

void validate_rtt(const Rtt& rtt, std::size_t n) {
    if (rtt.rts.size() != n) {
        throw ValidationError("trajectory has " + std::to_string(rtt.rts.size()) + " rts, expected " +
                              std::to_string(n));
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double v = rtt.rts[i];
        if (!std::isfinite(v) || v <= 0.0) {
            throw ValidationError("trajectory rt at compound " + std::to_string(i) + " is not finite and positive");
        }
        if (i > 0 && !(rtt.rts[i - 1] < v)) {
            throw OrderViolationError("trajectory breaks elution order between compounds " +
                                      std::to_string(i - 1) + " and " + std::to_string(i));
        }
    }
}

void RttLibrary::validate() const {
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        try {
            validate_rtt(trajectories[i], catalog.size());
        } catch (const OrderViolationError& e) {
            throw OrderViolationError("trajectory " + std::to_string(i) + ": " + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError("trajectory " + std::to_string(i) + ": " + e.what());
        }
    }
}

RttLibrary build_library(const std::vector<PeakList>& runs, const CompoundCatalog& catalog) {
    RttLibrary lib{catalog, {}};
    lib.trajectories.reserve(runs.size());
    for (std::size_t r = 0; r < runs.size(); ++r) {
        const auto& run = runs[r];
        const std::string name = run.source_id.empty() ? "run " + std::to_string(r) : run.source_id;
        PeakList labeled;
        try {
            labeled = assign_by_elution(run, catalog);
        } catch (const OrderViolationError& e) {
            throw OrderViolationError(name + ": " + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError(name + ": " + e.what());
        }
        lib.trajectories.push_back(Rtt{labeled.rts(), Provenance::measured(name)});
    }
    return lib;
}

Rtt hybridize(const RttLibrary& lib, const std::vector<HybridTerm>& terms) {
    if (terms.empty()) throw ValidationError("hybridization needs at least one term");
    double sum = 0.0;
    for (const auto& t : terms) {
        if (t.index >= lib.trajectories.size()) {
            throw ValidationError("hybrid term refers to trajectory " + std::to_string(t.index) +
                                  " of " + std::to_string(lib.trajectories.size()));
        }
        if (!std::isfinite(t.coefficient)) throw ValidationError("non-finite hybrid coefficient");
        sum += t.coefficient;
    }
    if (std::abs(sum - 1.0) > kAffineTolerance) {
        throw ValidationError("hybrid coefficients sum to " + std::to_string(sum) + ", expected 1");
    }

    const std::size_t n = lib.catalog.size();
    Rtt out{std::vector<double>(n, 0.0), Provenance::hybridized(terms)};
    for (std::size_t c = 0; c < n; ++c) {
        double v = 0.0;
        for (const auto& t : terms) v += t.coefficient * lib.trajectories[t.index].rts.at(c);
        out.rts[c] = v;
    }
    validate_rtt(out, n);
    return out;
}

EnrichResult enrich(const RttLibrary& lib) {
    EnrichResult result{lib, 0};
    std::vector<std::size_t> measured;
    for (std::size_t i = 0; i < lib.trajectories.size(); ++i) {
        if (lib.trajectories[i].provenance.is_measured()) measured.push_back(i);
    }
    static constexpr double kFormulas[3][2] = {{0.5, 0.5}, {2.0, -1.0}, {-1.0, 2.0}};
    for (std::size_t x = 0; x < measured.size(); ++x) {
        for (std::size_t y = x + 1; y < measured.size(); ++y) {
            for (const auto& f : kFormulas) {
                try {
                    result.library.trajectories.push_back(
                        hybridize(lib, {{measured[x], f[0]}, {measured[y], f[1]}}));
                } catch (const OrderViolationError&) {
                    ++result.rejected;
                }
            }
        }
    }
    return result;
}

json save_library(const RttLibrary& lib) {
    json doc;
    doc["version"] = kLibraryFormatVersion;
    json cat = json::array();
    for (const auto& e : lib.catalog.entries()) {
        cat.push_back({{"id", e.id},
                       {"name", e.name},
                       {"role", e.role == Role::Standard ? "standard" : "target"}});
    }
    doc["catalog"] = std::move(cat);
    json traj = json::array();
    for (const auto& t : lib.trajectories) {
        json prov;
        if (t.provenance.is_measured()) {
            prov = {{"kind", "measured"}, {"source", t.provenance.source_id}};
        } else {
            json terms = json::array();
            for (const auto& term : t.provenance.terms) {
                terms.push_back({{"index", term.index}, {"coefficient", term.coefficient}});
            }
            prov = {{"kind", "hybridized"}, {"terms", std::move(terms)}};
        }
        traj.push_back({{"rts", t.rts}, {"provenance", std::move(prov)}});
    }
    doc["trajectories"] = std::move(traj);
    return doc;
}

RttLibrary load_library(const json& doc) {
    try {
        const int version = doc.at("version").get<int>();
        if (version != kLibraryFormatVersion) {
            throw InputError("unsupported library format version " + std::to_string(version));
        }
        std::vector<CatalogEntry> entries;
        for (const auto& e : doc.at("catalog")) {
            const auto role = e.at("role").get<std::string>();
            if (role != "standard" && role != "target") throw InputError("bad catalog role '" + role + "'");
            entries.push_back(CatalogEntry{e.at("id").get<CompoundId>(), e.at("name").get<std::string>(),
                                           role == "standard" ? Role::Standard : Role::Target});
        }
        RttLibrary lib{CompoundCatalog(std::move(entries)), {}};
        for (const auto& t : doc.at("trajectories")) {
            Rtt rtt;
            rtt.rts = t.at("rts").get<std::vector<double>>();
            const auto& prov = t.at("provenance");
            const auto kind = prov.at("kind").get<std::string>();
            if (kind == "measured") {
                rtt.provenance = Provenance::measured(prov.at("source").get<std::string>());
            } else if (kind == "hybridized") {
                std::vector<HybridTerm> terms;
                for (const auto& term : prov.at("terms")) {
                    terms.push_back({term.at("index").get<std::size_t>(), term.at("coefficient").get<double>()});
                }
                rtt.provenance = Provenance::hybridized(std::move(terms));
            } else {
                throw InputError("unknown provenance kind '" + kind + "'");
            }
            lib.trajectories.push_back(std::move(rtt));
        }
        lib.validate();
        return lib;
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed library document: ") + e.what());
    }
}

void save_library_file(const RttLibrary& lib, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write library '" + path + "'");
    out << save_library(lib).dump(2) << '\n';
}

RttLibrary load_library_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open library '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
    return load_library(doc);
}

}  // namespace rtt
