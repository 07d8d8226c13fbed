#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"

#include "rtt/peaklist.hpp"

namespace rtt {

struct HybridTerm {
    std::size_t index = 0;      // trajectory index in the parent library
    double coefficient = 0.0;

    friend bool operator==(const HybridTerm&, const HybridTerm&) = default;
};

struct Provenance {
    enum class Kind { Measured, Hybridized };

    Kind kind = Kind::Measured;
    std::string source_id;          // measured runs
    std::vector<HybridTerm> terms;  // hybrids

    static Provenance measured(std::string source) { return {Kind::Measured, std::move(source), {}}; }
    static Provenance hybridized(std::vector<HybridTerm> terms) { return {Kind::Hybridized, {}, std::move(terms)}; }

    [[nodiscard]] bool is_measured() const noexcept { return kind == Kind::Measured; }
    /// Short human-readable description, e.g. `chrom1.csv` or `0.5*#0 + 0.5*#3`.
    [[nodiscard]] std::string describe() const;

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// Retention-time trajectory: one rt per catalog compound, in catalog order.
struct Rtt {
    std::vector<double> rts;
    Provenance provenance;

    [[nodiscard]] double rt(CompoundId id) const { return rts.at(static_cast<std::size_t>(id)); }

    friend bool operator==(const Rtt&, const Rtt&) = default;
};

/// Throws OrderViolationError unless `rtt` has `n` finite, positive and
/// strictly increasing rts.
void validate_rtt(const Rtt& rtt, std::size_t n);

struct RttLibrary {
    CompoundCatalog catalog;
    std::vector<Rtt> trajectories;

    [[nodiscard]] std::size_t n_lib() const noexcept { return trajectories.size(); }
    /// An empty library loads fine but cannot be matched against.
    [[nodiscard]] bool usable() const noexcept { return !trajectories.empty(); }

    void validate() const;

    friend bool operator==(const RttLibrary&, const RttLibrary&) = default;
};

/// One measured trajectory per full-composition run.
RttLibrary build_library(const std::vector<PeakList>& runs, const CompoundCatalog& catalog);

/// Tolerance on the affine constraint sum(coefficients) == 1.
inline constexpr double kAffineTolerance = 1e-9;

/// Affine combination of library trajectories, rejected (OrderViolationError)
/// when the result breaks elution order.
Rtt hybridize(const RttLibrary& lib, const std::vector<HybridTerm>& terms);

struct EnrichResult {
    RttLibrary library;
    std::size_t rejected = 0;   // hybrids skipped for breaking elution order
};

/// Appends the (1/2, 1/2), (2, -1) and (-1, 2) hybrids of every unordered
/// pair of measured trajectories. Pairs run in lexicographic index order.
EnrichResult enrich(const RttLibrary& lib);

inline constexpr int kLibraryFormatVersion = 1;

nlohmann::json save_library(const RttLibrary& lib);
RttLibrary load_library(const nlohmann::json& doc);

void save_library_file(const RttLibrary& lib, const std::string& path);
RttLibrary load_library_file(const std::string& path);

}  // namespace rtt
