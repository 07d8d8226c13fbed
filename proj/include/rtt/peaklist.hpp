#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rtt {

/// Index into a CompoundCatalog; ids follow elution order.
using CompoundId = std::int32_t;

/// Label value marking a peak as an interferent.
inline constexpr CompoundId kInterferent = -1;

enum class Role : std::uint8_t { Target, Standard };

struct CatalogEntry {
    CompoundId id = 0;
    std::string name;
    Role role = Role::Target;
};

/// Ordered compound list shared by every trajectory, sample and test.
class CompoundCatalog {
public:
    CompoundCatalog() = default;

    /// Entries must carry ids 0..n-1 in order and at least one target.
    explicit CompoundCatalog(std::vector<CatalogEntry> entries);

    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
    [[nodiscard]] const std::vector<CatalogEntry>& entries() const noexcept { return entries_; }
    [[nodiscard]] const CatalogEntry& at(CompoundId id) const;

    [[nodiscard]] bool is_standard(CompoundId id) const;
    [[nodiscard]] bool is_target(CompoundId id) const { return !is_standard(id); }

    /// Standard ids in elution order.
    [[nodiscard]] const std::vector<CompoundId>& standards() const noexcept { return standards_; }
    [[nodiscard]] const std::vector<CompoundId>& targets() const noexcept { return targets_; }
    [[nodiscard]] std::size_t n_std() const noexcept { return standards_.size(); }
    [[nodiscard]] std::size_t n_tgt() const noexcept { return targets_.size(); }

    /// Resolves a label token: `std<k>` (1-based), `INTERFERENT`, a numeric
    /// id, or a unique compound name. Returns nullopt when nothing matches.
    [[nodiscard]] std::optional<CompoundId> resolve(std::string_view token) const;

    /// Canonical label text for an id: `std<k>`, the name when unique,
    /// otherwise the numeric id.
    [[nodiscard]] std::string label_of(CompoundId id) const;

    friend bool operator==(const CompoundCatalog&, const CompoundCatalog&);

private:
    std::vector<CatalogEntry> entries_;
    std::vector<CompoundId> standards_;
    std::vector<CompoundId> targets_;
};

bool operator==(const CatalogEntry& a, const CatalogEntry& b);

struct Peak {
    double rt = 0.0;                    // seconds
    std::optional<double> height;
    std::optional<CompoundId> label;    // kInterferent for interferents
};

struct PeakList {
    std::string source_id;
    std::vector<Peak> peaks;

    [[nodiscard]] std::size_t size() const noexcept { return peaks.size(); }
    [[nodiscard]] std::vector<double> rts() const;
};

/// Throws OrderViolationError unless rts are finite, positive and strictly
/// increasing.
void validate_peaklist(const PeakList& list);

/// Peaks of one sample run split into anchored standards and unknowns.
struct SamplePeaks {
    std::map<CompoundId, double> standards;
    std::vector<double> unknowns;

    [[nodiscard]] std::size_t n_sample() const noexcept { return unknowns.size(); }
};

/// Checks the sample against a catalog: unknowns strictly increasing,
/// standard rts ordered like the catalog and disjoint from unknowns. When
/// `require_all_standards` is set every catalog standard must be present.
void validate_sample(const SamplePeaks& sample, const CompoundCatalog& catalog,
                     bool require_all_standards);

enum class PeakListFormat {
    Csv,    // header `rt,height,label`
    Plain,  // one retention time per line
};

/// Parses a peak list and sorts it by rt. Label tokens are resolved against
/// `catalog`; without one only numeric ids and `INTERFERENT` are accepted.
/// Duplicate rts raise OrderViolationError.
PeakList parse_peaklist(std::istream& in, PeakListFormat format = PeakListFormat::Csv,
                        const CompoundCatalog* catalog = nullptr,
                        std::string source_id = {});

/// Writes the CSV form; rts and heights use 4 decimal places.
void write_peaklist(std::ostream& out, const PeakList& list,
                    const CompoundCatalog* catalog = nullptr);

CompoundCatalog parse_catalog(std::istream& in);
void write_catalog(std::ostream& out, const CompoundCatalog& catalog);

PeakList load_peaklist_file(const std::string& path, const CompoundCatalog* catalog = nullptr);
CompoundCatalog load_catalog_file(const std::string& path);

/// Binds every catalog standard to one peak: the explicitly labeled one, or
/// else the unique unlabeled peak within `std_window` of its hint. Remaining
/// non-standard peaks become unknowns.
SamplePeaks extract_sample(const PeakList& peaks, const CompoundCatalog& catalog,
                           const std::map<CompoundId, double>& std_hints,
                           double std_window);

/// Labels the i-th peak of a full-composition run with catalog id i.
PeakList assign_by_elution(const PeakList& peaks, const CompoundCatalog& catalog);

}  // namespace rtt
