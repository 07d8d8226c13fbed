#include "fixtures.hpp"

#include <string>

namespace fixtures {

const std::vector<double> kChrom1 = {13.9,  19.0,  23.7,  33.6,  43.9,  53.6,  86.2,  94.4,  109.2, 115.9, 140.2,
                                     184.8, 196.5, 214.4, 265.2, 275.8, 382.1, 413.4, 429.3, 441.8, 490.5, 617.6};
const std::vector<double> kChrom8 = {14.1,  19.2,  23.9,  34.1,  44.6,  54.6,  87.9,  96.2,  111.4, 118.2, 142.9,
                                     188.4, 200.4, 218.6, 270.3, 281.4, 384.8, 416.6, 432.6, 445.4, 494.5, 620.3};
const std::vector<double> kChrom9 = {11.9,  17.3,  21.5,  31.2,  40.9,  50.1,  80.8,  88.6,  102.8, 108.6, 131.6,
                                     173.5, 184.5, 201.4, 248.8, 258.6, 367.8, 393.7, 407.7, 419.1, 464.5, 588.1};

rtt::CompoundCatalog gc_catalog() {
    const char* names[] = {"Unknown 1",
                           "1,1-Dichloroethene",
                           "Unknown 3",
                           "cis-1,2-Dichloroethene",
                           "Benzene",
                           "Trichloroethylene",
                           "cis-1,3-Dichloropropene",
                           "Toluene",
                           "Tetrachloroethylene",
                           "trans-1,3-Dichloropropene",
                           "1,2-Dibromoethane",
                           "Chlorobenzene",
                           "Ethylbenzene",
                           "m,p-Xylene",
                           "o-Xylene",
                           "Styrene",
                           "1,3,5-Trimethylbenzene",
                           "1,2,4-Trimethylbenzene",
                           "1,3-Dichlorobenzene",
                           "1,4-Dichlorobenzene",
                           "1,2-Dichlorobenzene",
                           "Hexachloro-1,3-Butadiene"};
    std::vector<rtt::CatalogEntry> entries;
    for (int i = 0; i < 22; ++i) {
        entries.push_back({i, names[i], (i == 15 || i == 20) ? rtt::Role::Standard : rtt::Role::Target});
    }
    return rtt::CompoundCatalog(entries);
}

rtt::CompoundId target(int k) {
    // Targets 1-15 precede std1, 16-19 sit between the standards, 20 is last.
    if (k <= 15) return k - 1;
    if (k <= 19) return k;
    return 21;
}

rtt::TestCase test5() {
    const auto catalog = gc_catalog();
    const rtt::Rtt run{kChrom8, rtt::Provenance::measured("chrom8")};
    return rtt::make_test(run, catalog, {target(7), target(9), target(14), target(16), target(18)}, "test5");
}

rtt::TestCase test7() { return rtt::inject_interferents(test5(), {340.0}); }

rtt::RttLibrary drift_library(const rtt::CompoundCatalog& catalog, const std::vector<double>& base, std::size_t n,
                              std::uint64_t seed, double amplitude_fraction) {
    rtt::RttLibrary lib{catalog, {}};
    const rtt::Rtt b{base, rtt::Provenance::measured("base")};
    std::uint64_t s = seed;
    while (lib.trajectories.size() < n) {
        const auto model = rtt::DriftModel::random(s++, base.front(), base.back(), 3, amplitude_fraction);
        try {
            auto t = rtt::drift_simulate(b, model);
            t.provenance = rtt::Provenance::measured("sim" + std::to_string(lib.trajectories.size()));
            lib.trajectories.push_back(std::move(t));
        } catch (const rtt::OrderViolationError&) {
        }
    }
    return lib;
}

rtt::CompoundCatalog synthetic_catalog(std::size_t n_tgt, std::size_t n_std) {
    const std::size_t n = n_tgt + n_std;
    std::vector<rtt::CatalogEntry> entries;
    for (std::size_t i = 0; i < n; ++i) entries.push_back({static_cast<rtt::CompoundId>(i), "c" + std::to_string(i), rtt::Role::Target});
    // Standards at evenly spread interior-ish positions, never all at the front.
    for (std::size_t k = 0; k < n_std; ++k) {
        const std::size_t pos = (k + 1) * n / (n_std + 1);
        entries[std::min(pos, n - 1)].role = rtt::Role::Standard;
    }
    return rtt::CompoundCatalog(entries);
}

std::vector<double> random_rts(std::size_t n, std::mt19937_64& rng, double start, double min_gap, double max_gap) {
    std::uniform_real_distribution<double> gap(min_gap, max_gap);
    std::vector<double> out;
    double t = start;
    for (std::size_t i = 0; i < n; ++i) {
        t += gap(rng);
        out.push_back(t);
    }
    return out;
}

}  // namespace fixtures
