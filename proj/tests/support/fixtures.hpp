#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "rtt/library.hpp"
#include "rtt/matcher.hpp"
#include "rtt/peaklist.hpp"
#include "rtt/testgen.hpp"

namespace fixtures {

/// Published full-composition retention times (s), 22 peaks each, in
/// elution order; peaks 16 and 21 are the two internal standards.
extern const std::vector<double> kChrom1;
extern const std::vector<double> kChrom8;
extern const std::vector<double> kChrom9;

/// The 22-compound catalog (20 targets, 2 standards) shared by those runs.
rtt::CompoundCatalog gc_catalog();

/// Catalog id of target number k (1-based, as numbered in the published tables).
rtt::CompoundId target(int k);

/// Test 5: targets 7, 9, 14, 16, 18 drawn from Chrom8 plus both standards.
rtt::TestCase test5();
/// Test 7: Test 5 plus an interferent at 340 s.
rtt::TestCase test7();

/// Library of seeded drift simulations around `base`, each accepted by
/// drift_simulate. `amplitude_fraction` scales the bumps.
rtt::RttLibrary drift_library(const rtt::CompoundCatalog& catalog, const std::vector<double>& base, std::size_t n,
                              std::uint64_t seed, double amplitude_fraction = 0.01);

/// Small synthetic catalog: `n_tgt` targets with `n_std` standards spread
/// through the elution order.
rtt::CompoundCatalog synthetic_catalog(std::size_t n_tgt, std::size_t n_std);

/// Strictly increasing rts with gaps drawn from [min_gap, max_gap].
std::vector<double> random_rts(std::size_t n, std::mt19937_64& rng, double start = 10.0, double min_gap = 8.0,
                               double max_gap = 40.0);

}  // namespace fixtures
