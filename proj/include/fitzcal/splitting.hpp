#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fitzcal/data_model.hpp"
#include "fitzcal/group.hpp"

namespace fitzcal {

struct SplitConfig {
  std::uint64_t seed = 0;
  // (train, tune, test)
  std::array<double, 3> fractions = {0.30, 0.30, 0.40};
};

// Initial splitmix64 state for one stratum:
//   mix64(seed + gamma * ordinal(group))
std::uint64_t stratum_state(std::uint64_t seed, GroupLabel group);

// Modal group over a patient's images; ties go to the darker group.
GroupLabel assign_patient_group(std::span<const ImageRecord> records);

// Largest-remainder apportionment of n over the fractions. Remainder ties go
// to the earlier split (train, then tune, then test). Fractions are resolved
// to parts-per-million so the arithmetic is exact integer math.
std::array<std::size_t, 3> apportion(std::size_t n,
                                     const std::array<double, 3>& fractions);

// In-place Fisher-Yates shuffle driven by rejection-sampled bounded draws.
void shuffle(std::vector<std::string>& items, std::uint64_t state);

struct SplitResult {
  DatasetManifest manifest;
  // Human-readable notes for strata where some split received no patients.
  std::vector<std::string> warnings;
};

// Patient-level, group-stratified assignment. Strata are processed in
// ascending group order; within each, patient ids are sorted, shuffled, and
// cut into contiguous train/tune/test runs. Never mutates the input.
SplitResult split(const DatasetManifest& manifest, const SplitConfig& cfg);

struct SplitReport {
  // counts[group][split] in images; split index 0 train, 1 tune, 2 test.
  PerGroup<std::array<std::size_t, 3>> image_counts;
  PerGroup<std::array<std::size_t, 3>> patient_counts;
};

// Throws a data error ("split-leakage" naming the patient, or
// "unassigned-records") on failure.
SplitReport verify_split(const DatasetManifest& manifest);

}  // namespace fitzcal
