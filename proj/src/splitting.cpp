#include "fitzcal/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "fitzcal/error.hpp"
#include "fitzcal/prng.hpp"

namespace fitzcal {
namespace {

constexpr std::array<Split, 3> kSplitOrder = {Split::kTrain, Split::kTune,
                                              Split::kTest};
constexpr std::uint64_t kFractionScale = 1'000'000;

std::size_t split_slot(Split s) {
  switch (s) {
    case Split::kTrain:
      return 0;
    case Split::kTune:
      return 1;
    case Split::kTest:
      return 2;
    case Split::kUnassigned:
      break;
  }
  return 3;
}

}  // namespace

std::uint64_t stratum_state(std::uint64_t seed, GroupLabel group) {
  return mix64(seed +
               kSplitMixGamma * static_cast<std::uint64_t>(group_ordinal(group)));
}

GroupLabel assign_patient_group(std::span<const ImageRecord> records) {
  PerGroup<std::size_t> votes(0);
  for (const auto& r : records) ++votes[r.group];
  GroupLabel best = GroupLabel::kI;
  for (GroupLabel g : kAllGroups) {
    if (votes[g] >= votes[best]) best = g;
  }
  return best;
}

std::array<std::size_t, 3> apportion(std::size_t n,
                                     const std::array<double, 3>& fractions) {
  std::array<std::uint64_t, 3> parts{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!(fractions[i] > 0.0)) {
      throw UsageError("bad-fractions", "split fractions must be positive");
    }
    parts[i] = static_cast<std::uint64_t>(
        std::llround(fractions[i] * static_cast<double>(kFractionScale)));
  }
  if (parts[0] + parts[1] + parts[2] != kFractionScale) {
    throw UsageError("bad-fractions", "split fractions must sum to 1");
  }

  std::array<std::size_t, 3> counts{};
  std::array<std::uint64_t, 3> remainders{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const std::uint64_t scaled = static_cast<std::uint64_t>(n) * parts[i];
    counts[i] = static_cast<std::size_t>(scaled / kFractionScale);
    remainders[i] = scaled % kFractionScale;
    assigned += counts[i];
  }
  std::array<std::size_t, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainders[a] > remainders[b];
  });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++counts[order[i]];
  return counts;
}

void shuffle(std::vector<std::string>& items, std::uint64_t state) {
  SplitMix64 rng(state);
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.bounded(i));
    std::swap(items[i - 1], items[j]);
  }
}

SplitResult split(const DatasetManifest& manifest, const SplitConfig& cfg) {
  std::map<std::string, std::vector<ImageRecord>> by_patient;
  for (const auto& r : manifest.records) by_patient[r.patient_id].push_back(r);

  PerGroup<std::vector<std::string>> strata;
  for (const auto& [patient, records] : by_patient) {
    // std::map iteration leaves each stratum sorted ascending.
    strata[assign_patient_group(records)].push_back(patient);
  }

  SplitResult result;
  std::map<std::string, Split> patient_split;
  for (GroupLabel g : kAllGroups) {
    auto& patients = strata[g];
    if (patients.empty()) continue;
    shuffle(patients, stratum_state(cfg.seed, g));
    const auto counts = apportion(patients.size(), cfg.fractions);
    std::size_t pos = 0;
    for (std::size_t s = 0; s < 3; ++s) {
      for (std::size_t i = 0; i < counts[s]; ++i) {
        patient_split[patients[pos++]] = kSplitOrder[s];
      }
      if (counts[s] == 0) {
        result.warnings.push_back(
            "group " + std::string(group_token(g)) + " (" +
            std::to_string(patients.size()) + " patients) has no patients in " +
            std::string(split_token(kSplitOrder[s])));
      }
    }
  }

  result.manifest = manifest;
  for (auto& r : result.manifest.records) r.split = patient_split.at(r.patient_id);
  return result;
}

SplitReport verify_split(const DatasetManifest& manifest) {
  SplitReport report;
  report.image_counts = PerGroup<std::array<std::size_t, 3>>({0, 0, 0});
  report.patient_counts = PerGroup<std::array<std::size_t, 3>>({0, 0, 0});

  std::map<std::string, std::pair<Split, GroupLabel>> seen;
  for (const auto& r : manifest.records) {
    if (r.split == Split::kUnassigned) {
      throw DataError("unassigned-records",
                      "image '" + r.image_id +
                          "' has no split; run split before verifying");
    }
    const auto [it, inserted] = seen.try_emplace(r.patient_id, r.split, r.group);
    if (!inserted && it->second.first != r.split) {
      throw DataError("split-leakage",
                      "patient '" + r.patient_id + "' appears in both " +
                          std::string(split_token(it->second.first)) + " and " +
                          std::string(split_token(r.split)));
    }
    ++report.image_counts[r.group][split_slot(r.split)];
  }

  std::map<std::string, std::vector<ImageRecord>> by_patient;
  for (const auto& r : manifest.records) by_patient[r.patient_id].push_back(r);
  for (const auto& [patient, records] : by_patient) {
    ++report.patient_counts[assign_patient_group(records)]
                           [split_slot(records.front().split)];
  }
  return report;
}

}  // namespace fitzcal
