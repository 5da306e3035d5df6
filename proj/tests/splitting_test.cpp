#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "fitzcal/error.hpp"
#include "fitzcal/prng.hpp"
#include "fitzcal/splitting.hpp"

namespace fitzcal {
namespace {

ImageRecord rec(std::string image, std::string patient, GroupLabel g) {
  ImageRecord r;
  r.image_id = std::move(image);
  r.patient_id = std::move(patient);
  r.group = g;
  r.prob_path = r.image_id + ".fpm";
  r.mask_path = r.image_id + ".fbm";
  return r;
}

DatasetManifest sample_manifest() {
  DatasetManifest m;
  int img = 0;
  const std::array<int, 6> patients = {13, 40, 21, 9, 7, 3};
  for (GroupLabel g : kAllGroups) {
    for (int p = 0; p < patients[group_index(g)]; ++p) {
      const std::string pid = "pat-" + std::string(group_token(g)) + "-" + std::to_string(p);
      // Some patients contribute several images.
      for (int k = 0; k <= p % 3; ++k) {
        m.records.push_back(rec("img" + std::to_string(img++), pid, g));
      }
    }
  }
  return m;
}

TEST(SplitMixTest, ReferenceOutputs) {
  // Reference stream for state 0.
  SplitMix64 rng(0);
  EXPECT_EQ(rng.next(), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(rng.next(), 0x6E789E6AA1B965F4ULL);
  EXPECT_EQ(rng.next(), 0x06C45D188009454FULL);
  EXPECT_EQ(stratum_state(0, GroupLabel::kVI), 0x53CB9F0C747EA2EAULL);
}

TEST(SplitMixTest, BoundedStaysInRange) {
  SplitMix64 rng(123);
  for (std::uint64_t bound : {1ULL, 2ULL, 3ULL, 7ULL, 1000ULL, (1ULL << 63) + 5}) {
    for (int i = 0; i < 200; ++i) ASSERT_LT(rng.bounded(bound), bound);
  }
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform_open0();
    ASSERT_GT(u, 0.0);
    ASSERT_LE(u, 1.0);
  }
}

TEST(ShuffleTest, FrozenPermutation) {
  // Computed by an independent re-implementation of the pinned procedure.
  std::vector<std::string> items;
  for (int i = 0; i < 10; ++i) items.push_back("p0" + std::to_string(i));
  shuffle(items, stratum_state(0, GroupLabel::kVI));
  EXPECT_EQ(items, (std::vector<std::string>{"p08", "p09", "p07", "p03", "p02", "p01",
                                             "p00", "p05", "p06", "p04"}));
}

TEST(AssignPatientGroupTest, ModalWithDarkerTies) {
  std::vector<ImageRecord> r = {rec("a", "p", GroupLabel::kVI), rec("b", "p", GroupLabel::kVI),
                                rec("c", "p", GroupLabel::kV)};
  EXPECT_EQ(assign_patient_group(r), GroupLabel::kVI);
  r = {rec("a", "p", GroupLabel::kII), rec("b", "p", GroupLabel::kIV)};
  EXPECT_EQ(assign_patient_group(r), GroupLabel::kIV);
  r = {rec("a", "p", GroupLabel::kI)};
  EXPECT_EQ(assign_patient_group(r), GroupLabel::kI);
}

TEST(ApportionTest, Examples) {
  const std::array<double, 3> f = {0.30, 0.30, 0.40};
  EXPECT_EQ(apportion(10, f), (std::array<std::size_t, 3>{3, 3, 4}));
  EXPECT_EQ(apportion(7, f), (std::array<std::size_t, 3>{2, 2, 3}));
  EXPECT_EQ(apportion(1, f), (std::array<std::size_t, 3>{0, 0, 1}));
  EXPECT_EQ(apportion(0, f), (std::array<std::size_t, 3>{0, 0, 0}));
  EXPECT_THROW(apportion(5, {0.5, 0.5, 0.5}), Error);
  EXPECT_THROW(apportion(5, {0.5, 0.5, 0.0}), Error);
}

TEST(ApportionTest, DeviationBelowOne) {
  const std::array<double, 3> f = {0.30, 0.30, 0.40};
  for (std::size_t n = 1; n <= 500; ++n) {
    const auto c = apportion(n, f);
    ASSERT_EQ(c[0] + c[1] + c[2], n);
    for (int i = 0; i < 3; ++i) ASSERT_LT(std::abs(c[i] - n * f[i]), 1.0) << n;
  }
}

TEST(SplitTest, DeterministicDisjointAndComplete) {
  const DatasetManifest m = sample_manifest();
  const SplitResult a = split(m, SplitConfig{});
  const SplitResult b = split(m, SplitConfig{});
  EXPECT_EQ(serialize_manifest(a.manifest), serialize_manifest(b.manifest));
  // Input untouched.
  for (const auto& r : m.records) EXPECT_EQ(r.split, Split::kUnassigned);

  const SplitReport report = verify_split(a.manifest);
  std::map<std::string, Split> where;
  for (const auto& r : a.manifest.records) {
    ASSERT_NE(r.split, Split::kUnassigned);
    const auto [it, fresh] = where.emplace(r.patient_id, r.split);
    if (!fresh) {
      EXPECT_EQ(it->second, r.split);
    }
  }
  // Patient-level apportionment per stratum.
  const std::array<int, 6> patients = {13, 40, 21, 9, 7, 3};
  for (GroupLabel g : kAllGroups) {
    const auto expected = apportion(patients[group_index(g)], {0.3, 0.3, 0.4});
    EXPECT_EQ(report.patient_counts[g], expected) << group_token(g);
  }

  SplitConfig other;
  other.seed = 1;
  EXPECT_NE(serialize_manifest(split(m, other).manifest), serialize_manifest(a.manifest));
}

TEST(SplitTest, TinyStrataWarn) {
  DatasetManifest m;
  m.records.push_back(rec("a", "p1", GroupLabel::kVI));
  const SplitResult r = split(m, SplitConfig{});
  EXPECT_EQ(r.manifest.records[0].split, Split::kTest);
  EXPECT_EQ(r.warnings.size(), 2u);
}

TEST(VerifySplitTest, DetectsLeakageAndUnassigned) {
  DatasetManifest m = split(sample_manifest(), SplitConfig{}).manifest;
  DatasetManifest leaky = m;
  leaky.records.push_back(rec("extra", "pA", GroupLabel::kII));
  leaky.records.back().split = Split::kTrain;
  leaky.records.push_back(rec("extra2", "pA", GroupLabel::kII));
  leaky.records.back().split = Split::kTest;
  try {
    verify_split(leaky);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "split-leakage");
    EXPECT_NE(std::string(e.what()).find("pA"), std::string::npos);
  }
  m.records[3].split = Split::kUnassigned;
  try {
    verify_split(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "unassigned-records");
  }
}

}  // namespace
}  // namespace fitzcal
