#include <gtest/gtest.h>

#include <cmath>

#include "fitzcal/calibration.hpp"
#include "fitzcal/error.hpp"
#include "fitzcal/splitting.hpp"
#include "fitzcal/synthgen.hpp"
#include "test_util.hpp"

namespace fitzcal {
namespace {

std::vector<ImageSweep> tune_sweeps(const SynthConfig& cfg) {
  const auto images = generate_images(cfg);
  DatasetManifest m;
  for (const auto& img : images) m.records.push_back(img.record);
  const DatasetManifest assigned = split(m, SplitConfig{}).manifest;
  std::vector<ImageSweep> out;
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (assigned.records[i].split != Split::kTune) continue;
    out.push_back(make_sweep(images[i].record.image_id, images[i].record.group,
                             ProbMap::from_raw(images[i].width, images[i].height,
                                               images[i].probs),
                             images[i].mask));
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.image_id < b.image_id; });
  return out;
}

TEST(SynthConfigTest, Validation) {
  SynthConfig cfg;
  cfg.mu_fg = -5;
  EXPECT_THROW(validate(cfg), Error);
  cfg = SynthConfig{};
  cfg.sigma = 0;
  EXPECT_THROW(validate(cfg), Error);
  cfg = SynthConfig{};
  cfg.lesion_fraction = 1.0;
  EXPECT_THROW(validate(cfg), Error);
}

TEST(SynthConfigTest, ShiftSpec) {
  const auto s = parse_shift_spec("VI=1.0,V=0.5");
  EXPECT_EQ(s[GroupLabel::kVI], 1.0);
  EXPECT_EQ(s[GroupLabel::kV], 0.5);
  EXPECT_EQ(s[GroupLabel::kI], 0.0);
  EXPECT_THROW(parse_shift_spec("VII=1"), Error);
  EXPECT_THROW(parse_shift_spec("VI=abc"), Error);
  EXPECT_THROW(parse_shift_spec("VI"), Error);
}

TEST(SynthgenTest, LesionAreaWithinOneRow) {
  for (std::uint32_t w : {1u, 5u, 17u, 64u, 100u}) {
    for (std::uint32_t h : {1u, 9u, 64u}) {
      for (double f : {0.01, 0.04, 0.25, 0.5, 0.9}) {
        SynthConfig cfg;
        cfg.width = w;
        cfg.height = h;
        cfg.lesion_fraction = f;
        const LesionSize s = lesion_size(cfg);
        EXPECT_LE(s.width, w);
        EXPECT_LE(s.height, h);
        EXPECT_LE(std::abs(double(s.width) * s.height - f * w * h), double(w))
            << w << "x" << h << " f=" << f;
      }
    }
  }
}

TEST(SynthgenTest, MaskMatchesRectangleAndProbsAreValid) {
  SynthConfig cfg;
  cfg.images_per_group = 2;
  cfg.width = 20;
  cfg.height = 10;
  cfg.lesion_fraction = 0.2;
  const auto images = generate_images(cfg);
  ASSERT_EQ(images.size(), 12u);
  const LesionSize s = lesion_size(cfg);
  for (const auto& img : images) {
    std::size_t fg = 0;
    for (auto l : img.mask.labels()) fg += l;
    EXPECT_EQ(fg, std::size_t{s.width} * s.height);
    for (float p : img.probs) {
      ASSERT_GE(p, 0.0f);
      ASSERT_LE(p, 1.0f);
    }
    EXPECT_EQ(img.record.patient_id.substr(0, 4), "pat-");
  }
  EXPECT_EQ(images.front().record.group, GroupLabel::kI);
  EXPECT_EQ(images.back().record.group, GroupLabel::kVI);
}

TEST(SynthgenTest, SameConfigSameBytes) {
  testing::TempDir a("synth-a");
  testing::TempDir b("synth-b");
  SynthConfig cfg;
  cfg.images_per_group = 2;
  cfg.width = 16;
  cfg.height = 16;
  const DatasetManifest ma = generate(cfg, a.path());
  generate(cfg, b.path());
  for (const auto& r : ma.records) {
    EXPECT_EQ(read_file_bytes(a.path() / r.prob_path), read_file_bytes(b.path() / r.prob_path));
    EXPECT_EQ(read_file_bytes(a.path() / r.mask_path), read_file_bytes(b.path() / r.mask_path));
  }
  EXPECT_EQ(read_file_bytes(a.path() / "manifest.csv"),
            read_file_bytes(b.path() / "manifest.csv"));
  const DatasetManifest loaded = load_manifest(a.path() / "manifest.csv");
  EXPECT_EQ(loaded.records, ma.records);
  cfg.seed = 1;
  EXPECT_NE(generate_images(cfg)[0].probs, generate_images(SynthConfig{})[0].probs);
}

TEST(SynthgenTest, WellSeparatedOptimumNearHalf) {
  SynthConfig cfg;
  cfg.shift_by_group = PerGroup<double>(0.0);
  cfg.sigma = 0.05;
  cfg.images_per_group = 1;
  cfg.width = 32;
  cfg.height = 32;
  for (const auto& img : generate_images(cfg)) {
    const ProbMap p = ProbMap::from_raw(img.width, img.height, img.probs);
    const MetricCurve c = curve_fast(p, img.mask, Metric::kDice);
    EXPECT_EQ(c.at(Threshold::from_value(0.5)), 1.0);
  }
}

// Larger logit shift pushes the group's tuning optimum down (weakly), checked
// over several seeds.
TEST(SynthgenTest, ShiftLowersGroupOptimum) {
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    std::optional<Threshold> previous;
    for (double delta : {0.0, 0.5, 1.0}) {
      SynthConfig cfg;
      cfg.seed = seed;
      cfg.images_per_group = 20;
      cfg.width = 48;
      cfg.height = 48;
      cfg.shift_by_group = PerGroup<double>(0.0);
      cfg.shift_by_group[GroupLabel::kVI] = delta;
      const auto tune = tune_sweeps(cfg);
      const auto ops = select_optima(tune, Metric::kDice, AggregationMode::kMacro);
      const Threshold t = ops.tau_by_group[GroupLabel::kVI];
      if (previous) {
        EXPECT_LE(t, *previous) << "seed " << seed << " delta " << delta;
      }
      previous = t;
    }
  }
}

}  // namespace
}  // namespace fitzcal
