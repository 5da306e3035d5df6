#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "fitzcal/data_model.hpp"
#include "fitzcal/group.hpp"

namespace fitzcal {

// Logit-shift generative model. Each image has one rectangular lesion; a
// pixel's probability is logistic(mu - shift[group] + sigma * z) with
// mu = mu_fg inside the lesion and mu_bg outside, z standard normal.
struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t images_per_group = 30;
  std::uint32_t width = 64;
  std::uint32_t height = 64;
  double lesion_fraction = 0.04;
  double mu_fg = 3.0;
  double mu_bg = -3.0;
  double sigma = 1.5;
  PerGroup<double> shift_by_group = default_shift();

  static PerGroup<double> default_shift() {
    PerGroup<double> s(0.0);
    s[GroupLabel::kVI] = 1.0;
    return s;
  }
};

// Throws a usage error when mu_fg <= mu_bg, sigma <= 0, lesion_fraction is
// outside (0, 1), or the image is empty.
void validate(const SynthConfig& cfg);

// Parses "VI=1.0,V=0.5"; unnamed groups get 0.
PerGroup<double> parse_shift_spec(std::string_view spec);

struct SynthImage {
  ImageRecord record;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<float> probs;  // raw, row-major
  BinaryMask mask;
};

// Lesion rectangle size for the configured fraction: width
// round(sqrt(f) * W), height round(f * W * H / rect_width), each clamped to
// the image.
struct LesionSize {
  std::uint32_t width;
  std::uint32_t height;
};
LesionSize lesion_size(const SynthConfig& cfg);

// Deterministic generation. One splitmix64 stream seeded with cfg.seed is
// consumed in group order I..VI, image index order within a group. Per
// image: two bounded draws place the lesion (x then y), then pixels are
// visited row-major; each pair of pixels consumes two uniforms (u1, u2) in
// (0, 1] and receives the Box-Muller pair
//   z0 = sqrt(-2 ln u1) cos(2 pi u2), z1 = sqrt(-2 ln u1) sin(2 pi u2).
// An odd final pixel uses z0 and discards z1.
std::vector<SynthImage> generate_images(const SynthConfig& cfg);

// Writes probs/<id>.fpm, masks/<id>.fbm and manifest.csv under out_dir and
// returns the manifest (paths relative to out_dir).
DatasetManifest generate(const SynthConfig& cfg,
                         const std::filesystem::path& out_dir);

}  // namespace fitzcal
