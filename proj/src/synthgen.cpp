#include "fitzcal/synthgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "fitzcal/error.hpp"
#include "fitzcal/prng.hpp"

namespace fitzcal {
namespace {

std::string image_name(GroupLabel g, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s-%04zu",
                std::string(group_token(g)).c_str(), index);
  return buf;
}

float pixel_probability(double mu, double shift, double sigma, double z) {
  const double logit = mu - shift + sigma * z;
  return static_cast<float>(1.0 / (1.0 + std::exp(-logit)));
}

}  // namespace

void validate(const SynthConfig& cfg) {
  if (!(cfg.mu_fg > cfg.mu_bg)) {
    throw UsageError("bad-synth-config", "mu_fg must exceed mu_bg");
  }
  if (!(cfg.sigma > 0.0)) {
    throw UsageError("bad-synth-config", "sigma must be positive");
  }
  if (!(cfg.lesion_fraction > 0.0 && cfg.lesion_fraction < 1.0)) {
    throw UsageError("bad-synth-config", "lesion fraction must be in (0, 1)");
  }
  if (cfg.width == 0 || cfg.height == 0) {
    throw UsageError("bad-synth-config", "image size must be at least 1x1");
  }
}

PerGroup<double> parse_shift_spec(std::string_view spec) {
  PerGroup<double> out(0.0);
  while (!spec.empty()) {
    const auto comma = spec.find(',');
    const std::string_view item = spec.substr(0, comma);
    spec = comma == std::string_view::npos ? std::string_view{}
                                           : spec.substr(comma + 1);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    const auto group = parse_group(item.substr(0, eq));
    if (eq == std::string_view::npos || !group) {
      throw UsageError("bad-shift", "expected GROUP=VALUE, got '" +
                                        std::string(item) + "'");
    }
    const std::string value(item.substr(eq + 1));
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (value.empty() || end != value.c_str() + value.size() || !std::isfinite(v)) {
      throw UsageError("bad-shift", "bad shift value '" + value + "'");
    }
    out[*group] = v;
  }
  return out;
}

LesionSize lesion_size(const SynthConfig& cfg) {
  const double area = cfg.lesion_fraction * cfg.width * cfg.height;
  const auto rw = static_cast<std::uint32_t>(std::clamp<double>(
      std::round(std::sqrt(cfg.lesion_fraction) * cfg.width), 1.0, cfg.width));
  const auto rh = static_cast<std::uint32_t>(
      std::clamp<double>(std::round(area / rw), 1.0, cfg.height));
  return {rw, rh};
}

std::vector<SynthImage> generate_images(const SynthConfig& cfg) {
  validate(cfg);
  const LesionSize lesion = lesion_size(cfg);
  const std::size_t n = std::size_t{cfg.width} * cfg.height;
  SplitMix64 rng(cfg.seed);

  std::vector<SynthImage> images;
  images.reserve(kNumGroups * cfg.images_per_group);
  for (GroupLabel g : kAllGroups) {
    const double shift = cfg.shift_by_group[g];
    for (std::size_t i = 0; i < cfg.images_per_group; ++i) {
      SynthImage img;
      const std::string name = image_name(g, i);
      img.record.image_id = "img-" + name;
      img.record.patient_id = "pat-" + name;
      img.record.group = g;
      img.record.prob_path = "probs/" + img.record.image_id + ".fpm";
      img.record.mask_path = "masks/" + img.record.image_id + ".fbm";
      img.width = cfg.width;
      img.height = cfg.height;

      const auto x0 = static_cast<std::uint32_t>(
          rng.bounded(cfg.width - lesion.width + 1));
      const auto y0 = static_cast<std::uint32_t>(
          rng.bounded(cfg.height - lesion.height + 1));
      std::vector<std::uint8_t> labels(n, 0);
      for (std::uint32_t y = y0; y < y0 + lesion.height; ++y) {
        std::fill_n(labels.begin() + std::size_t{y} * cfg.width + x0,
                    lesion.width, std::uint8_t{1});
      }

      img.probs.resize(n);
      for (std::size_t p = 0; p < n; p += 2) {
        const double u1 = rng.uniform_open0();
        const double u2 = rng.uniform_open0();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        const double z0 = radius * std::cos(angle);
        const double z1 = radius * std::sin(angle);
        img.probs[p] = pixel_probability(labels[p] ? cfg.mu_fg : cfg.mu_bg,
                                         shift, cfg.sigma, z0);
        if (p + 1 < n) {
          img.probs[p + 1] = pixel_probability(
              labels[p + 1] ? cfg.mu_fg : cfg.mu_bg, shift, cfg.sigma, z1);
        }
      }
      img.mask = BinaryMask(cfg.width, cfg.height, std::move(labels));
      images.push_back(std::move(img));
    }
  }
  return images;
}

DatasetManifest generate(const SynthConfig& cfg,
                         const std::filesystem::path& out_dir) {
  const auto images = generate_images(cfg);
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "probs", ec);
  std::filesystem::create_directories(out_dir / "masks", ec);
  if (ec) {
    throw DataError("io-error", "cannot create " + out_dir.string() + ": " +
                                    ec.message());
  }
  DatasetManifest manifest;
  manifest.base_dir = out_dir;
  for (const auto& img : images) {
    write_raw_probmap(out_dir / img.record.prob_path, img.width, img.height,
                      img.probs);
    write_mask(out_dir / img.record.mask_path, img.mask);
    manifest.records.push_back(img.record);
  }
  write_manifest(manifest, out_dir / "manifest.csv");
  return manifest;
}

}  // namespace fitzcal
