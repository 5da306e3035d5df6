#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fitzcal/data_model.hpp"
#include "fitzcal/metrics.hpp"

namespace fitzcal {

// Threshold sweep of one image: pooled counts plus both metric curves.
struct ImageSweep {
  std::string image_id;
  GroupLabel group = GroupLabel::kI;
  CountCurve counts;
  MetricCurve dice;
  MetricCurve biou;

  const MetricCurve& curve(Metric m) const {
    return m == Metric::kDice ? dice : biou;
  }
};

ImageSweep make_sweep(std::string image_id, GroupLabel group,
                      const ProbMap& prob, const BinaryMask& mask);
ImageSweep make_sweep(std::string image_id, GroupLabel group,
                      const CountCurve& counts);

struct SweepOptions {
  unsigned threads = 1;
  // When set, per-image counts are read from / written to this directory,
  // keyed by image_id and the SHA-256 of the probability and mask files.
  std::optional<std::filesystem::path> cache_dir;
};

struct SweepStats {
  std::size_t cache_hits = 0;
  std::size_t computed = 0;
};

// Sweeps the given records on `threads` workers. The result is sorted by
// ascending image_id and does not depend on the worker count.
std::vector<ImageSweep> sweep_records(const DatasetManifest& manifest,
                                      std::span<const ImageRecord> records,
                                      const SweepOptions& options,
                                      SweepStats* stats = nullptr);

std::vector<ImageRecord> records_in_split(const DatasetManifest& manifest,
                                          Split split);

// Runs body(i) for i in [0, n) on up to `threads` workers. If any call
// throws, the exception from the lowest index is rethrown after all
// workers finish.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& body);

// Default worker count: hardware concurrency, at least 1.
unsigned default_thread_count();

// Cache file encoding: "FCV1", u64 LE positives, u64 LE total,
// 990 u64 LE tp values, 990 u64 LE fp values.
std::vector<std::uint8_t> encode_count_curve(const CountCurve& counts);
std::optional<CountCurve> decode_count_curve(std::span<const std::uint8_t> bytes);

// image_id with characters outside [A-Za-z0-9._-] replaced by '_'.
std::string safe_file_stem(const std::string& image_id);

std::string cache_file_name(const std::string& image_id,
                            const std::string& content_hash);

}  // namespace fitzcal
