#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

// Data-parallel inner loops. Every kernel has a portable scalar reference in
// kernels::scalar and, on x86-64, an AVX2 variant in kernels::avx2. The
// dispatcher picks one at first use; the variants are tested for exact
// equality against the scalar reference.

namespace fitzcal::kernels {

inline constexpr std::size_t kHistogramBins = 1001;

inline constexpr std::size_t kAllValid = static_cast<std::size_t>(-1);

// Pixel counts produced by one threshold test q >= threshold.
struct ThresholdCounts {
  std::uint64_t tp = 0;  // predicted and labelled
  std::uint64_t fp = 0;  // predicted, not labelled
  std::uint64_t positives = 0;  // labelled
};

// Function table for one instruction set.
struct KernelTable {
  std::string_view name;

  // out[i] = clamp(floor(double(raw[i]) * 1000 + 0.5), 0, 1000). Returns the
  // index of the first value that is NaN or outside [-tol, 1 + tol]
  // (tol = kProbTolerance), or kAllValid. `out` contents are unspecified on
  // failure.
  std::size_t (*quantize)(std::span<const float> raw,
                          std::span<std::uint16_t> out);

  // Adds per-value pixel counts to fg (label 1) and bg (label 0). Both spans
  // hold kHistogramBins counters; milli values must be <= 1000.
  void (*histogram)(std::span<const std::uint16_t> milli,
                    std::span<const std::uint8_t> labels,
                    std::span<std::uint64_t> fg, std::span<std::uint64_t> bg);

  ThresholdCounts (*count_at)(std::span<const std::uint16_t> milli,
                              std::span<const std::uint8_t> labels,
                              std::uint16_t threshold);
};

namespace scalar {
const KernelTable& table();
}  // namespace scalar

namespace avx2 {
// nullptr when AVX2 is not compiled in or the CPU lacks it.
const KernelTable* table();
}  // namespace avx2

// Selected table: AVX2 when available unless FITZCAL_ISA=scalar is set.
const KernelTable& active();

}  // namespace fitzcal::kernels
