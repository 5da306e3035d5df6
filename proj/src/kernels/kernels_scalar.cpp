#include <algorithm>
#include <cmath>

#include "fitzcal/data_model.hpp"
#include "fitzcal/kernels.hpp"

namespace fitzcal::kernels::scalar {
namespace {

std::size_t quantize(std::span<const float> raw, std::span<std::uint16_t> out) {
  constexpr double kLow = -kProbTolerance;
  constexpr double kHigh = 1.0 + kProbTolerance;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double p = raw[i];
    if (!(p >= kLow && p <= kHigh)) return i;  // also catches NaN
    double q = std::floor(p * 1000.0 + 0.5);
    q = std::clamp(q, 0.0, static_cast<double>(kMilliMax));
    out[i] = static_cast<std::uint16_t>(q);
  }
  return kAllValid;
}

void histogram(std::span<const std::uint16_t> milli,
               std::span<const std::uint8_t> labels,
               std::span<std::uint64_t> fg, std::span<std::uint64_t> bg) {
  for (std::size_t i = 0; i < milli.size(); ++i) {
    if (labels[i]) {
      ++fg[milli[i]];
    } else {
      ++bg[milli[i]];
    }
  }
}

ThresholdCounts count_at(std::span<const std::uint16_t> milli,
                         std::span<const std::uint8_t> labels,
                         std::uint16_t threshold) {
  ThresholdCounts c;
  for (std::size_t i = 0; i < milli.size(); ++i) {
    const bool predicted = milli[i] >= threshold;
    const bool labelled = labels[i] != 0;
    c.tp += predicted && labelled;
    c.fp += predicted && !labelled;
    c.positives += labelled;
  }
  return c;
}

}  // namespace

const KernelTable& table() {
  static const KernelTable kTable{"scalar", &quantize, &histogram, &count_at};
  return kTable;
}

}  // namespace fitzcal::kernels::scalar
