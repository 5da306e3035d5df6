#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include "fitzcal/data_model.hpp"

namespace fitzcal {

// Threshold grid: tau_k = k / 1000 for k = 1..990.
inline constexpr std::size_t kGridSize = 990;
inline constexpr std::uint16_t kGridFirstMilli = 1;
inline constexpr std::uint16_t kGridLastMilli = 990;

// A threshold on the grid, held in milli-units. Pixel i is predicted
// foreground when its quantized probability q_i >= milli().
class Threshold {
 public:
  constexpr Threshold() = default;

  static constexpr Threshold from_index(std::size_t k) {
    return Threshold(static_cast<std::uint16_t>(k + kGridFirstMilli));
  }
  // Throws a data error when milli is off the grid.
  static Threshold from_milli(int milli);
  // Accepts values within 1e-9 of a grid point.
  static Threshold from_value(double tau);

  constexpr std::uint16_t milli() const { return milli_; }
  constexpr std::size_t index() const { return milli_ - kGridFirstMilli; }
  constexpr double value() const { return milli_ / 1000.0; }
  // Exactly three decimals, e.g. "0.350".
  std::string str() const;

  constexpr auto operator<=>(const Threshold&) const = default;

 private:
  constexpr explicit Threshold(std::uint16_t milli) : milli_(milli) {}
  std::uint16_t milli_ = kGridFirstMilli;
};

enum class Metric { kDice, kBiou };
inline constexpr std::array<Metric, 2> kAllMetrics = {Metric::kDice,
                                                      Metric::kBiou};

std::string_view metric_token(Metric m);         // "dice" / "biou"
std::string_view metric_display_name(Metric m);  // "Dice" / "bIoU"
bool parse_metric(std::string_view token, Metric* out);

enum class AggregationMode { kMacro, kMicro };

std::string_view mode_token(AggregationMode m);
bool parse_mode(std::string_view token, AggregationMode* out);

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o);
  bool operator==(const ConfusionCounts&) const = default;
};

// 2tp / (2tp + fp + fn); 1.0 when prediction and label are both empty.
double dice(const ConfusionCounts& c);
// tp / (tp + fp + fn); 1.0 when prediction and label are both empty.
double biou(const ConfusionCounts& c);
double metric_value(Metric m, const ConfusionCounts& c);

ConfusionCounts confusion_at(const ProbMap& prob, const BinaryMask& mask,
                             Threshold tau);

// Confusion counts of one image (or a pooled set) at every grid threshold.
struct CountCurve {
  std::array<std::uint64_t, kGridSize> tp{};
  std::array<std::uint64_t, kGridSize> fp{};
  std::uint64_t positives = 0;
  std::uint64_t total = 0;

  ConfusionCounts at(std::size_t k) const;
  CountCurve& operator+=(const CountCurve& o);
  bool operator==(const CountCurve&) const = default;
};

// Cumulative-histogram sweep: two 1001-bin histograms and a suffix sum,
// O(N + 1000) per image.
CountCurve sweep_counts(const ProbMap& prob, const BinaryMask& mask);

struct MetricCurve {
  Metric metric = Metric::kDice;
  std::array<double, kGridSize> values{};

  double at(Threshold tau) const { return values[tau.index()]; }
  bool operator==(const MetricCurve&) const = default;
};

MetricCurve curve_from_counts(const CountCurve& counts, Metric metric);

MetricCurve curve_fast(const ProbMap& prob, const BinaryMask& mask,
                       Metric metric);

// Reference path: 990 independent full-image scans. Test oracle for
// curve_fast.
MetricCurve curve_naive(const ProbMap& prob, const BinaryMask& mask,
                        Metric metric);

// Mean of per-image values at each threshold, summed in the order given.
// Callers pass curves sorted by ascending image_id.
MetricCurve aggregate_macro(std::span<const MetricCurve> curves);
MetricCurve aggregate_macro(std::span<const MetricCurve* const> curves);

// Metric applied to pixel counts pooled over all images.
MetricCurve aggregate_micro(std::span<const CountCurve> counts, Metric metric);
MetricCurve aggregate_micro(std::span<const CountCurve* const> counts,
                            Metric metric);

// Index of the largest value; ties resolve to the smallest threshold.
Threshold argmax_threshold(const MetricCurve& curve);

// CSV dump: header "tau,value", 990 rows, tau with 3 decimals, value with 6.
void write_curve_csv(const MetricCurve& curve, std::ostream& out);

}  // namespace fitzcal
