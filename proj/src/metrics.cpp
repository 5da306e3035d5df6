#include "fitzcal/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "fitzcal/error.hpp"
#include "fitzcal/kernels.hpp"

namespace fitzcal {
namespace {

void require_same_shape(const ProbMap& prob, const BinaryMask& mask) {
  if (prob.width() != mask.width() || prob.height() != mask.height()) {
    throw DataError("dimension-mismatch",
                    "probability map is " + std::to_string(prob.width()) +
                        "x" + std::to_string(prob.height()) + ", mask is " +
                        std::to_string(mask.width()) + "x" +
                        std::to_string(mask.height()));
  }
}

template <typename Range>
MetricCurve macro_mean(const Range& curves, std::size_t n) {
  if (n == 0) {
    throw UsageError("empty-aggregate", "cannot aggregate zero curves");
  }
  MetricCurve out;
  bool first = true;
  for (const MetricCurve& c : curves) {
    if (first) {
      out.metric = c.metric;
      first = false;
    } else if (c.metric != out.metric) {
      throw UsageError("mixed-metrics", "aggregated curves differ in metric");
    }
    for (std::size_t k = 0; k < kGridSize; ++k) out.values[k] += c.values[k];
  }
  const double denom = static_cast<double>(n);
  for (double& v : out.values) v /= denom;
  return out;
}

template <typename Range>
MetricCurve micro_pool(const Range& counts, std::size_t n, Metric metric) {
  if (n == 0) {
    throw UsageError("empty-aggregate", "cannot aggregate zero curves");
  }
  CountCurve pooled;
  for (const CountCurve& c : counts) pooled += c;
  return curve_from_counts(pooled, metric);
}

// Adapts a span of pointers to a range of references.
template <typename T>
struct Deref {
  std::span<const T* const> items;
  struct It {
    const T* const* p;
    const T& operator*() const { return **p; }
    It& operator++() {
      ++p;
      return *this;
    }
    bool operator!=(const It& o) const { return p != o.p; }
  };
  It begin() const { return {items.data()}; }
  It end() const { return {items.data() + items.size()}; }
};

}  // namespace

Threshold Threshold::from_milli(int milli) {
  if (milli < kGridFirstMilli || milli > kGridLastMilli) {
    throw DataError("off-grid-threshold",
                    "threshold " + std::to_string(milli) +
                        "/1000 is outside the grid 0.001..0.990");
  }
  return Threshold(static_cast<std::uint16_t>(milli));
}

Threshold Threshold::from_value(double tau) {
  const double scaled = tau * 1000.0;
  const double nearest = std::round(scaled);
  if (!(std::abs(scaled - nearest) <= 1e-6)) {
    throw DataError("off-grid-threshold",
                    "threshold " + std::to_string(tau) +
                        " is not a multiple of 0.001");
  }
  return from_milli(static_cast<int>(nearest));
}

std::string Threshold::str() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%d.%03d", milli_ / 1000, milli_ % 1000);
  return buf;
}

std::string_view metric_token(Metric m) {
  return m == Metric::kDice ? "dice" : "biou";
}

std::string_view metric_display_name(Metric m) {
  return m == Metric::kDice ? "Dice" : "bIoU";
}

bool parse_metric(std::string_view token, Metric* out) {
  if (token == "dice" || token == "Dice") {
    *out = Metric::kDice;
  } else if (token == "biou" || token == "bIoU") {
    *out = Metric::kBiou;
  } else {
    return false;
  }
  return true;
}

std::string_view mode_token(AggregationMode m) {
  return m == AggregationMode::kMacro ? "macro" : "micro";
}

bool parse_mode(std::string_view token, AggregationMode* out) {
  if (token == "macro") {
    *out = AggregationMode::kMacro;
  } else if (token == "micro") {
    *out = AggregationMode::kMicro;
  } else {
    return false;
  }
  return true;
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

double dice(const ConfusionCounts& c) {
  const std::uint64_t denom = 2 * c.tp + c.fp + c.fn;
  if (denom == 0) return 1.0;
  return static_cast<double>(2 * c.tp) / static_cast<double>(denom);
}

double biou(const ConfusionCounts& c) {
  const std::uint64_t denom = c.tp + c.fp + c.fn;
  if (denom == 0) return 1.0;
  return static_cast<double>(c.tp) / static_cast<double>(denom);
}

double metric_value(Metric m, const ConfusionCounts& c) {
  return m == Metric::kDice ? dice(c) : biou(c);
}

ConfusionCounts confusion_at(const ProbMap& prob, const BinaryMask& mask,
                             Threshold tau) {
  require_same_shape(prob, mask);
  const kernels::ThresholdCounts k =
      kernels::active().count_at(prob.milli(), mask.labels(), tau.milli());
  ConfusionCounts c;
  c.tp = k.tp;
  c.fp = k.fp;
  c.fn = k.positives - k.tp;
  c.tn = prob.size() - k.positives - k.fp;
  return c;
}

ConfusionCounts CountCurve::at(std::size_t k) const {
  ConfusionCounts c;
  c.tp = tp[k];
  c.fp = fp[k];
  c.fn = positives - tp[k];
  c.tn = total - positives - fp[k];
  return c;
}

CountCurve& CountCurve::operator+=(const CountCurve& o) {
  for (std::size_t k = 0; k < kGridSize; ++k) {
    tp[k] += o.tp[k];
    fp[k] += o.fp[k];
  }
  positives += o.positives;
  total += o.total;
  return *this;
}

CountCurve sweep_counts(const ProbMap& prob, const BinaryMask& mask) {
  require_same_shape(prob, mask);
  std::array<std::uint64_t, kernels::kHistogramBins> fg{};
  std::array<std::uint64_t, kernels::kHistogramBins> bg{};
  kernels::active().histogram(prob.milli(), mask.labels(), fg, bg);

  // Suffix sums: count of pixels with q >= v, for v = 1000 down to 1.
  CountCurve out;
  std::uint64_t fg_above = 0;
  std::uint64_t bg_above = 0;
  for (std::size_t v = kMilliMax; v >= kGridFirstMilli; --v) {
    fg_above += fg[v];
    bg_above += bg[v];
    if (v <= kGridLastMilli) {
      out.tp[v - kGridFirstMilli] = fg_above;
      out.fp[v - kGridFirstMilli] = bg_above;
    }
  }
  out.positives = fg_above + fg[0];
  out.total = prob.size();
  return out;
}

MetricCurve curve_from_counts(const CountCurve& counts, Metric metric) {
  MetricCurve out;
  out.metric = metric;
  for (std::size_t k = 0; k < kGridSize; ++k) {
    out.values[k] = metric_value(metric, counts.at(k));
  }
  return out;
}

MetricCurve curve_fast(const ProbMap& prob, const BinaryMask& mask,
                       Metric metric) {
  return curve_from_counts(sweep_counts(prob, mask), metric);
}

MetricCurve curve_naive(const ProbMap& prob, const BinaryMask& mask,
                        Metric metric) {
  require_same_shape(prob, mask);
  const auto q = prob.milli();
  const auto m = mask.labels();
  MetricCurve out;
  out.metric = metric;
  for (std::size_t k = 0; k < kGridSize; ++k) {
    const std::uint16_t t = Threshold::from_index(k).milli();
    ConfusionCounts c;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const bool predicted = q[i] >= t;
      if (m[i]) {
        ++(predicted ? c.tp : c.fn);
      } else {
        ++(predicted ? c.fp : c.tn);
      }
    }
    out.values[k] = metric_value(metric, c);
  }
  return out;
}

MetricCurve aggregate_macro(std::span<const MetricCurve> curves) {
  return macro_mean(curves, curves.size());
}

MetricCurve aggregate_macro(std::span<const MetricCurve* const> curves) {
  return macro_mean(Deref<MetricCurve>{curves}, curves.size());
}

MetricCurve aggregate_micro(std::span<const CountCurve> counts, Metric metric) {
  return micro_pool(counts, counts.size(), metric);
}

MetricCurve aggregate_micro(std::span<const CountCurve* const> counts,
                            Metric metric) {
  return micro_pool(Deref<CountCurve>{counts}, counts.size(), metric);
}

Threshold argmax_threshold(const MetricCurve& curve) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < kGridSize; ++k) {
    if (curve.values[k] > curve.values[best]) best = k;
  }
  return Threshold::from_index(best);
}

void write_curve_csv(const MetricCurve& curve, std::ostream& out) {
  out << "tau,value\n";
  char buf[64];
  for (std::size_t k = 0; k < kGridSize; ++k) {
    std::snprintf(buf, sizeof(buf), "%s,%.6f\n",
                  Threshold::from_index(k).str().c_str(), curve.values[k]);
    out << buf;
  }
}

}  // namespace fitzcal
