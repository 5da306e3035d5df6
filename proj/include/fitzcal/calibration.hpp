#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fitzcal/group.hpp"
#include "fitzcal/metrics.hpp"
#include "fitzcal/sweep.hpp"

namespace fitzcal {

// Frozen operating points for one metric: the global optimum plus one
// optimum per group. Groups without tuning images inherit tau_all and are
// listed in fallback_groups.
struct OperatingPointSet {
  Metric metric = Metric::kDice;
  AggregationMode mode = AggregationMode::kMacro;
  Threshold tau_all;
  PerGroup<Threshold> tau_by_group;
  std::vector<GroupLabel> fallback_groups;  // ascending
  std::string tuning_manifest_checksum;

  bool is_fallback(GroupLabel g) const;
  bool operator==(const OperatingPointSet&) const = default;
};

// Aggregate curves over a set of sweeps; a group with no images has no curve.
struct AggregateCurves {
  Metric metric = Metric::kDice;
  MetricCurve overall;
  PerGroup<std::optional<MetricCurve>> by_group;
  PerGroup<std::size_t> images;

  bool operator==(const AggregateCurves&) const = default;
};

// `sweeps` must be sorted by ascending image_id (sweep_records guarantees
// it); the macro reduction sums in that order.
AggregateCurves aggregate_by_group(std::span<const ImageSweep> sweeps,
                                   Metric metric, AggregationMode mode);

// Throws a data error "empty-tune-split" when `tuning` is empty.
OperatingPointSet select_optima(std::span<const ImageSweep> tuning,
                                Metric metric, AggregationMode mode);

// Same selection, reusing curves already aggregated over the tuning set.
OperatingPointSet select_optima(const AggregateCurves& tuning,
                                AggregationMode mode);

struct EvaluationRow {
  std::optional<GroupLabel> group;  // nullopt: the Overall row
  std::size_t images = 0;
  Threshold tau_global;
  std::optional<Threshold> tau_group;
  std::optional<double> metric_at_global;  // absent when no images
  std::optional<double> metric_at_group;   // absent for Overall / no images
  std::optional<double> delta_pct;

  bool operator==(const EvaluationRow&) const = default;
};

// 100 * (at_group - at_global) / at_global; nullopt when at_global <= 0.
std::optional<double> delta_pct(double at_global, double at_group);

// One Overall row followed by six group rows (I..VI). Uses ops.mode for all
// aggregation. Throws "empty-test-split" when `test` is empty.
std::vector<EvaluationRow> evaluate_frozen(std::span<const ImageSweep> test,
                                           const OperatingPointSet& ops);

struct DominanceEntry {
  GroupLabel group;
  double at_group_tau;
  double at_global_tau;
};

// For every non-fallback group, the group's tuning aggregate at its own
// optimum must be >= its value at tau_all. A violation throws an internal
// error ("dominance-violation").
std::vector<DominanceEntry> tuning_dominance_check(
    std::span<const ImageSweep> tuning, const OperatingPointSet& ops);

}  // namespace fitzcal
