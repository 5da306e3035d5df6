#include "fitzcal/calibration.hpp"

#include <algorithm>

#include "fitzcal/error.hpp"

namespace fitzcal {

bool OperatingPointSet::is_fallback(GroupLabel g) const {
  return std::find(fallback_groups.begin(), fallback_groups.end(), g) !=
         fallback_groups.end();
}

AggregateCurves aggregate_by_group(std::span<const ImageSweep> sweeps,
                                   Metric metric, AggregationMode mode) {
  if (sweeps.empty()) {
    throw UsageError("empty-aggregate", "no images to aggregate");
  }
  auto aggregate = [&](auto&& keep) {
    if (mode == AggregationMode::kMacro) {
      std::vector<const MetricCurve*> curves;
      for (const auto& s : sweeps) {
        if (keep(s)) curves.push_back(&s.curve(metric));
      }
      return aggregate_macro(std::span<const MetricCurve* const>(curves));
    }
    std::vector<const CountCurve*> counts;
    for (const auto& s : sweeps) {
      if (keep(s)) counts.push_back(&s.counts);
    }
    return aggregate_micro(std::span<const CountCurve* const>(counts), metric);
  };

  AggregateCurves out;
  out.metric = metric;
  out.images = PerGroup<std::size_t>(0);
  out.overall = aggregate([](const ImageSweep&) { return true; });
  for (const auto& s : sweeps) ++out.images[s.group];
  for (GroupLabel g : kAllGroups) {
    if (out.images[g] == 0) continue;
    out.by_group[g] = aggregate([g](const ImageSweep& s) { return s.group == g; });
  }
  return out;
}

OperatingPointSet select_optima(const AggregateCurves& tuning,
                                AggregationMode mode) {
  OperatingPointSet ops;
  ops.metric = tuning.metric;
  ops.mode = mode;
  ops.tau_all = argmax_threshold(tuning.overall);
  for (GroupLabel g : kAllGroups) {
    if (tuning.by_group[g]) {
      ops.tau_by_group[g] = argmax_threshold(*tuning.by_group[g]);
    } else {
      ops.tau_by_group[g] = ops.tau_all;
      ops.fallback_groups.push_back(g);
    }
  }
  return ops;
}

OperatingPointSet select_optima(std::span<const ImageSweep> tuning,
                                Metric metric, AggregationMode mode) {
  if (tuning.empty()) {
    throw DataError("empty-tune-split", "the tuning split has no images");
  }
  return select_optima(aggregate_by_group(tuning, metric, mode), mode);
}

std::optional<double> delta_pct(double at_global, double at_group) {
  if (!(at_global > 0.0)) return std::nullopt;
  return 100.0 * (at_group - at_global) / at_global;
}

std::vector<EvaluationRow> evaluate_frozen(std::span<const ImageSweep> test,
                                           const OperatingPointSet& ops) {
  if (test.empty()) {
    throw DataError("empty-test-split", "the test split has no images");
  }
  const AggregateCurves curves = aggregate_by_group(test, ops.metric, ops.mode);

  std::vector<EvaluationRow> rows;
  EvaluationRow overall;
  overall.images = test.size();
  overall.tau_global = ops.tau_all;
  overall.metric_at_global = curves.overall.at(ops.tau_all);
  rows.push_back(overall);

  for (GroupLabel g : kAllGroups) {
    EvaluationRow row;
    row.group = g;
    row.images = curves.images[g];
    row.tau_global = ops.tau_all;
    row.tau_group = ops.tau_by_group[g];
    if (const auto& c = curves.by_group[g]) {
      row.metric_at_global = c->at(ops.tau_all);
      row.metric_at_group = c->at(ops.tau_by_group[g]);
      row.delta_pct = delta_pct(*row.metric_at_global, *row.metric_at_group);
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<DominanceEntry> tuning_dominance_check(
    std::span<const ImageSweep> tuning, const OperatingPointSet& ops) {
  if (tuning.empty()) {
    throw DataError("empty-tune-split", "the tuning split has no images");
  }
  const AggregateCurves curves = aggregate_by_group(tuning, ops.metric, ops.mode);
  std::vector<DominanceEntry> out;
  for (GroupLabel g : kAllGroups) {
    if (ops.is_fallback(g)) continue;
    if (!curves.by_group[g]) {
      throw InternalError("dominance-violation",
                          "group " + std::string(group_token(g)) +
                              " has an optimum but no tuning images");
    }
    const auto& c = *curves.by_group[g];
    DominanceEntry e{g, c.at(ops.tau_by_group[g]), c.at(ops.tau_all)};
    if (!(e.at_group_tau >= e.at_global_tau)) {
      throw InternalError(
          "dominance-violation",
          std::string(metric_display_name(ops.metric)) + " group " +
              std::string(group_token(g)) + ": " +
              std::to_string(e.at_group_tau) + " at its own threshold < " +
              std::to_string(e.at_global_tau) + " at the global threshold");
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace fitzcal
