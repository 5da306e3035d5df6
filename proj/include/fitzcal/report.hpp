#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fitzcal/calibration.hpp"

namespace fitzcal {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kToolVersion = "0.1.0";

// Output of `calibrate`: frozen operating points for both metrics plus the
// tuning aggregate curves they were selected from.
struct OperatingPointDocument {
  std::string tool_version{kToolVersion};
  AggregationMode mode = AggregationMode::kMacro;
  std::string tuning_manifest_checksum;
  std::size_t tuning_images = 0;
  std::vector<OperatingPointSet> operating_points;
  std::vector<AggregateCurves> tuning_curves;

  const OperatingPointSet& for_metric(Metric m) const;
  bool operator==(const OperatingPointDocument&) const = default;
};

struct RunMetadata {
  std::string tool_version{kToolVersion};
  AggregationMode mode = AggregationMode::kMacro;
  std::string tuning_manifest_checksum;
  std::string test_manifest_checksum;
  // SHA-256 of the operating-point document whose thresholds were applied.
  std::string operating_points_checksum;
  std::optional<std::uint64_t> seed;
  // False when the tuning checksum recorded in the operating points differs
  // from the manifest supplied to evaluate.
  bool provenance_ok = true;
  std::vector<std::string> warnings;

  bool operator==(const RunMetadata&) const = default;
};

struct MetricReport {
  OperatingPointSet ops;
  std::vector<EvaluationRow> rows;
  std::optional<AggregateCurves> curves;

  bool operator==(const MetricReport&) const = default;
};

struct RunReport {
  RunMetadata meta;
  std::vector<MetricReport> metrics;

  bool operator==(const RunReport&) const = default;
};

enum class TableFormat { kText, kCsv };

// Columns: Subset | <metric>@tau_g | <metric>@tau_F | Delta(%) | tau_F |
// images, one block per metric. Metrics print with 3 decimals, Delta with 2
// and an explicit sign. Overall has no tau_F cells ("—" in text, empty in
// CSV); groups without test images print "n/a".
std::string render_table(const RunReport& report, TableFormat format);

struct PlotSeries {
  std::string label;
  MetricCurve curve;
  Threshold optimum;
  bool overall = false;
};

// Group series (I..VI, skipping groups without a curve) followed by the
// overall series.
std::vector<PlotSeries> plot_series(const AggregateCurves& curves,
                                    const OperatingPointSet& ops);

// Static SVG 1.1, viewBox 960x640, axes fixed to [0,1]^2. One polyline and
// one vertical marker per series. Throws a usage error on an empty set.
std::string render_curves_svg(std::span<const PlotSeries> series,
                              Metric metric);

// Writes curves_<metric>.svg into out_dir for each metric that carries
// curves; returns the written paths.
std::vector<std::filesystem::path> write_curve_plots(
    const RunReport& report, const std::filesystem::path& out_dir);

// JSON encodings. Documents are UTF-8, keys in a fixed order, and
// round-trip losslessly. Parsing throws a data error
// ("schema-error: missing field '<name>'" style messages) on bad input.
std::string serialize_operating_points(const OperatingPointDocument& doc);
OperatingPointDocument parse_operating_points(std::string_view text);
OperatingPointDocument read_operating_points(const std::filesystem::path& path);

std::string serialize_run_report(const RunReport& report);
RunReport parse_run_report(std::string_view text);
void write_run_document(const RunReport& report,
                        const std::filesystem::path& path);
RunReport read_run_document(const std::filesystem::path& path);

// Warning text when the tuning checksum in `report` disagrees with
// `manifest_checksum`; nullopt when they match.
std::optional<std::string> check_provenance(const RunReport& report,
                                            const std::string& manifest_checksum);

}  // namespace fitzcal
