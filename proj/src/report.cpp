#include "fitzcal/report.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fitzcal/error.hpp"

namespace fitzcal {
namespace {

using Json = nlohmann::ordered_json;

constexpr std::string_view kDash = "\xE2\x80\x94";  // U+2014

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

std::string metric_cell(const std::optional<double>& v) {
  return v ? fmt("%.3f", *v) : "n/a";
}

std::string delta_cell(const std::optional<double>& v) {
  return v ? fmt("%+.2f", *v) : "n/a";
}

std::string pad_right(std::string s, std::size_t width) {
  // Width counts code points so the em dash aligns like one column.
  std::size_t cps = 0;
  for (unsigned char c : s) cps += (c & 0xC0) != 0x80;
  if (cps < width) s.append(width - cps, ' ');
  return s;
}

std::string pad_left(const std::string& s, std::size_t width) {
  std::size_t cps = 0;
  for (unsigned char c : s) cps += (c & 0xC0) != 0x80;
  return cps < width ? std::string(width - cps, ' ') + s : s;
}

std::string subset_name(const EvaluationRow& row) {
  return row.group ? group_display_name(*row.group) : "Overall";
}

// --- JSON helpers ---

const Json& require(const Json& j, const char* field) {
  if (!j.is_object() || !j.contains(field)) {
    throw DataError("schema-error",
                    std::string("missing field '") + field + "'");
  }
  return j.at(field);
}

Json opt_number(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::optional<double> get_opt_number(const Json& j, const char* field) {
  const Json& v = require(j, field);
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

Metric get_metric(const Json& j) {
  Metric m;
  const auto tok = require(j, "metric").get<std::string>();
  if (!parse_metric(tok, &m)) {
    throw DataError("schema-error", "unknown metric '" + tok + "'");
  }
  return m;
}

AggregationMode get_mode(const Json& j) {
  AggregationMode m;
  const auto tok = require(j, "mode").get<std::string>();
  if (!parse_mode(tok, &m)) {
    throw DataError("schema-error", "unknown mode '" + tok + "'");
  }
  return m;
}

GroupLabel get_group(const std::string& tok) {
  const auto g = parse_group(tok);
  if (!g) throw DataError("schema-error", "unknown group '" + tok + "'");
  return *g;
}

Json encode_curve(const MetricCurve& c) {
  return Json(std::vector<double>(c.values.begin(), c.values.end()));
}

MetricCurve decode_curve(const Json& j, Metric metric) {
  const auto values = j.get<std::vector<double>>();
  if (values.size() != kGridSize) {
    throw DataError("schema-error", "curve must hold 990 values");
  }
  MetricCurve c;
  c.metric = metric;
  std::copy(values.begin(), values.end(), c.values.begin());
  return c;
}

Json encode_ops(const OperatingPointSet& ops) {
  Json by_group = Json::object();
  for (GroupLabel g : kAllGroups) {
    by_group[std::string(group_token(g))] = ops.tau_by_group[g].value();
  }
  Json fallback = Json::array();
  for (GroupLabel g : ops.fallback_groups) fallback.push_back(group_token(g));
  return Json{{"metric", metric_token(ops.metric)},
              {"mode", mode_token(ops.mode)},
              {"tau_all", ops.tau_all.value()},
              {"tau_by_group", by_group},
              {"fallback_groups", fallback},
              {"tuning_manifest_checksum", ops.tuning_manifest_checksum}};
}

OperatingPointSet decode_ops(const Json& j) {
  OperatingPointSet ops;
  ops.metric = get_metric(j);
  ops.mode = get_mode(j);
  ops.tau_all = Threshold::from_value(require(j, "tau_all").get<double>());
  const Json& by_group = require(j, "tau_by_group");
  for (GroupLabel g : kAllGroups) {
    const std::string tok(group_token(g));
    ops.tau_by_group[g] =
        Threshold::from_value(require(by_group, tok.c_str()).get<double>());
  }
  for (const auto& tok : require(j, "fallback_groups")) {
    ops.fallback_groups.push_back(get_group(tok.get<std::string>()));
  }
  std::sort(ops.fallback_groups.begin(), ops.fallback_groups.end());
  ops.tuning_manifest_checksum =
      require(j, "tuning_manifest_checksum").get<std::string>();
  return ops;
}

Json encode_curves(const AggregateCurves& c) {
  Json groups = Json::object();
  Json images = Json::object();
  for (GroupLabel g : kAllGroups) {
    const std::string tok(group_token(g));
    groups[tok] = c.by_group[g] ? encode_curve(*c.by_group[g]) : Json(nullptr);
    images[tok] = c.images[g];
  }
  return Json{{"metric", metric_token(c.metric)},
              {"overall", encode_curve(c.overall)},
              {"groups", groups},
              {"images", images}};
}

AggregateCurves decode_curves(const Json& j) {
  AggregateCurves c;
  c.metric = get_metric(j);
  c.overall = decode_curve(require(j, "overall"), c.metric);
  const Json& groups = require(j, "groups");
  const Json& images = require(j, "images");
  for (GroupLabel g : kAllGroups) {
    const std::string tok(group_token(g));
    const Json& curve = require(groups, tok.c_str());
    if (!curve.is_null()) c.by_group[g] = decode_curve(curve, c.metric);
    c.images[g] = require(images, tok.c_str()).get<std::size_t>();
  }
  return c;
}

Json encode_row(const EvaluationRow& r) {
  return Json{
      {"subset", r.group ? std::string(group_token(*r.group)) : "Overall"},
      {"images", r.images},
      {"tau_global", r.tau_global.value()},
      {"tau_group", r.tau_group ? Json(r.tau_group->value()) : Json(nullptr)},
      {"metric_at_global", opt_number(r.metric_at_global)},
      {"metric_at_group", opt_number(r.metric_at_group)},
      {"delta_pct", opt_number(r.delta_pct)}};
}

EvaluationRow decode_row(const Json& j) {
  EvaluationRow r;
  const auto subset = require(j, "subset").get<std::string>();
  if (subset != "Overall") r.group = get_group(subset);
  r.images = require(j, "images").get<std::size_t>();
  r.tau_global = Threshold::from_value(require(j, "tau_global").get<double>());
  if (const auto t = get_opt_number(j, "tau_group")) {
    r.tau_group = Threshold::from_value(*t);
  }
  r.metric_at_global = get_opt_number(j, "metric_at_global");
  r.metric_at_group = get_opt_number(j, "metric_at_group");
  r.delta_pct = get_opt_number(j, "delta_pct");
  return r;
}

template <typename Fn>
auto parse_json_document(std::string_view text, std::string_view schema, Fn&& fn) {
  try {
    const Json j = Json::parse(text);
    const auto name = require(j, "schema").get<std::string>();
    if (name != schema) {
      throw DataError("schema-error", "expected schema '" + std::string(schema) +
                                          "', found '" + name + "'");
    }
    const int version = require(j, "schema_version").get<int>();
    if (version != kSchemaVersion) {
      throw DataError("schema-error",
                      "unsupported schema_version " + std::to_string(version));
    }
    return fn(j);
  } catch (const Json::exception& e) {
    throw DataError("schema-error", e.what());
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("io-error", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("io-error", "cannot write " + path.string());
  out << text;
  if (!out) throw DataError("io-error", "write failed: " + path.string());
}

// --- SVG ---

constexpr double kViewWidth = 960;
constexpr double kViewHeight = 640;
constexpr double kLeft = 80;
constexpr double kRight = 780;
constexpr double kTop = 40;
constexpr double kBottom = 580;

// Light to dark, one per group I..VI.
constexpr std::array<std::string_view, kNumGroups> kGroupColors = {
    "#e6a157", "#d1773a", "#b35a2d", "#8c3f2b", "#5e2a6e", "#1f4e9c"};

double plot_x(double tau) { return kLeft + (kRight - kLeft) * tau; }
double plot_y(double v) { return kBottom - (kBottom - kTop) * v; }

std::string num(double v) { return fmt("%.2f", v); }

}  // namespace

const OperatingPointSet& OperatingPointDocument::for_metric(Metric m) const {
  for (const auto& ops : operating_points) {
    if (ops.metric == m) return ops;
  }
  throw DataError("schema-error", "operating points lack metric '" +
                                      std::string(metric_token(m)) + "'");
}

std::string render_table(const RunReport& report, TableFormat format) {
  std::ostringstream out;
  if (format == TableFormat::kCsv) {
    out << "metric,subset,metric_at_tau_g,metric_at_tau_f,delta_pct,tau_g,"
           "tau_f,images\n";
    for (const auto& m : report.metrics) {
      for (const auto& row : m.rows) {
        out << metric_display_name(m.ops.metric) << ',' << subset_name(row)
            << ',' << (row.metric_at_global ? fmt("%.3f", *row.metric_at_global) : "")
            << ',' << (row.metric_at_group ? fmt("%.3f", *row.metric_at_group) : "")
            << ',' << (row.delta_pct ? fmt("%+.2f", *row.delta_pct) : "")
            << ',' << row.tau_global.str() << ','
            << (row.group && row.tau_group ? row.tau_group->str() : "") << ','
            << row.images << '\n';
      }
    }
    return out.str();
  }

  bool first = true;
  for (const auto& m : report.metrics) {
    if (!first) out << '\n';
    first = false;
    const std::string name(metric_display_name(m.ops.metric));
    out << name << " (" << mode_token(m.ops.mode) << "), global threshold "
        << m.ops.tau_all.str() << '\n';
    out << pad_right("Subset", 10) << pad_left(name + "@tau_g", 12)
        << pad_left(name + "@tau_F", 12) << pad_left("Delta(%)", 10)
        << pad_left("tau_F", 8) << pad_left("images", 8) << '\n';
    for (const auto& row : m.rows) {
      std::string at_group;
      std::string delta;
      std::string tau_f;
      if (!row.group) {
        at_group = delta = tau_f = std::string(kDash);
      } else {
        at_group = metric_cell(row.metric_at_group);
        delta = delta_cell(row.delta_pct);
        tau_f = row.tau_group ? row.tau_group->str() : "n/a";
        if (m.ops.is_fallback(*row.group)) tau_f += "*";
      }
      out << pad_right(subset_name(row), 10)
          << pad_left(metric_cell(row.metric_at_global), 12)
          << pad_left(at_group, 12) << pad_left(delta, 10)
          << pad_left(tau_f, 8) << pad_left(std::to_string(row.images), 8)
          << '\n';
    }
    if (!m.ops.fallback_groups.empty()) {
      out << "* no tuning images; inherits the global threshold\n";
    }
  }
  return out.str();
}

std::vector<PlotSeries> plot_series(const AggregateCurves& curves,
                                    const OperatingPointSet& ops) {
  std::vector<PlotSeries> out;
  for (GroupLabel g : kAllGroups) {
    if (!curves.by_group[g]) continue;
    out.push_back({group_display_name(g), *curves.by_group[g],
                   ops.tau_by_group[g], false});
  }
  out.push_back({"Overall", curves.overall, ops.tau_all, true});
  return out;
}

std::string render_curves_svg(std::span<const PlotSeries> series,
                              Metric metric) {
  if (series.empty()) {
    throw UsageError("empty-curve-set", "no curves to plot");
  }
  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
         "width=\"960\" height=\"640\" viewBox=\"0 0 "
      << kViewWidth << ' ' << kViewHeight << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"960\" height=\"640\" fill=\"white\"/>\n";

  // Axes, ticks and grid.
  svg << "<g class=\"axes\" stroke=\"#444\" stroke-width=\"1\">\n";
  svg << "<line class=\"axis\" x1=\"" << num(kLeft) << "\" y1=\"" << num(kBottom)
      << "\" x2=\"" << num(kRight) << "\" y2=\"" << num(kBottom) << "\"/>\n";
  svg << "<line class=\"axis\" x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop)
      << "\" x2=\"" << num(kLeft) << "\" y2=\"" << num(kBottom) << "\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double t = i / 5.0;
    svg << "<line class=\"grid\" stroke=\"#ddd\" x1=\"" << num(plot_x(t))
        << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(plot_x(t)) << "\" y2=\""
        << num(kBottom) << "\"/>\n";
    svg << "<line class=\"grid\" stroke=\"#ddd\" x1=\"" << num(kLeft)
        << "\" y1=\"" << num(plot_y(t)) << "\" x2=\"" << num(kRight)
        << "\" y2=\"" << num(plot_y(t)) << "\"/>\n";
  }
  svg << "</g>\n<g class=\"labels\" font-family=\"sans-serif\" font-size=\"14\" "
         "fill=\"#222\">\n";
  for (int i = 0; i <= 5; ++i) {
    const double t = i / 5.0;
    svg << "<text x=\"" << num(plot_x(t)) << "\" y=\"" << num(kBottom + 20)
        << "\" text-anchor=\"middle\">" << fmt("%.1f", t) << "</text>\n";
    svg << "<text x=\"" << num(kLeft - 10) << "\" y=\"" << num(plot_y(t) + 5)
        << "\" text-anchor=\"end\">" << fmt("%.1f", t) << "</text>\n";
  }
  svg << "<text x=\"" << num((kLeft + kRight) / 2) << "\" y=\"" << num(kBottom + 45)
      << "\" text-anchor=\"middle\">threshold</text>\n";
  svg << "<text x=\"20\" y=\"" << num((kTop + kBottom) / 2)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << num((kTop + kBottom) / 2) << ")\">" << metric_display_name(metric)
      << "</text>\n</g>\n";

  auto color_of = [](const PlotSeries& s) -> std::string {
    if (s.overall) return "#000000";
    for (GroupLabel g : kAllGroups) {
      if (s.label == group_display_name(g)) {
        return std::string(kGroupColors[group_index(g)]);
      }
    }
    return "#777777";
  };

  svg << "<g class=\"curves\" fill=\"none\">\n";
  for (const auto& s : series) {
    svg << "<polyline class=\"" << (s.overall ? "overall" : "group")
        << "\" stroke=\"" << color_of(s) << "\" stroke-width=\""
        << (s.overall ? "3" : "1.5") << "\""
        << (s.overall ? " stroke-dasharray=\"8 4\"" : "") << " points=\"";
    for (std::size_t k = 0; k < kGridSize; ++k) {
      const double v = std::clamp(s.curve.values[k], 0.0, 1.0);
      if (k) svg << ' ';
      svg << num(plot_x(Threshold::from_index(k).value())) << ','
          << num(plot_y(v));
    }
    svg << "\"/>\n";
  }
  svg << "</g>\n<g class=\"markers\">\n";
  for (const auto& s : series) {
    const double x = plot_x(s.optimum.value());
    svg << "<line class=\"marker\" stroke=\"" << color_of(s)
        << "\" stroke-width=\"" << (s.overall ? "2.5" : "1.2")
        << "\" stroke-dasharray=\"4 3\" x1=\"" << num(x) << "\" y1=\""
        << num(kTop) << "\" x2=\"" << num(x) << "\" y2=\"" << num(kBottom)
        << "\"><title>" << s.label << " optimum " << s.optimum.str()
        << "</title></line>\n";
  }
  svg << "</g>\n<g class=\"legend\" font-family=\"sans-serif\" font-size=\"13\">\n";
  double y = kTop + 10;
  for (const auto& s : series) {
    svg << "<rect x=\"800\" y=\"" << num(y - 9) << "\" width=\"18\" height=\"4\" "
        << "fill=\"" << color_of(s) << "\"/>\n";
    svg << "<text x=\"825\" y=\"" << num(y - 3) << "\">" << s.label << " ("
        << s.optimum.str() << ")</text>\n";
    y += 22;
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

std::vector<std::filesystem::path> write_curve_plots(
    const RunReport& report, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  for (const auto& m : report.metrics) {
    if (!m.curves) continue;
    const auto series = plot_series(*m.curves, m.ops);
    const auto path =
        out_dir / ("curves_" + std::string(metric_token(m.ops.metric)) + ".svg");
    write_text(path, render_curves_svg(series, m.ops.metric));
    written.push_back(path);
  }
  return written;
}

std::string serialize_operating_points(const OperatingPointDocument& doc) {
  Json ops = Json::array();
  for (const auto& o : doc.operating_points) ops.push_back(encode_ops(o));
  Json curves = Json::array();
  for (const auto& c : doc.tuning_curves) curves.push_back(encode_curves(c));
  const Json j{{"schema", "fitzcal/operating-points"},
               {"schema_version", kSchemaVersion},
               {"tool_version", doc.tool_version},
               {"mode", mode_token(doc.mode)},
               {"tuning_manifest_checksum", doc.tuning_manifest_checksum},
               {"tuning_images", doc.tuning_images},
               {"operating_points", ops},
               {"tuning_curves", curves}};
  return j.dump(1) + "\n";
}

OperatingPointDocument parse_operating_points(std::string_view text) {
  return parse_json_document(text, "fitzcal/operating-points", [](const Json& j) {
    OperatingPointDocument doc;
    doc.tool_version = require(j, "tool_version").get<std::string>();
    doc.mode = get_mode(j);
    doc.tuning_manifest_checksum =
        require(j, "tuning_manifest_checksum").get<std::string>();
    doc.tuning_images = require(j, "tuning_images").get<std::size_t>();
    for (const auto& o : require(j, "operating_points")) {
      doc.operating_points.push_back(decode_ops(o));
      if (doc.operating_points.back().mode != doc.mode) {
        throw DataError("schema-error", "operating points mix aggregation modes");
      }
    }
    if (doc.operating_points.empty()) {
      throw DataError("schema-error", "field 'operating_points' is empty");
    }
    for (const auto& c : require(j, "tuning_curves")) {
      doc.tuning_curves.push_back(decode_curves(c));
    }
    return doc;
  });
}

OperatingPointDocument read_operating_points(const std::filesystem::path& path) {
  return parse_operating_points(read_text(path));
}

std::string serialize_run_report(const RunReport& report) {
  const RunMetadata& m = report.meta;
  Json warnings = Json::array();
  for (const auto& w : m.warnings) warnings.push_back(w);
  const Json meta{{"tool_version", m.tool_version},
                  {"mode", mode_token(m.mode)},
                  {"tuning_manifest_checksum", m.tuning_manifest_checksum},
                  {"test_manifest_checksum", m.test_manifest_checksum},
                  {"operating_points_checksum", m.operating_points_checksum},
                  {"seed", m.seed ? Json(*m.seed) : Json(nullptr)},
                  {"provenance_ok", m.provenance_ok},
                  {"warnings", warnings}};
  Json ops = Json::array();
  Json evaluation = Json::array();
  Json curves = Json::array();
  for (const auto& mr : report.metrics) {
    ops.push_back(encode_ops(mr.ops));
    Json rows = Json::array();
    for (const auto& r : mr.rows) rows.push_back(encode_row(r));
    evaluation.push_back(Json{{"metric", metric_token(mr.ops.metric)}, {"rows", rows}});
    if (mr.curves) curves.push_back(encode_curves(*mr.curves));
  }
  const Json j{{"schema", "fitzcal/run-report"},
               {"schema_version", kSchemaVersion},
               {"metadata", meta},
               {"operating_points", ops},
               {"evaluation", evaluation},
               {"curves", curves}};
  return j.dump(1) + "\n";
}

RunReport parse_run_report(std::string_view text) {
  return parse_json_document(text, "fitzcal/run-report", [](const Json& j) {
    RunReport report;
    const Json& meta = require(j, "metadata");
    RunMetadata& m = report.meta;
    m.tool_version = require(meta, "tool_version").get<std::string>();
    m.mode = get_mode(meta);
    m.tuning_manifest_checksum =
        require(meta, "tuning_manifest_checksum").get<std::string>();
    m.test_manifest_checksum =
        require(meta, "test_manifest_checksum").get<std::string>();
    m.operating_points_checksum =
        require(meta, "operating_points_checksum").get<std::string>();
    const Json& seed = require(meta, "seed");
    if (!seed.is_null()) m.seed = seed.get<std::uint64_t>();
    m.provenance_ok = require(meta, "provenance_ok").get<bool>();
    m.warnings = require(meta, "warnings").get<std::vector<std::string>>();

    const Json& ops = require(j, "operating_points");
    const Json& evaluation = require(j, "evaluation");
    const Json& curves = require(j, "curves");
    if (ops.size() != evaluation.size()) {
      throw DataError("schema-error",
                      "operating_points and evaluation differ in length");
    }
    for (std::size_t i = 0; i < ops.size(); ++i) {
      MetricReport mr;
      mr.ops = decode_ops(ops[i]);
      if (get_metric(evaluation[i]) != mr.ops.metric) {
        throw DataError("schema-error", "evaluation order differs from operating_points");
      }
      for (const auto& r : require(evaluation[i], "rows")) {
        mr.rows.push_back(decode_row(r));
      }
      report.metrics.push_back(std::move(mr));
    }
    for (const auto& c : curves) {
      AggregateCurves decoded = decode_curves(c);
      auto it = std::find_if(report.metrics.begin(), report.metrics.end(),
                             [&](const MetricReport& mr) {
                               return mr.ops.metric == decoded.metric;
                             });
      if (it == report.metrics.end()) {
        throw DataError("schema-error", "curves for a metric with no operating points");
      }
      it->curves = std::move(decoded);
    }
    return report;
  });
}

void write_run_document(const RunReport& report,
                        const std::filesystem::path& path) {
  write_text(path, serialize_run_report(report));
}

RunReport read_run_document(const std::filesystem::path& path) {
  return parse_run_report(read_text(path));
}

std::optional<std::string> check_provenance(const RunReport& report,
                                            const std::string& manifest_checksum) {
  if (report.meta.tuning_manifest_checksum == manifest_checksum) {
    return std::nullopt;
  }
  return "operating points were calibrated on manifest " +
         report.meta.tuning_manifest_checksum.substr(0, 16) +
         " but the supplied manifest is " + manifest_checksum.substr(0, 16);
}

}  // namespace fitzcal
