#include "fitzcal/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fitzcal/calibration.hpp"
#include "fitzcal/checksum.hpp"
#include "fitzcal/error.hpp"
#include "fitzcal/kernels.hpp"
#include "fitzcal/prng.hpp"
#include "fitzcal/report.hpp"
#include "fitzcal/splitting.hpp"
#include "fitzcal/sweep.hpp"
#include "fitzcal/synthgen.hpp"

namespace fitzcal {
namespace {

namespace fs = std::filesystem;

std::string manifest_checksum(const DatasetManifest& manifest) {
  return sha256_hex(serialize_manifest(manifest));
}

void write_text_file(const fs::path& path, const std::string& text) {
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(
                                       text.data()),
                                   text.size()));
}

void parse_size(const std::string& text, std::uint32_t* w, std::uint32_t* h) {
  const auto x = text.find_first_of("xX");
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    std::size_t used_w = 0;
    std::size_t used_h = 0;
    const unsigned long width = std::stoul(text.substr(0, x), &used_w);
    const unsigned long height = std::stoul(text.substr(x + 1), &used_h);
    if (used_w != x || used_h != text.size() - x - 1 || width == 0 ||
        height == 0 || width > 65535 || height > 65535) {
      throw std::invalid_argument(text);
    }
    *w = static_cast<std::uint32_t>(width);
    *h = static_cast<std::uint32_t>(height);
  } catch (const std::logic_error&) {
    throw UsageError("bad-size", "expected WxH, got '" + text + "'");
  }
}

// Rewrites relative record paths so they stay valid from `new_base`.
DatasetManifest rebase(DatasetManifest manifest, const fs::path& new_base) {
  const fs::path from = fs::absolute(manifest.base_dir).lexically_normal();
  const fs::path to = fs::absolute(new_base).lexically_normal();
  if (from == to) return manifest;
  for (auto& r : manifest.records) {
    for (std::string* p : {&r.prob_path, &r.mask_path}) {
      if (fs::path(*p).is_absolute()) continue;
      *p = (from / *p).lexically_normal().lexically_relative(to).generic_string();
    }
  }
  manifest.base_dir = new_base;
  return manifest;
}

struct Common {
  unsigned threads = 0;
  std::string cache;
  std::string mode = "macro";
};

SweepOptions sweep_options(const Common& c) {
  SweepOptions o;
  o.threads = c.threads == 0 ? default_thread_count() : c.threads;
  if (!c.cache.empty()) o.cache_dir = fs::path(c.cache);
  return o;
}

AggregationMode mode_of(const Common& c) {
  AggregationMode m;
  if (!parse_mode(c.mode, &m)) {
    throw UsageError("bad-mode", "mode must be macro or micro");
  }
  return m;
}

// --- subcommands ---

int cmd_synth(const SynthConfig& base, const std::string& size,
              const std::string& shift, const std::string& out_dir,
              std::ostream& out) {
  SynthConfig cfg = base;
  parse_size(size, &cfg.width, &cfg.height);
  cfg.shift_by_group = parse_shift_spec(shift);
  const DatasetManifest m = generate(cfg, out_dir);
  out << "wrote " << m.records.size() << " images and "
      << (fs::path(out_dir) / "manifest.csv").string() << '\n';
  return kExitOk;
}

int cmd_split(const std::string& in_path, const std::string& out_path,
              std::uint64_t seed, std::ostream& out, std::ostream& err) {
  std::error_code ec;
  if (fs::exists(out_path) && fs::equivalent(in_path, out_path, ec)) {
    throw UsageError("in-place", "split never overwrites its input manifest");
  }
  const DatasetManifest input = load_manifest(in_path);
  SplitConfig cfg;
  cfg.seed = seed;
  SplitResult result = split(input, cfg);
  for (const auto& w : result.warnings) err << "fitzcal: warning: " << w << '\n';
  const fs::path out_dir = fs::path(out_path).parent_path();
  const DatasetManifest written = rebase(std::move(result.manifest), out_dir);
  write_manifest(written, out_path);

  const SplitReport report = verify_split(written);
  out << "group  train  tune  test  (images)\n";
  for (GroupLabel g : kAllGroups) {
    const auto& c = report.image_counts[g];
    char line[64];
    std::snprintf(line, sizeof(line), "%-5s %6zu %5zu %5zu\n",
                  std::string(group_token(g)).c_str(), c[0], c[1], c[2]);
    out << line;
  }
  return kExitOk;
}

int cmd_sweep(const std::string& manifest_path, const Common& c,
              const std::string& split_name, const std::string& dump_dir,
              std::ostream& out) {
  if (c.cache.empty()) throw UsageError("missing-cache", "--cache is required");
  const DatasetManifest m = load_manifest(manifest_path);
  std::vector<ImageRecord> records;
  if (split_name == "all") {
    records = m.records;
  } else {
    Split s;
    if (!parse_split(split_name, &s)) {
      throw UsageError("bad-split", "unknown split '" + split_name + "'");
    }
    records = records_in_split(m, s);
  }
  SweepStats stats;
  const auto sweeps = sweep_records(m, records, sweep_options(c), &stats);
  if (!dump_dir.empty()) {
    fs::create_directories(dump_dir);
    for (const auto& s : sweeps) {
      for (Metric metric : kAllMetrics) {
        std::ofstream f(fs::path(dump_dir) /
                        (safe_file_stem(s.image_id) + "." +
                         std::string(metric_token(metric)) + ".csv"));
        write_curve_csv(s.curve(metric), f);
      }
    }
  }
  out << "swept " << sweeps.size() << " images (" << stats.cache_hits
      << " cached, " << stats.computed << " computed)\n";
  return kExitOk;
}

int cmd_calibrate(const std::string& manifest_path, const Common& c,
                  const std::string& out_path, std::ostream& out) {
  const DatasetManifest m = load_manifest(manifest_path);
  // Only tuning records are read; test data never reaches selection.
  const auto tune = records_in_split(m, Split::kTune);
  if (tune.empty()) {
    throw DataError("empty-tune-split",
                    "manifest has no records in the tune split");
  }
  const AggregationMode mode = mode_of(c);
  const auto sweeps = sweep_records(m, tune, sweep_options(c));

  OperatingPointDocument doc;
  doc.mode = mode;
  doc.tuning_manifest_checksum = manifest_checksum(m);
  doc.tuning_images = sweeps.size();
  for (Metric metric : kAllMetrics) {
    AggregateCurves curves = aggregate_by_group(sweeps, metric, mode);
    OperatingPointSet ops = select_optima(curves, mode);
    ops.tuning_manifest_checksum = doc.tuning_manifest_checksum;
    tuning_dominance_check(sweeps, ops);
    doc.operating_points.push_back(ops);
    doc.tuning_curves.push_back(std::move(curves));
  }
  write_text_file(out_path, serialize_operating_points(doc));

  for (const auto& ops : doc.operating_points) {
    out << metric_display_name(ops.metric) << ": tau_all=" << ops.tau_all.str();
    for (GroupLabel g : kAllGroups) {
      out << ' ' << group_token(g) << '=' << ops.tau_by_group[g].str()
          << (ops.is_fallback(g) ? "*" : "");
    }
    out << '\n';
  }
  return kExitOk;
}

int cmd_evaluate(const std::string& manifest_path, const std::string& ops_path,
                 const Common& c, const std::string& out_path,
                 std::ostream& out, std::ostream& err) {
  const DatasetManifest m = load_manifest(manifest_path);
  const auto ops_bytes = read_file_bytes(ops_path);
  const OperatingPointDocument doc = parse_operating_points(std::string_view(
      reinterpret_cast<const char*>(ops_bytes.data()), ops_bytes.size()));
  // Only test records are read.
  const auto test = records_in_split(m, Split::kTest);
  if (test.empty()) {
    throw DataError("empty-test-split",
                    "manifest has no records in the test split");
  }
  const auto sweeps = sweep_records(m, test, sweep_options(c));

  RunReport report;
  report.meta.mode = doc.mode;
  report.meta.tuning_manifest_checksum = doc.tuning_manifest_checksum;
  report.meta.test_manifest_checksum = manifest_checksum(m);
  report.meta.operating_points_checksum = sha256_hex(ops_bytes);
  if (auto warning = check_provenance(report, report.meta.test_manifest_checksum)) {
    report.meta.provenance_ok = false;
    report.meta.warnings.push_back(*warning);
    err << "fitzcal: provenance: " << *warning << '\n';
  }
  for (const auto& ops : doc.operating_points) {
    MetricReport mr;
    mr.ops = ops;
    mr.rows = evaluate_frozen(sweeps, ops);
    for (const auto& curves : doc.tuning_curves) {
      if (curves.metric == ops.metric) mr.curves = curves;
    }
    report.metrics.push_back(std::move(mr));
  }
  write_run_document(report, out_path);
  out << render_table(report, TableFormat::kText);
  return kExitOk;
}

int cmd_report(const std::string& run_path, const std::string& format,
               const std::string& out_path, const std::string& svg_dir,
               const std::string& manifest_path, std::ostream& out,
               std::ostream& err) {
  const RunReport report = read_run_document(run_path);
  if (!manifest_path.empty()) {
    if (auto warning = check_provenance(
            report, manifest_checksum(load_manifest(manifest_path)))) {
      err << "fitzcal: provenance: " << *warning << '\n';
    }
  }
  TableFormat fmt;
  if (format == "text") {
    fmt = TableFormat::kText;
  } else if (format == "csv") {
    fmt = TableFormat::kCsv;
  } else {
    throw UsageError("bad-format", "format must be text or csv");
  }
  const std::string table = render_table(report, fmt);
  if (out_path.empty()) {
    out << table;
  } else {
    write_text_file(out_path, table);
  }
  if (!svg_dir.empty()) {
    for (const auto& p : write_curve_plots(report, svg_dir)) {
      out << "wrote " << p.string() << '\n';
    }
  }
  return kExitOk;
}

// Oracle-equivalence and dominance suites over randomly configured
// synthetic datasets.
int cmd_selftest(std::size_t datasets, std::uint64_t seed, const Common& c,
                 std::ostream& out) {
  SplitMix64 rng(seed);
  const auto& active = kernels::active();
  const auto& scalar = kernels::scalar::table();
  std::size_t images_checked = 0;
  for (std::size_t d = 0; d < datasets; ++d) {
    SynthConfig cfg;
    cfg.seed = rng.next();
    cfg.images_per_group = 3 + rng.bounded(6);
    cfg.width = static_cast<std::uint32_t>(8 + rng.bounded(41));
    cfg.height = static_cast<std::uint32_t>(8 + rng.bounded(41));
    cfg.lesion_fraction = 0.02 + 0.3 * rng.uniform_open0();
    cfg.sigma = 0.5 + 2.0 * rng.uniform_open0();
    for (GroupLabel g : kAllGroups) {
      cfg.shift_by_group[g] = 1.5 * rng.uniform_open0() - 0.25;
    }
    const auto images = generate_images(cfg);

    std::vector<ImageSweep> sweeps(images.size());
    std::vector<char> ok(images.size(), 1);
    parallel_for(images.size(), c.threads == 0 ? default_thread_count() : c.threads,
                 [&](std::size_t i) {
      const auto& img = images[i];
      const ProbMap prob = ProbMap::from_raw(img.width, img.height, img.probs);
      std::vector<std::uint16_t> q_ref(img.probs.size());
      scalar.quantize(img.probs, q_ref);
      if (!std::equal(q_ref.begin(), q_ref.end(), prob.milli().begin())) ok[i] = 0;
      for (Metric m : kAllMetrics) {
        if (!(curve_fast(prob, img.mask, m) == curve_naive(prob, img.mask, m))) {
          ok[i] = 0;
        }
      }
      const auto t = Threshold::from_index(i % kGridSize);
      const auto a = active.count_at(prob.milli(), img.mask.labels(), t.milli());
      const auto b = scalar.count_at(prob.milli(), img.mask.labels(), t.milli());
      if (a.tp != b.tp || a.fp != b.fp || a.positives != b.positives) ok[i] = 0;
      sweeps[i] = make_sweep(img.record.image_id, img.record.group, prob, img.mask);
    });
    for (std::size_t i = 0; i < images.size(); ++i) {
      if (!ok[i]) {
        throw InternalError("oracle-mismatch",
                            "dataset " + std::to_string(d) + " image '" +
                                images[i].record.image_id +
                                "': fast sweep disagrees with the reference");
      }
    }
    images_checked += images.size();

    // Calibrate on the tune split of a seed-0 stratified split.
    DatasetManifest manifest;
    for (const auto& img : images) manifest.records.push_back(img.record);
    const DatasetManifest assigned = split(manifest, SplitConfig{}).manifest;
    verify_split(assigned);
    std::vector<ImageSweep> tune;
    for (std::size_t i = 0; i < images.size(); ++i) {
      if (assigned.records[i].split == Split::kTune) tune.push_back(sweeps[i]);
    }
    std::sort(tune.begin(), tune.end(), [](const auto& a, const auto& b) {
      return a.image_id < b.image_id;
    });
    for (AggregationMode mode : {AggregationMode::kMacro, AggregationMode::kMicro}) {
      for (Metric m : kAllMetrics) {
        tuning_dominance_check(tune, select_optima(tune, m, mode));
      }
    }
  }
  out << "selftest passed: " << datasets << " datasets, " << images_checked
      << " images, kernels=" << active.name << '\n';
  return kExitOk;
}

void add_common(CLI::App* cmd, Common* c, bool with_mode) {
  cmd->add_option("--threads", c->threads,
                  "worker threads (default: hardware concurrency)")
      ->envname("FITZCAL_THREADS");
  cmd->add_option("--cache", c->cache, "per-image sweep cache directory");
  if (with_mode) {
    cmd->add_option("--mode", c->mode, "aggregation: macro or micro")
        ->check(CLI::IsMember({"macro", "micro"}));
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"fitzcal: group-stratified threshold calibration for binary "
               "segmentation",
               "fitzcal"};
  app.set_config("--config", "", "read options from a TOML/INI file");
  app.require_subcommand(1);

  // synth
  SynthConfig synth_cfg;
  std::string synth_size = "64x64";
  std::string synth_shift = "VI=1.0";
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--seed", synth_cfg.seed, "PRNG seed")->capture_default_str();
  synth->add_option("--images-per-group", synth_cfg.images_per_group)
      ->capture_default_str();
  synth->add_option("--size", synth_size, "image size WxH")->capture_default_str();
  synth->add_option("--lesion-frac", synth_cfg.lesion_fraction)->capture_default_str();
  synth->add_option("--mu-fg", synth_cfg.mu_fg, "foreground logit mean")
      ->capture_default_str();
  synth->add_option("--mu-bg", synth_cfg.mu_bg, "background logit mean")
      ->capture_default_str();
  synth->add_option("--sigma", synth_cfg.sigma, "logit noise std dev")
      ->capture_default_str();
  synth->add_option("--shift", synth_shift, "per-group logit shifts, e.g. VI=1.0,V=0.5")
      ->capture_default_str();
  synth->add_option("--out", synth_out, "output directory")->required();

  // split
  std::string split_in;
  std::string split_out;
  std::uint64_t split_seed = 0;
  auto* split_cmd = app.add_subcommand("split", "assign train/tune/test splits");
  split_cmd->add_option("--manifest", split_in, "input manifest")->required();
  split_cmd->add_option("--out", split_out, "output manifest")->required();
  split_cmd->add_option("--seed", split_seed)->capture_default_str();

  // sweep
  std::string sweep_manifest;
  std::string sweep_split = "all";
  std::string sweep_dump;
  Common sweep_common;
  auto* sweep = app.add_subcommand("sweep", "compute and cache per-image curves");
  sweep->add_option("--manifest", sweep_manifest)->required();
  sweep->add_option("--split", sweep_split, "all, train, tune or test")
      ->capture_default_str();
  sweep->add_option("--dump-dir", sweep_dump, "also write tau,value CSV curves");
  add_common(sweep, &sweep_common, false);

  // calibrate
  std::string cal_manifest;
  std::string cal_out;
  Common cal_common;
  auto* calibrate = app.add_subcommand(
      "calibrate", "select global and per-group optima on the tune split");
  calibrate->add_option("--manifest", cal_manifest)->required();
  calibrate->add_option("--out", cal_out, "operating-point document")->required();
  add_common(calibrate, &cal_common, true);

  // evaluate
  std::string eval_manifest;
  std::string eval_ops;
  std::string eval_out;
  Common eval_common;
  auto* evaluate = app.add_subcommand(
      "evaluate", "apply frozen operating points to the test split");
  evaluate->add_option("--manifest", eval_manifest)->required();
  evaluate->add_option("--ops", eval_ops, "operating-point document")->required();
  evaluate->add_option("--out", eval_out, "run document")->required();
  add_common(evaluate, &eval_common, false);

  // report
  std::string report_run;
  std::string report_format = "text";
  std::string report_out;
  std::string report_svg;
  std::string report_manifest;
  auto* report = app.add_subcommand("report", "render tables and curve plots");
  report->add_option("--run", report_run, "run document")->required();
  report->add_option("--format", report_format, "text or csv")->capture_default_str();
  report->add_option("--out", report_out, "table file (default: stdout)");
  report->add_option("--svg-dir", report_svg, "write curves_<metric>.svg here");
  report->add_option("--manifest", report_manifest,
                     "check provenance against this manifest");

  // selftest
  std::size_t self_datasets = 10;
  std::uint64_t self_seed = 0;
  Common self_common;
  auto* selftest = app.add_subcommand(
      "selftest", "oracle-equivalence and dominance checks on synthetic data");
  selftest->add_option("--datasets", self_datasets)->capture_default_str();
  selftest->add_option("--seed", self_seed)->capture_default_str();
  add_common(selftest, &self_common, false);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      err << "fitzcal: usage: " << e.what() << '\n';
      return kExitUsage;
    }

    if (*synth) return cmd_synth(synth_cfg, synth_size, synth_shift, synth_out, out);
    if (*split_cmd) return cmd_split(split_in, split_out, split_seed, out, err);
    if (*sweep) return cmd_sweep(sweep_manifest, sweep_common, sweep_split, sweep_dump, out);
    if (*calibrate) return cmd_calibrate(cal_manifest, cal_common, cal_out, out);
    if (*evaluate) {
      return cmd_evaluate(eval_manifest, eval_ops, eval_common, eval_out, out, err);
    }
    if (*report) {
      return cmd_report(report_run, report_format, report_out, report_svg,
                        report_manifest, out, err);
    }
    if (*selftest) return cmd_selftest(self_datasets, self_seed, self_common, out);
  } catch (const Error& e) {
    err << "fitzcal: " << e.code() << ": " << e.what() << '\n';
    switch (e.kind()) {
      case ErrorKind::kUsage:
        return kExitUsage;
      case ErrorKind::kData:
        return kExitData;
      case ErrorKind::kInternal:
        return kExitInternal;
    }
  } catch (const fs::filesystem_error& e) {
    err << "fitzcal: io-error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "fitzcal: internal: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace fitzcal
