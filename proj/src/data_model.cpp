#include "fitzcal/data_model.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <sstream>
#include <unordered_set>

#include "fitzcal/error.hpp"
#include "fitzcal/kernels.hpp"

namespace fitzcal {
namespace {

constexpr std::uint64_t kMaxPixels = std::uint64_t{1} << 31;

std::size_t checked_pixel_count(std::uint32_t width, std::uint32_t height) {
  if (width == 0 || height == 0) {
    throw DataError("bad-dimensions", "image dimensions must be at least 1x1");
  }
  const std::uint64_t n = std::uint64_t{width} * height;
  if (n > kMaxPixels) {
    throw DataError("bad-dimensions", "image has too many pixels");
  }
  return static_cast<std::size_t>(n);
}

std::uint32_t read_u32_le(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) |
         (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
}

void append_u32_le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

struct BinaryHeader {
  std::uint32_t width;
  std::uint32_t height;
  std::size_t pixels;
};

BinaryHeader read_binary_header(std::span<const std::uint8_t> bytes,
                                std::string_view magic,
                                std::size_t bytes_per_pixel) {
  if (bytes.size() < 4 ||
      std::memcmp(bytes.data(), magic.data(), magic.size()) != 0) {
    throw DataError("bad-magic",
                    "expected magic '" + std::string(magic) + "'");
  }
  if (bytes.size() < 12) {
    throw DataError("truncated", "file ends inside the header");
  }
  BinaryHeader h;
  h.width = read_u32_le(bytes.data() + 4);
  h.height = read_u32_le(bytes.data() + 8);
  h.pixels = checked_pixel_count(h.width, h.height);
  const std::size_t expected = 12 + h.pixels * bytes_per_pixel;
  if (bytes.size() < expected) {
    throw DataError("truncated", "payload holds " +
                                     std::to_string(bytes.size() - 12) +
                                     " bytes, expected " +
                                     std::to_string(expected - 12));
  }
  if (bytes.size() > expected) {
    throw DataError("trailing-bytes", "unexpected bytes after the payload");
  }
  return h;
}

// --- PGM ---

class PgmCursor {
 public:
  explicit PgmCursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  // Next whitespace-delimited header token, skipping '#' comments.
  std::uint32_t next_uint() {
    skip_space_and_comments();
    std::uint64_t v = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > std::numeric_limits<std::uint32_t>::max()) {
        throw DataError("bad-pgm", "PGM header value out of range");
      }
      ++pos_;
      ++digits;
    }
    if (digits == 0) {
      throw pos_ >= bytes_.size() ? DataError("truncated", "PGM ends early")
                                  : DataError("bad-pgm", "malformed PGM");
    }
    return static_cast<std::uint32_t>(v);
  }

  // Raster starts after exactly one whitespace byte following maxval.
  void consume_single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw DataError("bad-pgm", "missing separator before PGM raster");
    }
    ++pos_;
  }

  std::size_t pos() const { return pos_; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

BinaryMask decode_pgm(std::span<const std::uint8_t> bytes) {
  const bool binary = bytes[1] == '5';
  PgmCursor cur(bytes);
  const std::uint32_t width = cur.next_uint();
  const std::uint32_t height = cur.next_uint();
  const std::uint32_t maxval = cur.next_uint();
  const std::size_t n = checked_pixel_count(width, height);
  if (maxval == 0 || maxval > 255) {
    throw DataError("bad-pgm", "only 8-bit PGM masks are supported");
  }
  std::vector<std::uint8_t> labels(n);
  if (binary) {
    cur.consume_single_space();
    const std::size_t start = cur.pos();
    if (bytes.size() - start < n) {
      throw DataError("truncated", "PGM raster is shorter than width*height");
    }
    for (std::size_t i = 0; i < n; ++i) labels[i] = bytes[start + i] > 127;
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t v = cur.next_uint();
      if (v > maxval) throw DataError("bad-pgm", "PGM sample exceeds maxval");
      labels[i] = v > 127;
    }
  }
  return BinaryMask(width, height, std::move(labels));
}

// --- CSV ---

std::vector<std::string> split_csv_line(const std::string& line,
                                        std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (quoted) {
    throw DataError("parse-error", "line " + std::to_string(line_no) +
                                       ": unterminated quoted field");
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

constexpr std::array<std::string_view, 6> kManifestColumns = {
    "image_id", "patient_id", "group", "prob_path", "mask_path", "split"};

}  // namespace

// --- ProbMap / BinaryMask ---

ProbMap::ProbMap(std::uint32_t width, std::uint32_t height,
                 std::vector<std::uint16_t> milli)
    : width_(width), height_(height), milli_(std::move(milli)) {
  if (checked_pixel_count(width, height) != milli_.size()) {
    throw DataError("bad-dimensions",
                    "probability array length differs from width*height");
  }
  if (std::any_of(milli_.begin(), milli_.end(),
                  [](std::uint16_t q) { return q > kMilliMax; })) {
    throw DataError("value-out-of-range",
                    "quantized probability exceeds 1000");
  }
}

ProbMap ProbMap::from_raw(std::uint32_t width, std::uint32_t height,
                          std::span<const float> raw) {
  if (checked_pixel_count(width, height) != raw.size()) {
    throw DataError("bad-dimensions",
                    "probability array length differs from width*height");
  }
  std::vector<std::uint16_t> milli(raw.size());
  const std::size_t bad = kernels::active().quantize(raw, milli);
  if (bad != kernels::kAllValid) {
    const float v = raw[bad];
    throw DataError(v != v ? "nan-probability" : "value-out-of-range",
                    "pixel " + std::to_string(bad) + " holds " +
                        std::to_string(v) + ", outside [0, 1]");
  }
  return ProbMap(width, height, std::move(milli));
}

BinaryMask::BinaryMask(std::uint32_t width, std::uint32_t height,
                       std::vector<std::uint8_t> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
  if (checked_pixel_count(width, height) != labels_.size()) {
    throw DataError("bad-dimensions",
                    "label array length differs from width*height");
  }
  if (std::any_of(labels_.begin(), labels_.end(),
                  [](std::uint8_t v) { return v > 1; })) {
    throw DataError("invalid-label", "mask labels must be 0 or 1");
  }
}

// --- Split ---

std::string_view split_token(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kTune:
      return "tune";
    case Split::kTest:
      return "test";
    case Split::kUnassigned:
      break;
  }
  return "unassigned";
}

bool parse_split(std::string_view token, Split* out) {
  if (token.empty() || token == "unassigned") {
    *out = Split::kUnassigned;
  } else if (token == "train") {
    *out = Split::kTrain;
  } else if (token == "tune") {
    *out = Split::kTune;
  } else if (token == "test") {
    *out = Split::kTest;
  } else {
    return false;
  }
  return true;
}

// --- Manifest ---

std::filesystem::path DatasetManifest::resolve(const std::string& path) const {
  std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("io-error", "cannot open manifest " + path.string());
  }
  return parse_manifest(in, path.parent_path());
}

DatasetManifest parse_manifest(std::istream& in,
                               const std::filesystem::path& base_dir) {
  DatasetManifest manifest;
  manifest.base_dir = base_dir;

  std::string line;
  std::size_t line_no = 0;
  std::array<std::optional<std::size_t>, kManifestColumns.size()> column_of;
  bool have_header = false;
  std::unordered_set<std::string> seen_ids;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (line.empty()) continue;
    const auto fields = split_csv_line(line, line_no);
    const auto where = "line " + std::to_string(line_no) + ": ";

    if (!have_header) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        const auto it = std::find(kManifestColumns.begin(),
                                  kManifestColumns.end(), fields[i]);
        if (it == kManifestColumns.end()) {
          throw DataError("parse-error", where + "unknown column '" +
                                             fields[i] + "'");
        }
        auto& slot = column_of[static_cast<std::size_t>(
            it - kManifestColumns.begin())];
        if (slot) {
          throw DataError("parse-error",
                          where + "duplicate column '" + fields[i] + "'");
        }
        slot = i;
      }
      for (std::size_t c = 0; c + 1 < kManifestColumns.size(); ++c) {
        if (!column_of[c]) {
          throw DataError("parse-error",
                          where + "missing column '" +
                              std::string(kManifestColumns[c]) + "'");
        }
      }
      have_header = true;
      continue;
    }

    if (fields.size() != static_cast<std::size_t>(std::count_if(
                             column_of.begin(), column_of.end(),
                             [](const auto& c) { return c.has_value(); }))) {
      throw DataError("parse-error",
                      where + "expected one field per header column");
    }
    ImageRecord r;
    r.image_id = fields[*column_of[0]];
    r.patient_id = fields[*column_of[1]];
    const std::string& group_tok = fields[*column_of[2]];
    r.prob_path = fields[*column_of[3]];
    r.mask_path = fields[*column_of[4]];
    if (r.image_id.empty() || r.patient_id.empty()) {
      throw DataError("parse-error", where + "empty image_id or patient_id");
    }
    const auto group = parse_group(group_tok);
    if (!group) {
      throw DataError("unknown-group",
                      where + "unknown group token '" + group_tok + "'");
    }
    r.group = *group;
    if (column_of[5] && !parse_split(fields[*column_of[5]], &r.split)) {
      throw DataError("parse-error", where + "unknown split token '" +
                                         fields[*column_of[5]] + "'");
    }
    if (!seen_ids.insert(r.image_id).second) {
      throw DataError("duplicate-image-id",
                      where + "duplicate image_id '" + r.image_id + "'");
    }
    manifest.records.push_back(std::move(r));
  }
  if (!have_header) {
    throw DataError("parse-error", "line 1: manifest has no header row");
  }
  return manifest;
}

std::string serialize_manifest(const DatasetManifest& manifest) {
  std::string out = "image_id,patient_id,group,prob_path,mask_path,split\n";
  for (const auto& r : manifest.records) {
    out += csv_field(r.image_id) + ',' + csv_field(r.patient_id) + ',' +
           std::string(group_token(r.group)) + ',' + csv_field(r.prob_path) +
           ',' + csv_field(r.mask_path) + ',' +
           std::string(split_token(r.split)) + '\n';
  }
  return out;
}

void write_manifest(const DatasetManifest& manifest,
                    const std::filesystem::path& path) {
  const std::string text = serialize_manifest(manifest);
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(
                                       text.data()),
                                   text.size()));
}

PerGroup<std::size_t> group_histogram(const DatasetManifest& manifest) {
  PerGroup<std::size_t> counts(0);
  for (const auto& r : manifest.records) ++counts[r.group];
  return counts;
}

// --- FPM1 ---

ProbMap decode_probmap(std::span<const std::uint8_t> bytes) {
  const BinaryHeader h = read_binary_header(bytes, "FPM1", 4);
  std::vector<float> raw(h.pixels);
  const std::uint8_t* p = bytes.data() + 12;
  for (std::size_t i = 0; i < h.pixels; ++i, p += 4) {
    raw[i] = std::bit_cast<float>(read_u32_le(p));
  }
  return ProbMap::from_raw(h.width, h.height, raw);
}

ProbMap load_probmap(const std::filesystem::path& path) {
  return decode_probmap(read_file_bytes(path));
}

std::vector<std::uint8_t> encode_probmap(std::uint32_t width,
                                         std::uint32_t height,
                                         std::span<const float> raw) {
  if (checked_pixel_count(width, height) != raw.size()) {
    throw DataError("bad-dimensions",
                    "probability array length differs from width*height");
  }
  std::vector<std::uint8_t> out;
  out.reserve(12 + raw.size() * 4);
  out.insert(out.end(), {'F', 'P', 'M', '1'});
  append_u32_le(out, width);
  append_u32_le(out, height);
  for (float v : raw) append_u32_le(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

std::vector<std::uint8_t> encode_probmap(const ProbMap& map) {
  std::vector<float> raw(map.size());
  std::transform(map.milli().begin(), map.milli().end(), raw.begin(),
                 [](std::uint16_t q) { return static_cast<float>(q / 1000.0); });
  return encode_probmap(map.width(), map.height(), raw);
}

void write_probmap(const std::filesystem::path& path, const ProbMap& map) {
  write_file_bytes(path, encode_probmap(map));
}

void write_raw_probmap(const std::filesystem::path& path, std::uint32_t width,
                       std::uint32_t height, std::span<const float> raw) {
  write_file_bytes(path, encode_probmap(width, height, raw));
}

// --- FBM1 / PGM ---

BinaryMask decode_mask(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 2 && bytes[0] == 'P' &&
      (bytes[1] == '5' || bytes[1] == '2')) {
    return decode_pgm(bytes);
  }
  const BinaryHeader h = read_binary_header(bytes, "FBM1", 1);
  std::vector<std::uint8_t> labels(bytes.begin() + 12, bytes.end());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > 1) {
      throw DataError("invalid-label", "pixel " + std::to_string(i) +
                                           " holds label " +
                                           std::to_string(labels[i]));
    }
  }
  return BinaryMask(h.width, h.height, std::move(labels));
}

BinaryMask load_mask(const std::filesystem::path& path) {
  return decode_mask(read_file_bytes(path));
}

std::vector<std::uint8_t> encode_mask(const BinaryMask& mask) {
  std::vector<std::uint8_t> out;
  out.reserve(12 + mask.size());
  out.insert(out.end(), {'F', 'B', 'M', '1'});
  append_u32_le(out, mask.width());
  append_u32_le(out, mask.height());
  out.insert(out.end(), mask.labels().begin(), mask.labels().end());
  return out;
}

void write_mask(const std::filesystem::path& path, const BinaryMask& mask) {
  write_file_bytes(path, encode_mask(mask));
}

// --- files ---

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("io-error", "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw DataError("io-error", "read failed: " + path.string());
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("io-error", "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("io-error", "write failed: " + path.string());
}

}  // namespace fitzcal
