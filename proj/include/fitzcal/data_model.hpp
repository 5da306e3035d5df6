#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fitzcal/group.hpp"

namespace fitzcal {

// Probabilities are stored in milli-units: q = round(p * 1000), q in [0, 1000].
inline constexpr std::uint16_t kMilliMax = 1000;

// Raw inputs may stray outside [0, 1] by at most this much before rejection.
inline constexpr double kProbTolerance = 1e-6;

// Quantized per-pixel foreground probabilities of one image, row-major.
class ProbMap {
 public:
  ProbMap() = default;

  // Throws a data error when dimensions are inconsistent or a value exceeds
  // kMilliMax.
  ProbMap(std::uint32_t width, std::uint32_t height,
          std::vector<std::uint16_t> milli);

  // Validates and quantizes raw probabilities (same rules as FPM1 ingest).
  static ProbMap from_raw(std::uint32_t width, std::uint32_t height,
                          std::span<const float> raw);

  std::uint32_t width() const noexcept { return width_; }
  std::uint32_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return milli_.size(); }
  std::span<const std::uint16_t> milli() const noexcept { return milli_; }

  bool operator==(const ProbMap&) const = default;

 private:
  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
  std::vector<std::uint16_t> milli_;
};

// Ground-truth lesion labels of one image, row-major, values in {0, 1}.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(std::uint32_t width, std::uint32_t height,
             std::vector<std::uint8_t> labels);

  std::uint32_t width() const noexcept { return width_; }
  std::uint32_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return labels_.size(); }
  std::span<const std::uint8_t> labels() const noexcept { return labels_; }

  bool operator==(const BinaryMask&) const = default;

 private:
  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
  std::vector<std::uint8_t> labels_;
};

enum class Split : std::uint8_t { kUnassigned, kTrain, kTune, kTest };

std::string_view split_token(Split s);
// Empty token parses as kUnassigned.
bool parse_split(std::string_view token, Split* out);

struct ImageRecord {
  std::string image_id;
  std::string patient_id;
  GroupLabel group = GroupLabel::kI;
  std::string prob_path;
  std::string mask_path;
  Split split = Split::kUnassigned;

  bool operator==(const ImageRecord&) const = default;
};

struct DatasetManifest {
  std::vector<ImageRecord> records;
  // Relative prob/mask paths resolve against this directory.
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& path) const;
};

DatasetManifest load_manifest(const std::filesystem::path& path);
DatasetManifest parse_manifest(std::istream& in,
                               const std::filesystem::path& base_dir);
// Canonical CSV text (header plus one row per record, '\n' line endings).
std::string serialize_manifest(const DatasetManifest& manifest);
void write_manifest(const DatasetManifest& manifest,
                    const std::filesystem::path& path);

PerGroup<std::size_t> group_histogram(const DatasetManifest& manifest);

// FPM1: "FPM1", u32 LE width, u32 LE height, width*height binary32 LE.
ProbMap load_probmap(const std::filesystem::path& path);
ProbMap decode_probmap(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_probmap(std::uint32_t width,
                                         std::uint32_t height,
                                         std::span<const float> raw);
// Writes milli / 1000 as binary32; decoding reproduces the same milli values.
std::vector<std::uint8_t> encode_probmap(const ProbMap& map);
void write_probmap(const std::filesystem::path& path, const ProbMap& map);
void write_raw_probmap(const std::filesystem::path& path, std::uint32_t width,
                       std::uint32_t height, std::span<const float> raw);

// FBM1 ("FBM1", u32 LE width, u32 LE height, bytes in {0,1}) or 8-bit PGM
// (P5 or P2) where any value > 127 is foreground.
BinaryMask load_mask(const std::filesystem::path& path);
BinaryMask decode_mask(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_mask(const BinaryMask& mask);
void write_mask(const std::filesystem::path& path, const BinaryMask& mask);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes);

}  // namespace fitzcal
