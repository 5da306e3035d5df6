#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "fitzcal/data_model.hpp"
#include "fitzcal/error.hpp"
#include "test_util.hpp"

namespace fitzcal {
namespace {

std::vector<std::uint8_t> fpm1(std::uint32_t w, std::uint32_t h,
                               std::vector<float> values) {
  return encode_probmap(w, h, values);
}

std::string error_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

TEST(ProbMapTest, SinglePixelHalf) {
  const ProbMap m = decode_probmap(fpm1(1, 1, {0.5f}));
  EXPECT_EQ(m.width(), 1u);
  EXPECT_EQ(m.height(), 1u);
  EXPECT_EQ(std::vector<std::uint16_t>(m.milli().begin(), m.milli().end()),
            std::vector<std::uint16_t>{500});
}

TEST(ProbMapTest, RoundsHalfUpAndClamps) {
  // round(0.0005 * 1000) = 1 (half up); round(0.9996 * 1000) = 1000.
  const ProbMap m = decode_probmap(fpm1(1, 2, {0.0005f, 0.9996f}));
  EXPECT_EQ(m.milli()[0], 1);
  EXPECT_EQ(m.milli()[1], 1000);
}

TEST(ProbMapTest, HeaderIsLittleEndian) {
  const auto bytes = fpm1(3, 2, std::vector<float>(6, 0.25f));
  ASSERT_EQ(bytes.size(), 12u + 6 * 4);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "FPM1");
  EXPECT_EQ(bytes[4], 3);
  EXPECT_EQ(bytes[8], 2);
  // 0.25f == 0x3E800000
  EXPECT_EQ(bytes[12], 0x00);
  EXPECT_EQ(bytes[15], 0x3E);
  EXPECT_EQ(bytes[14], 0x80);
}

TEST(ProbMapTest, Errors) {
  auto bad_magic = fpm1(1, 1, {0.5f});
  bad_magic[0] = 'X';
  bad_magic[1] = 'X';
  bad_magic[2] = 'X';
  bad_magic[3] = 'X';
  EXPECT_EQ(error_code([&] { decode_probmap(bad_magic); }), "bad-magic");

  auto truncated = fpm1(2, 2, {0.1f, 0.2f, 0.3f, 0.4f});
  truncated.pop_back();
  EXPECT_EQ(error_code([&] { decode_probmap(truncated); }), "truncated");

  EXPECT_EQ(error_code([&] {
              decode_probmap(fpm1(1, 1, {std::numeric_limits<float>::quiet_NaN()}));
            }),
            "nan-probability");
  EXPECT_EQ(error_code([&] { decode_probmap(fpm1(1, 1, {1.01f})); }),
            "value-out-of-range");
  EXPECT_EQ(error_code([&] { decode_probmap(fpm1(1, 1, {-0.5f})); }),
            "value-out-of-range");
  EXPECT_EQ(error_code([&] { ProbMap(2, 2, {1, 2, 3}); }), "bad-dimensions");
  EXPECT_EQ(error_code([&] { ProbMap(0, 1, {}); }), "bad-dimensions");
  EXPECT_EQ(error_code([&] { ProbMap(1, 1, {1001}); }), "value-out-of-range");
}

TEST(ProbMapTest, RoundTripAndIdempotentQuantization) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    const auto img = testing::random_image(rng, 20, i);
    const ProbMap again = decode_probmap(encode_probmap(img.prob));
    EXPECT_EQ(again, img.prob);
    const BinaryMask mask_again = decode_mask(encode_mask(img.mask));
    EXPECT_EQ(mask_again, img.mask);
  }
}

TEST(MaskTest, Fbm1Identity) {
  const BinaryMask m(2, 2, {0, 1, 1, 0});
  const BinaryMask back = decode_mask(encode_mask(m));
  EXPECT_EQ(std::vector<std::uint8_t>(back.labels().begin(), back.labels().end()),
            (std::vector<std::uint8_t>{0, 1, 1, 0}));
}

TEST(MaskTest, PgmThresholdAt127) {
  const std::string p5 = std::string("P5\n# comment\n2 1\n255\n") + "\xC8\x0A";
  const BinaryMask m = decode_mask(std::vector<std::uint8_t>(p5.begin(), p5.end()));
  EXPECT_EQ(m.width(), 2u);
  EXPECT_EQ(m.labels()[0], 1);  // 200
  EXPECT_EQ(m.labels()[1], 0);  // 10

  const std::string p2 = "P2 3 1 255\n127 128 0\n";
  const BinaryMask a = decode_mask(std::vector<std::uint8_t>(p2.begin(), p2.end()));
  EXPECT_EQ(std::vector<std::uint8_t>(a.labels().begin(), a.labels().end()),
            (std::vector<std::uint8_t>{0, 1, 0}));
}

TEST(MaskTest, Errors) {
  auto bytes = encode_mask(BinaryMask(2, 1, {0, 1}));
  bytes.back() = 2;
  EXPECT_EQ(error_code([&] { decode_mask(bytes); }), "invalid-label");
  bytes.pop_back();
  EXPECT_EQ(error_code([&] { decode_mask(bytes); }), "truncated");
  const std::string garbage = "GIF89a";
  EXPECT_EQ(error_code([&] {
              decode_mask(std::vector<std::uint8_t>(garbage.begin(), garbage.end()));
            }),
            "bad-magic");
  const std::string short_pgm = "P5 4 4 255\n\x01\x02";
  EXPECT_EQ(error_code([&] {
              decode_mask(std::vector<std::uint8_t>(short_pgm.begin(), short_pgm.end()));
            }),
            "truncated");
  const std::string wide_pgm = "P5 1 1 65535\n\x01\x02";
  EXPECT_EQ(error_code([&] {
              decode_mask(std::vector<std::uint8_t>(wide_pgm.begin(), wide_pgm.end()));
            }),
            "bad-pgm");
}

TEST(ManifestTest, MinimalRows) {
  std::istringstream in(
      "image_id,patient_id,group,prob_path,mask_path,split\n"
      "img1,pA,VI,p1.fpm,m1.fbm,\n"
      "img2,pA,VI,p2.fpm,m2.fbm,tune\n");
  const DatasetManifest m = parse_manifest(in, "/data");
  ASSERT_EQ(m.records.size(), 2u);
  EXPECT_EQ(m.records[0].patient_id, m.records[1].patient_id);
  EXPECT_EQ(m.records[0].group, GroupLabel::kVI);
  EXPECT_EQ(m.records[0].split, Split::kUnassigned);
  EXPECT_EQ(m.records[1].split, Split::kTune);
  EXPECT_EQ(m.resolve("p1.fpm"), std::filesystem::path("/data/p1.fpm"));
}

TEST(ManifestTest, SplitColumnOptional) {
  std::istringstream in(
      "image_id,patient_id,group,prob_path,mask_path\r\n"
      "a,p,III,x,y\r\n");
  const DatasetManifest m = parse_manifest(in, "");
  ASSERT_EQ(m.records.size(), 1u);
  EXPECT_EQ(m.records[0].split, Split::kUnassigned);
  EXPECT_EQ(m.records[0].mask_path, "y");
}

TEST(ManifestTest, GroupHistogramMatchesColumnTotals) {
  // Column totals of the per-dataset Fitzpatrick counts: 85/350/145/96/62/16.
  const std::array<std::size_t, 6> totals = {85, 350, 145, 96, 62, 16};
  std::ostringstream csv;
  csv << "image_id,patient_id,group,prob_path,mask_path,split\n";
  std::size_t id = 0;
  for (GroupLabel g : kAllGroups) {
    for (std::size_t i = 0; i < totals[group_index(g)]; ++i, ++id) {
      csv << "img" << id << ",p" << id << ',' << group_token(g) << ",a,b,\n";
    }
  }
  std::istringstream in(csv.str());
  const DatasetManifest m = parse_manifest(in, "");
  EXPECT_EQ(m.records.size(), 754u);
  const auto hist = group_histogram(m);
  for (GroupLabel g : kAllGroups) EXPECT_EQ(hist[g], totals[group_index(g)]);
}

TEST(ManifestTest, Errors) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_manifest(in, "");
  };
  const std::string header = "image_id,patient_id,group,prob_path,mask_path,split\n";
  try {
    parse(header + "img1,p,I,a,b,\nimg1,q,II,c,d,\n");
    FAIL() << "duplicate accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "duplicate-image-id");
    EXPECT_NE(std::string(e.what()).find("img1"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  EXPECT_EQ(error_code([&] { parse(header + "a,p,VII,x,y,\n"); }), "unknown-group");
  EXPECT_EQ(error_code([&] { parse(header + "a,p,I,x\n"); }), "parse-error");
  EXPECT_EQ(error_code([&] { parse(header + "a,p,I,x,y,valid\n"); }), "parse-error");
  EXPECT_EQ(error_code([&] { parse("image_id,patient_id,group\n"); }), "parse-error");
  EXPECT_EQ(error_code([&] { parse(""); }), "parse-error");
}

TEST(ManifestTest, SerializeRoundTripWithQuoting) {
  DatasetManifest m;
  m.records.push_back({"a,1", "p\"x", GroupLabel::kII, "dir/a b.fpm", "m.fbm",
                       Split::kTest});
  m.records.push_back({"b", "q", GroupLabel::kVI, "b.fpm", "b.pgm", Split::kUnassigned});
  std::istringstream in(serialize_manifest(m));
  const DatasetManifest back = parse_manifest(in, "");
  EXPECT_EQ(back.records, m.records);
}

}  // namespace
}  // namespace fitzcal
