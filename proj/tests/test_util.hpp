#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "fitzcal/data_model.hpp"

namespace fitzcal::testing {

// Random image pairs for property tests. Mask style cycles through all-zero,
// all-one and random labels so degenerate regimes are always covered.
struct RandomImage {
  ProbMap prob;
  BinaryMask mask;
};

inline RandomImage random_image(std::mt19937_64& rng, std::uint32_t max_side,
                                int mask_style) {
  std::uniform_int_distribution<std::uint32_t> side(1, max_side);
  const std::uint32_t w = side(rng);
  const std::uint32_t h = side(rng);
  const std::size_t n = std::size_t{w} * h;
  std::vector<std::uint16_t> q(n);
  std::vector<std::uint8_t> m(n);
  // Mix uniform values with clusters near grid edges (0, 1, 990, 991, 1000).
  std::uniform_int_distribution<int> value(0, 1000);
  std::uniform_int_distribution<int> pick(0, 9);
  constexpr int kEdges[] = {0, 1, 2, 989, 990, 991, 1000};
  std::uniform_int_distribution<int> edge(0, 6);
  const double fg_rate = std::uniform_real_distribution<double>(0, 1)(rng);
  std::bernoulli_distribution fg(fg_rate);
  for (std::size_t i = 0; i < n; ++i) {
    q[i] = static_cast<std::uint16_t>(pick(rng) == 0 ? kEdges[edge(rng)]
                                                     : value(rng));
    switch (mask_style % 3) {
      case 0:
        m[i] = 0;
        break;
      case 1:
        m[i] = 1;
        break;
      default:
        m[i] = fg(rng);
    }
  }
  return {ProbMap(w, h, std::move(q)), BinaryMask(w, h, std::move(m))};
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("fitzcal-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace fitzcal::testing
