#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace fitzcal {

// Fitzpatrick skin type, I (lightest) .. VI (darkest). The underlying value
// is the ordinal 1..6, so the built-in comparison gives the natural order.
enum class GroupLabel : std::uint8_t { kI = 1, kII, kIII, kIV, kV, kVI };

inline constexpr std::size_t kNumGroups = 6;

inline constexpr std::array<GroupLabel, kNumGroups> kAllGroups = {
    GroupLabel::kI,  GroupLabel::kII, GroupLabel::kIII,
    GroupLabel::kIV, GroupLabel::kV,  GroupLabel::kVI};

// 0-based position, usable as an array index.
constexpr std::size_t group_index(GroupLabel g) {
  return static_cast<std::size_t>(g) - 1;
}

constexpr int group_ordinal(GroupLabel g) { return static_cast<int>(g); }

constexpr std::string_view group_token(GroupLabel g) {
  constexpr std::array<std::string_view, kNumGroups> kTokens = {
      "I", "II", "III", "IV", "V", "VI"};
  return kTokens[group_index(g)];
}

inline std::optional<GroupLabel> parse_group(std::string_view token) {
  for (GroupLabel g : kAllGroups) {
    if (group_token(g) == token) return g;
  }
  return std::nullopt;
}

// "Fitz VI" style display name used in tables and plots.
inline std::string group_display_name(GroupLabel g) {
  return "Fitz " + std::string(group_token(g));
}

// Fixed-size per-group storage indexed by GroupLabel.
template <typename T>
class PerGroup {
 public:
  PerGroup() = default;
  explicit PerGroup(const T& fill) { values_.fill(fill); }

  T& operator[](GroupLabel g) { return values_[group_index(g)]; }
  const T& operator[](GroupLabel g) const { return values_[group_index(g)]; }

  bool operator==(const PerGroup&) const = default;

 private:
  std::array<T, kNumGroups> values_{};
};

}  // namespace fitzcal
