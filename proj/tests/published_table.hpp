#pragma once

#include <array>

namespace fitzcal::testing {

// Rounded group rows of the published comparison table: value at the global
// threshold, value at the group threshold, printed relative change (%).
struct PublishedCell {
  const char* model;
  const char* metric;
  int group;  // 1..6
  double at_global;
  double at_group;
  double printed_delta;
};

inline constexpr std::array<PublishedCell, 36> kPublishedCells = {{
    {"U-Net", "Dice", 1, 0.569, 0.575, 0.97},
    {"U-Net", "Dice", 2, 0.584, 0.584, 0.00},
    {"U-Net", "Dice", 3, 0.649, 0.650, 0.05},
    {"U-Net", "Dice", 4, 0.691, 0.657, -4.94},
    {"U-Net", "Dice", 5, 0.557, 0.563, 1.16},
    {"U-Net", "Dice", 6, 0.475, 0.590, 24.13},
    {"ResU-Net", "Dice", 1, 0.543, 0.556, 2.41},
    {"ResU-Net", "Dice", 2, 0.587, 0.585, -0.36},
    {"ResU-Net", "Dice", 3, 0.619, 0.622, 0.49},
    {"ResU-Net", "Dice", 4, 0.723, 0.730, 1.03},
    {"ResU-Net", "Dice", 5, 0.593, 0.561, -5.26},
    {"ResU-Net", "Dice", 6, 0.556, 0.656, 18.01},
    {"SETR-small", "Dice", 1, 0.472, 0.470, -0.54},
    {"SETR-small", "Dice", 2, 0.512, 0.516, 0.66},
    {"SETR-small", "Dice", 3, 0.474, 0.475, 0.26},
    {"SETR-small", "Dice", 4, 0.597, 0.575, -3.71},
    {"SETR-small", "Dice", 5, 0.449, 0.442, -1.52},
    {"SETR-small", "Dice", 6, 0.535, 0.594, 11.04},
    {"U-Net", "bIoU", 1, 0.424, 0.434, 2.42},
    {"U-Net", "bIoU", 2, 0.457, 0.457, 0.00},
    {"U-Net", "bIoU", 3, 0.514, 0.514, 0.01},
    {"U-Net", "bIoU", 4, 0.564, 0.530, -6.06},
    {"U-Net", "bIoU", 5, 0.414, 0.424, 2.37},
    {"U-Net", "bIoU", 6, 0.353, 0.464, 31.46},
    {"ResU-Net", "bIoU", 1, 0.398, 0.411, 3.24},
    {"ResU-Net", "bIoU", 2, 0.454, 0.452, -0.42},
    {"ResU-Net", "bIoU", 3, 0.478, 0.480, 0.45},
    {"ResU-Net", "bIoU", 4, 0.600, 0.613, 2.31},
    {"ResU-Net", "bIoU", 5, 0.455, 0.428, -6.00},
    {"ResU-Net", "bIoU", 6, 0.423, 0.527, 24.63},
    {"SETR-small", "bIoU", 1, 0.338, 0.336, -0.55},
    {"SETR-small", "bIoU", 2, 0.373, 0.376, 0.92},
    {"SETR-small", "bIoU", 3, 0.335, 0.338, 0.72},
    {"SETR-small", "bIoU", 4, 0.456, 0.438, -4.05},
    {"SETR-small", "bIoU", 5, 0.311, 0.306, -1.74},
    {"SETR-small", "bIoU", 6, 0.395, 0.463, 17.14},
}};

}  // namespace fitzcal::testing
