#include "fitzcal/kernels.hpp"

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define FITZCAL_HAVE_AVX2_KERNELS 1
#include <immintrin.h>
#endif

#include <array>

#include "fitzcal/data_model.hpp"

namespace fitzcal::kernels::avx2 {

#if FITZCAL_HAVE_AVX2_KERNELS

// Functions carry the target attribute instead of compiling the file with
// -mavx2, so no inline helper from a shared header is emitted with AVX2
// encodings.
#define FITZCAL_AVX2 __attribute__((target("avx2")))

namespace {

FITZCAL_AVX2 inline __m128i quantize4(__m256d p) {
  const __m256d scaled =
      _mm256_add_pd(_mm256_mul_pd(p, _mm256_set1_pd(1000.0)),
                    _mm256_set1_pd(0.5));
  __m256d q = _mm256_floor_pd(scaled);
  q = _mm256_max_pd(q, _mm256_setzero_pd());
  q = _mm256_min_pd(q, _mm256_set1_pd(static_cast<double>(kMilliMax)));
  return _mm256_cvttpd_epi32(q);
}

FITZCAL_AVX2 inline int valid4(__m256d p) {
  const __m256d ge = _mm256_cmp_pd(p, _mm256_set1_pd(-kProbTolerance),
                                   _CMP_GE_OQ);
  const __m256d le = _mm256_cmp_pd(p, _mm256_set1_pd(1.0 + kProbTolerance),
                                   _CMP_LE_OQ);
  return _mm256_movemask_pd(_mm256_and_pd(ge, le));
}

FITZCAL_AVX2 std::size_t quantize(std::span<const float> raw,
                                  std::span<std::uint16_t> out) {
  const std::size_t n = raw.size();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 f = _mm256_loadu_ps(raw.data() + i);
    const __m256d lo = _mm256_cvtps_pd(_mm256_castps256_ps128(f));
    const __m256d hi = _mm256_cvtps_pd(_mm256_extractf128_ps(f, 1));
    if (valid4(lo) != 0xF || valid4(hi) != 0xF) {
      const std::size_t bad = scalar::table().quantize(
          raw.subspan(i, 8), out.subspan(i, 8));
      return i + bad;
    }
    const __m128i packed = _mm_packus_epi32(quantize4(lo), quantize4(hi));
    _mm_storeu_si128(reinterpret_cast<__m128i*>(out.data() + i), packed);
  }
  if (i < n) {
    const std::size_t bad =
        scalar::table().quantize(raw.subspan(i), out.subspan(i));
    if (bad != kAllValid) return i + bad;
  }
  return kAllValid;
}

FITZCAL_AVX2 void histogram(std::span<const std::uint16_t> milli,
                            std::span<const std::uint8_t> labels,
                            std::span<std::uint64_t> fg,
                            std::span<std::uint64_t> bg) {
  // Combined bin index q + 1001 * label, accumulated into two interleaved
  // sub-histograms to break store-to-load dependencies on repeated values.
  constexpr std::size_t kCombined = 2 * kHistogramBins;
  std::array<std::array<std::uint32_t, kCombined>, 2> local{};
  alignas(32) std::array<std::uint16_t, 16> idx;

  const std::size_t n = milli.size();
  const __m256i stride = _mm256_set1_epi16(static_cast<short>(kHistogramBins));
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    const __m256i q = _mm256_loadu_si256(
        reinterpret_cast<const __m256i*>(milli.data() + i));
    const __m256i lab = _mm256_cvtepu8_epi16(
        _mm_loadu_si128(reinterpret_cast<const __m128i*>(labels.data() + i)));
    const __m256i combined = _mm256_add_epi16(q, _mm256_mullo_epi16(lab, stride));
    _mm256_store_si256(reinterpret_cast<__m256i*>(idx.data()), combined);
    for (std::size_t k = 0; k < 16; k += 2) {
      ++local[0][idx[k]];
      ++local[1][idx[k + 1]];
    }
  }
  for (; i < n; ++i) {
    ++local[0][milli[i] + (labels[i] ? kHistogramBins : 0)];
  }
  for (std::size_t b = 0; b < kHistogramBins; ++b) {
    bg[b] += std::uint64_t{local[0][b]} + local[1][b];
    fg[b] += std::uint64_t{local[0][b + kHistogramBins]} +
             local[1][b + kHistogramBins];
  }
}

FITZCAL_AVX2 ThresholdCounts count_at(std::span<const std::uint16_t> milli,
                                      std::span<const std::uint8_t> labels,
                                      std::uint16_t threshold) {
  ThresholdCounts c;
  const std::size_t n = milli.size();
  // Values are <= 1000, so signed 16-bit compares are exact.
  const __m256i below = _mm256_set1_epi16(static_cast<short>(threshold - 1));
  const __m256i one = _mm256_set1_epi16(1);
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    const __m256i q = _mm256_loadu_si256(
        reinterpret_cast<const __m256i*>(milli.data() + i));
    const __m256i lab = _mm256_cmpeq_epi16(
        _mm256_cvtepu8_epi16(_mm_loadu_si128(
            reinterpret_cast<const __m128i*>(labels.data() + i))),
        one);
    const __m256i pred = _mm256_cmpgt_epi16(q, below);
    // movemask yields two bits per 16-bit lane.
    c.tp += static_cast<unsigned>(__builtin_popcount(static_cast<unsigned>(
                _mm256_movemask_epi8(_mm256_and_si256(pred, lab))))) / 2;
    c.fp += static_cast<unsigned>(__builtin_popcount(static_cast<unsigned>(
                _mm256_movemask_epi8(_mm256_andnot_si256(lab, pred))))) / 2;
    c.positives += static_cast<unsigned>(__builtin_popcount(
                       static_cast<unsigned>(_mm256_movemask_epi8(lab)))) / 2;
  }
  if (i < n) {
    const ThresholdCounts tail = scalar::table().count_at(
        milli.subspan(i), labels.subspan(i), threshold);
    c.tp += tail.tp;
    c.fp += tail.fp;
    c.positives += tail.positives;
  }
  return c;
}

}  // namespace

const KernelTable* table() {
  static const KernelTable kTable{"avx2", &quantize, &histogram, &count_at};
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &kTable : nullptr;
}

#else

const KernelTable* table() { return nullptr; }

#endif

}  // namespace fitzcal::kernels::avx2
